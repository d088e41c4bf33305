"""Differential morphing-attack detection toolkit.

Compares an enrolment document image against a live probe capture in
the feature spaces of six convolutional networks, classifies the
per-network difference vectors and two spherical-interpolation residues
with linear SVMs, and fuses the eight scores by a plain sum. Ships with
ISO-style error-rate metrics, the grid evaluation protocols, and a
synthetic dataset generator for end-to-end testing.
"""

from .errors import (
    DataError,
    DmadError,
    FormatError,
    NumericError,
    ValidationError,
)
from .fusion import (
    GroupSelection,
    SlerpConfig,
    difference,
    pearson,
    rotate_selection,
    select_optimal_pairs,
    slerp,
    slerp_residue,
    slerp_residues,
)
from .metrics import DetCurve, ScoredSample, bpcer_at_apcer, d_eer, det_curve
from .networks import (
    CANONICAL_SCHEME,
    DimScheme,
    GROUP_MEMBERS,
    Group,
    NETWORKS,
    NetworkId,
    SMALL_SCHEME,
)
from .pipeline import (
    COMPONENTS,
    DmadModel,
    FusedScore,
    PipelineConfig,
    load_dmad_model,
    save_dmad_model,
    score_pair,
    score_pairs_batch,
    train_dmad,
)
from .protocols import (
    MEDIUM_COMBOS,
    Protocol,
    ReportRow,
    RunConfig,
    RunPlan,
    execute_run,
    plan_protocol,
    run_protocol,
    write_report,
)
from .store import (
    DatasetManifest,
    Diagnostic,
    EmbeddingDir,
    EmbeddingRecord,
    EvaluationPair,
    InMemoryEmbeddings,
    Label,
    Medium,
    PairFilter,
    Role,
    SampleEntry,
    Split,
    build_pairs,
    diagnose_manifest,
    embedding_filename,
    load_manifest,
    parse_embedding_filename,
    read_embedding,
    save_manifest,
    validate_manifest,
    write_embedding,
)
from .svm import (
    LinearModel,
    TrainConfig,
    hinge_objective,
    hinge_subgradient,
    load_model,
    save_model,
    svm_score,
    svm_scores,
    train_linear_svm,
)
from .synth import SynthConfig, generate, write_dataset

__version__ = "0.1.0"

__all__ = [
    "CANONICAL_SCHEME",
    "COMPONENTS",
    "DataError",
    "DatasetManifest",
    "DetCurve",
    "Diagnostic",
    "DimScheme",
    "DmadError",
    "DmadModel",
    "EmbeddingDir",
    "EmbeddingRecord",
    "EvaluationPair",
    "FormatError",
    "FusedScore",
    "GROUP_MEMBERS",
    "Group",
    "GroupSelection",
    "InMemoryEmbeddings",
    "Label",
    "LinearModel",
    "MEDIUM_COMBOS",
    "Medium",
    "NETWORKS",
    "NetworkId",
    "NumericError",
    "PairFilter",
    "PipelineConfig",
    "Protocol",
    "ReportRow",
    "Role",
    "RunConfig",
    "RunPlan",
    "SMALL_SCHEME",
    "SampleEntry",
    "ScoredSample",
    "SlerpConfig",
    "Split",
    "SynthConfig",
    "TrainConfig",
    "ValidationError",
    "bpcer_at_apcer",
    "build_pairs",
    "d_eer",
    "det_curve",
    "diagnose_manifest",
    "difference",
    "embedding_filename",
    "execute_run",
    "generate",
    "hinge_objective",
    "hinge_subgradient",
    "load_dmad_model",
    "load_manifest",
    "load_model",
    "parse_embedding_filename",
    "pearson",
    "plan_protocol",
    "read_embedding",
    "rotate_selection",
    "run_protocol",
    "save_dmad_model",
    "save_manifest",
    "save_model",
    "score_pair",
    "score_pairs_batch",
    "select_optimal_pairs",
    "slerp",
    "slerp_residue",
    "slerp_residues",
    "svm_score",
    "svm_scores",
    "train_dmad",
    "train_linear_svm",
    "validate_manifest",
    "write_dataset",
    "write_embedding",
    "write_report",
]
