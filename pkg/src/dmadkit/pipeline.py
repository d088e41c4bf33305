"""End-to-end detector: eight residual classifiers fused by a sum rule.

Training turns every admissible (document, probe) training pair into
per-network difference vectors, fits one linear SVM per network, picks
each width group's interpolation anchor from the correlation structure
of those differences, fits one more SVM per group on the interpolation
residues, and freezes everything into a single serializable model.

Scoring replays the same transform on one pair and adds the eight
component scores left to right in a fixed order; higher totals mean
attack.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import DataError, FormatError
from .fusion import (
    GroupSelection,
    SlerpConfig,
    _slerp_rows,
    rotate_selection,
    select_optimal_pairs,
    slerp_residues,
)
from .networks import GROUP_MEMBERS, Group, NETWORKS, NetworkId
from .store import (
    DatasetManifest,
    EmbeddingProvider,
    EmbeddingRecord,
    EvaluationPair,
    Label,
    PairFilter,
    Split,
    build_pairs,
)
from .svm import LinearModel, TrainConfig, svm_scores, train_linear_svm

PIPELINE_FORMAT_VERSION = 1

RESIDUE_KEYS: dict[Group, str] = {Group.G1: "residue_g1", Group.G2: "residue_g2"}

#: Fixed component order of the fused sum: six networks, then the two
#: group residues.
COMPONENTS: tuple[str, ...] = tuple(n.value for n in NETWORKS) + (
    RESIDUE_KEYS[Group.G1],
    RESIDUE_KEYS[Group.G2],
)

SLERP_SOURCES = ("difference", "raw")


@dataclass(frozen=True)
class PipelineConfig:
    """Everything that shapes one training run.

    ``slerp_source`` picks what the group interpolation consumes:
    ``difference`` (default) interpolates the per-network difference
    vectors, ``raw`` interpolates the raw embeddings of document and
    probe separately and differences afterwards. ``pairs_rotation``
    moves each group's anchor along declaration order (the pairing
    ablations); ``score_norm`` standardizes component scores with
    training statistics before the sum.
    """

    train: TrainConfig = TrainConfig()
    slerp: SlerpConfig = SlerpConfig()
    slerp_source: str = "difference"
    pairs_rotation: int = 0
    score_norm: bool = False

    def __post_init__(self) -> None:
        if self.slerp_source not in SLERP_SOURCES:
            raise ValueError(f"slerp_source must be one of {SLERP_SOURCES}")
        if self.pairs_rotation not in (0, 1, 2):
            raise ValueError("pairs_rotation must be 0, 1 or 2")


@dataclass(frozen=True)
class FusedScore:
    """The eight component scores of one comparison, in fixed order."""

    components: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.components) != len(COMPONENTS):
            raise DataError(f"expected {len(COMPONENTS)} component scores")

    @property
    def total(self) -> float:
        value = 0.0
        for s in self.components:  # plain left-to-right addition, kept exact
            value += s
        return value

    def component(self, name: str) -> float:
        return self.components[COMPONENTS.index(name)]

    def subtotal(self, names: Iterable[str]) -> float:
        """Left-to-right sum of a component subset, in canonical order."""
        wanted = set(names)
        unknown = wanted - set(COMPONENTS)
        if unknown:
            raise DataError(f"unknown components: {sorted(unknown)}")
        value = 0.0
        for name, score in zip(COMPONENTS, self.components):
            if name in wanted:
                value += score
        return value

    def as_dict(self) -> dict[str, float]:
        return dict(zip(COMPONENTS, self.components))


@dataclass
class DmadModel:
    """Trained detector: per-network models, selections, residue models."""

    network_models: dict[NetworkId, LinearModel]
    selections: dict[Group, GroupSelection]
    residue_models: dict[Group, LinearModel]
    slerp: SlerpConfig = field(default_factory=SlerpConfig)
    slerp_source: str = "difference"
    score_stats: dict[str, tuple[float, float]] | None = None
    train_seed: int = 0

    def __post_init__(self) -> None:
        missing = [n.value for n in NETWORKS if n not in self.network_models]
        if missing:
            raise DataError(f"model lacks networks: {missing}")
        for group in Group:
            if group not in self.selections or group not in self.residue_models:
                raise DataError(f"model lacks selection or residue model for {group.value}")
            dims = {self.network_models[n].feature_dim for n in GROUP_MEMBERS[group]}
            dims.add(self.residue_models[group].feature_dim)
            if len(dims) != 1:
                raise DataError(f"inconsistent feature widths inside group {group.value}")

    def group_dim(self, group: Group) -> int:
        return self.residue_models[group].feature_dim

    def to_dict(self) -> dict:
        return {
            "format_version": PIPELINE_FORMAT_VERSION,
            "components": list(COMPONENTS),
            "train_seed": self.train_seed,
            "slerp": {"t": self.slerp.t, "parallel_threshold": self.slerp.parallel_threshold},
            "slerp_source": self.slerp_source,
            "selections": {g.value: s.to_dict() for g, s in self.selections.items()},
            "network_models": {
                n.value: self.network_models[n].to_dict() for n in NETWORKS
            },
            "residue_models": {
                g.value: self.residue_models[g].to_dict() for g in Group
            },
            "score_stats": (
                None
                if self.score_stats is None
                else {k: list(v) for k, v in self.score_stats.items()}
            ),
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "DmadModel":
        if not isinstance(raw, dict):
            raise FormatError("model JSON must be an object")
        version = raw.get("format_version")
        if version != PIPELINE_FORMAT_VERSION:
            raise FormatError(f"unsupported model format_version {version}")
        try:
            slerp_raw = raw["slerp"]
            model = cls(
                network_models={
                    NetworkId(name): LinearModel.from_dict(m)
                    for name, m in raw["network_models"].items()
                },
                selections={
                    Group(name): GroupSelection.from_dict(s)
                    for name, s in raw["selections"].items()
                },
                residue_models={
                    Group(name): LinearModel.from_dict(m)
                    for name, m in raw["residue_models"].items()
                },
                slerp=SlerpConfig(
                    t=float(slerp_raw["t"]),
                    parallel_threshold=float(slerp_raw["parallel_threshold"]),
                ),
                slerp_source=str(raw.get("slerp_source", "difference")),
                score_stats=(
                    None
                    if raw.get("score_stats") is None
                    else {k: (float(v[0]), float(v[1])) for k, v in raw["score_stats"].items()}
                ),
                train_seed=int(raw.get("train_seed", 0)),
            )
        except KeyError as exc:
            raise FormatError(f"model JSON missing field {exc}") from None
        except ValueError as exc:
            raise FormatError(f"model JSON invalid: {exc}") from None
        return model


def save_dmad_model(model: DmadModel, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model.to_dict(), fh)
        fh.write("\n")


def load_dmad_model(path: str | Path) -> DmadModel:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise DataError(f"model file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise FormatError(f"model file is not valid JSON: {exc}") from None
    return DmadModel.from_dict(raw)


def _as_vectors(
    embeddings: Mapping[NetworkId, np.ndarray] | Iterable[EmbeddingRecord],
) -> dict[NetworkId, np.ndarray]:
    out: dict[NetworkId, np.ndarray] = {}
    if isinstance(embeddings, Mapping):
        for key, value in embeddings.items():
            network = key if isinstance(key, NetworkId) else NetworkId(key)
            out[network] = np.asarray(value, dtype=np.float64)
    else:
        for record in embeddings:
            if record.network is None:
                raise DataError(f"record '{record.sample_id}' carries no network identity")
            if record.network in out:
                raise DataError(f"duplicate record for network {record.network}")
            out[record.network] = np.asarray(record.values, dtype=np.float64)
    missing = [n.value for n in NETWORKS if n not in out]
    if missing:
        raise DataError(f"missing embeddings for networks: {missing}")
    return out


def _difference_matrices(
    provider: EmbeddingProvider,
    pairs: list[EvaluationPair],
) -> dict[NetworkId, np.ndarray]:
    """Stack document-minus-probe vectors for every pair, per network."""
    out: dict[NetworkId, np.ndarray] = {}
    for network in NETWORKS:
        rows = []
        width: int | None = None
        for pair in pairs:
            doc = np.asarray(provider.vector(pair.document_id, network), dtype=np.float64)
            probe = np.asarray(provider.vector(pair.probe_id, network), dtype=np.float64)
            if doc.shape != probe.shape or doc.ndim != 1:
                raise DataError(
                    f"embedding shape mismatch for pair ({pair.document_id}, {pair.probe_id}) "
                    f"on {network}: {doc.shape} vs {probe.shape}"
                )
            if width is None:
                width = doc.shape[0]
            elif doc.shape[0] != width:
                raise DataError(f"inconsistent {network} embedding width across samples")
            rows.append(doc - probe)
        out[network] = np.vstack(rows)
    return out


def _raw_matrices(
    provider: EmbeddingProvider,
    pairs: list[EvaluationPair],
) -> tuple[dict[NetworkId, np.ndarray], dict[NetworkId, np.ndarray]]:
    docs: dict[NetworkId, np.ndarray] = {}
    probes: dict[NetworkId, np.ndarray] = {}
    for network in NETWORKS:
        docs[network] = np.vstack(
            [np.asarray(provider.vector(p.document_id, network), dtype=np.float64) for p in pairs]
        )
        probes[network] = np.vstack(
            [np.asarray(provider.vector(p.probe_id, network), dtype=np.float64) for p in pairs]
        )
    return docs, probes


def _residue_matrix(
    group: Group,
    selection: GroupSelection,
    config: PipelineConfig,
    differences: dict[NetworkId, np.ndarray],
    raw: tuple[dict[NetworkId, np.ndarray], dict[NetworkId, np.ndarray]] | None,
) -> np.ndarray:
    if config.slerp_source == "difference":
        return slerp_residues(differences, selection, config.slerp, zero_fallback=True)
    docs, probes = raw  # type: ignore[misc]
    a, pa, pb = selection.anchor, selection.partner_a, selection.partner_b
    doc_first = _slerp_rows(docs[a], docs[pa], config.slerp, zero_fallback=True)
    probe_first = _slerp_rows(probes[a], probes[pa], config.slerp, zero_fallback=True)
    doc_second = _slerp_rows(docs[a], docs[pb], config.slerp, zero_fallback=True)
    probe_second = _slerp_rows(probes[a], probes[pb], config.slerp, zero_fallback=True)
    return (doc_first - probe_first) - (doc_second - probe_second)


def train_dmad(
    manifest: DatasetManifest,
    embeddings: EmbeddingProvider,
    train_filter: PairFilter = PairFilter(),
    config: PipelineConfig = PipelineConfig(),
) -> DmadModel:
    """Train the full detector on the manifest's training split.

    Component classifiers get consecutive seeds derived from the base
    training seed, so one config value pins the whole model; the same
    data and config reproduce the model bit for bit.
    """
    pairs = build_pairs(manifest, Split.TRAIN, train_filter)
    if not pairs:
        raise DataError("no training pairs match the filter")
    labels = np.array([1.0 if p.label is Label.MORPH else -1.0 for p in pairs])
    if np.unique(labels).size < 2:
        raise DataError("single-class data: training pairs must include both labels")

    differences = _difference_matrices(embeddings, pairs)
    raw = _raw_matrices(embeddings, pairs) if config.slerp_source == "raw" else None

    network_models: dict[NetworkId, LinearModel] = {}
    for offset, network in enumerate(NETWORKS):
        cfg = config.train.with_seed(config.train.seed + offset)
        network_models[network] = train_linear_svm(differences[network], labels, cfg)

    selections: dict[Group, GroupSelection] = {}
    residue_models: dict[Group, LinearModel] = {}
    for offset, group in enumerate(Group):
        selection = select_optimal_pairs(
            {n: differences[n] for n in GROUP_MEMBERS[group]}, group
        )
        selection = rotate_selection(selection, config.pairs_rotation)
        selections[group] = selection
        residues = _residue_matrix(group, selection, config, differences, raw)
        cfg = config.train.with_seed(config.train.seed + len(NETWORKS) + offset)
        residue_models[group] = train_linear_svm(residues, labels, cfg)

    model = DmadModel(
        network_models=network_models,
        selections=selections,
        residue_models=residue_models,
        slerp=config.slerp,
        slerp_source=config.slerp_source,
        score_stats=None,
        train_seed=config.train.seed,
    )
    if config.score_norm:
        columns = _component_columns(model, differences, raw)
        stats: dict[str, tuple[float, float]] = {}
        for name, scores in columns.items():
            std = float(scores.std())
            stats[name] = (float(scores.mean()), std if std > 1e-12 else 1.0)
        model.score_stats = stats
    return model


def _component_columns(
    model: DmadModel,
    differences: dict[NetworkId, np.ndarray],
    raw: tuple[dict[NetworkId, np.ndarray], dict[NetworkId, np.ndarray]] | None,
) -> dict[str, np.ndarray]:
    """Raw (un-normalized) component scores for a batch, keyed by name."""
    config = PipelineConfig(slerp=model.slerp, slerp_source=model.slerp_source)
    columns: dict[str, np.ndarray] = {}
    for network in NETWORKS:
        columns[network.value] = svm_scores(model.network_models[network], differences[network])
    for group in Group:
        residues = _residue_matrix(
            group, model.selections[group], config, differences, raw
        )
        columns[RESIDUE_KEYS[group]] = svm_scores(model.residue_models[group], residues)
    return columns


def score_pairs_batch(
    model: DmadModel,
    provider: EmbeddingProvider,
    pairs: list[EvaluationPair],
) -> list[FusedScore]:
    """Score many comparisons at once; order follows the input list."""
    if not pairs:
        return []
    differences = _difference_matrices(provider, pairs)
    for network in NETWORKS:
        expected = model.network_models[network].feature_dim
        got = differences[network].shape[1]
        if got != expected:
            raise DataError(
                f"feature dimension mismatch for {network}: got {got}, model expects {expected}"
            )
    raw = _raw_matrices(provider, pairs) if model.slerp_source == "raw" else None
    columns = _component_columns(model, differences, raw)
    if model.score_stats is not None:
        for name, (mean, std) in model.score_stats.items():
            columns[name] = (columns[name] - mean) / std
    stacked = np.column_stack([columns[name] for name in COMPONENTS])
    return [FusedScore(components=tuple(float(v) for v in row)) for row in stacked]


def score_pair(
    model: DmadModel,
    document: Mapping[NetworkId, np.ndarray] | Iterable[EmbeddingRecord],
    probe: Mapping[NetworkId, np.ndarray] | Iterable[EmbeddingRecord],
) -> FusedScore:
    """Score one document/probe comparison from its twelve embeddings."""
    doc_vectors = _as_vectors(document)
    probe_vectors = _as_vectors(probe)

    class _PairProvider:
        def vector(self, sample_id: str, network: NetworkId) -> np.ndarray:
            return doc_vectors[network] if sample_id == "doc" else probe_vectors[network]

    fake_pair = EvaluationPair(document_id="doc", probe_id="probe", label=Label.BONAFIDE)
    return score_pairs_batch(model, _PairProvider(), [fake_pair])[0]
