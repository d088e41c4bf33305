"""Evaluation protocols over the capture grid.

Protocol 1 crosses the four document-medium combinations with the
fifteen (distance, camera) cells, one run each. Protocol 2 pools the
grid and keeps the four medium combinations. Protocol 3 pools the
mediums and walks the fifteen cells. Every run trains its own detector
on the training split and reports ISO-style error rates on the test
split; probes are live captures, so medium filters bite on the
document side.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass, field
from enum import Enum
from typing import IO

from .errors import DataError
from .metrics import ScoredSample, bpcer_at_apcer, d_eer
from .pipeline import (
    COMPONENTS,
    DmadModel,
    PipelineConfig,
    score_pairs_batch,
    train_dmad,
)
from .store import (
    CAMERAS,
    DISTANCES,
    DatasetManifest,
    EmbeddingProvider,
    Medium,
    PairFilter,
    Split,
    build_pairs,
)

FUSED_KEY = "fused"


class Protocol(str, Enum):
    P1 = "P1"
    P2 = "P2"
    P3 = "P3"


#: Document-medium combinations in reporting order: the train side
#: first, then the test side.
MEDIUM_COMBOS: tuple[tuple[Medium, Medium], ...] = (
    (Medium.DIGITAL, Medium.DIGITAL),
    (Medium.PRINTSCAN, Medium.PRINTSCAN),
    (Medium.DIGITAL, Medium.PRINTSCAN),
    (Medium.PRINTSCAN, Medium.DIGITAL),
)

_MEDIUM_CODE = {Medium.DIGITAL: "dig", Medium.PRINTSCAN: "ps", None: "all"}


@dataclass(frozen=True)
class RunPlan:
    """One training-plus-evaluation unit of a protocol."""

    protocol: Protocol
    run_id: str
    train_filter: PairFilter
    test_filter: PairFilter
    train_medium: Medium | None
    test_medium: Medium | None
    camera: int | None = None
    distance: int | None = None


@dataclass(frozen=True)
class RunConfig:
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    ablation: bool = False


@dataclass
class ReportRow:
    run_id: str
    protocol: Protocol
    train_medium: str
    test_medium: str
    camera: int | None
    distance: int | None
    d_eer_percent: float
    bpcer_at_5_percent: float
    bpcer_at_10_percent: float
    component_deers: dict[str, float] | None = None


def _check_grid_coverage(
    manifest: DatasetManifest,
    mediums: set[Medium],
    per_cell: bool,
) -> None:
    """Fail with one message naming every missing piece of the grid."""
    missing: list[str] = []
    for split in Split:
        docs = manifest.documents(split)
        for medium in sorted(mediums, key=lambda m: m.value):
            if not any(d.medium is medium for d in docs):
                missing.append(f"{split.value} documents with medium {medium.value}")
        probes = manifest.probes(split)
        if per_cell:
            have = {(p.distance, p.camera) for p in probes}
            for distance in DISTANCES:
                for camera in CAMERAS:
                    if (distance, camera) not in have:
                        missing.append(
                            f"{split.value} probes at distance {distance} camera {camera}"
                        )
        elif not probes:
            missing.append(f"{split.value} probes")
    if missing:
        raise DataError(
            "manifest does not cover the protocol grid; missing: " + "; ".join(missing)
        )


def plan_protocol(
    protocol: Protocol,
    manifest: DatasetManifest,
    *,
    pool_train: bool = False,
) -> list[RunPlan]:
    """Expand a protocol into its ordered run plans.

    Coverage is validated up front so a sparse manifest fails with one
    complete list of missing cells instead of failing mid-sweep.
    ``pool_train`` lifts the per-cell camera/distance restriction from
    the training side of protocols 1 and 3.
    """
    plans: list[RunPlan] = []
    if protocol is Protocol.P1:
        _check_grid_coverage(manifest, {m for combo in MEDIUM_COMBOS for m in combo}, True)
        for train_medium, test_medium in MEDIUM_COMBOS:
            for distance in DISTANCES:
                for camera in CAMERAS:
                    plans.append(RunPlan(
                        protocol=protocol,
                        run_id=(
                            f"p1-{_MEDIUM_CODE[train_medium]}-{_MEDIUM_CODE[test_medium]}"
                            f"-d{distance}-c{camera}"
                        ),
                        train_filter=PairFilter(
                            doc_medium=train_medium,
                            cameras=None if pool_train else (camera,),
                            distances=None if pool_train else (distance,),
                        ),
                        test_filter=PairFilter(
                            doc_medium=test_medium,
                            cameras=(camera,),
                            distances=(distance,),
                        ),
                        train_medium=train_medium,
                        test_medium=test_medium,
                        camera=camera,
                        distance=distance,
                    ))
    elif protocol is Protocol.P2:
        _check_grid_coverage(manifest, {m for combo in MEDIUM_COMBOS for m in combo}, False)
        for train_medium, test_medium in MEDIUM_COMBOS:
            plans.append(RunPlan(
                protocol=protocol,
                run_id=f"p2-{_MEDIUM_CODE[train_medium]}-{_MEDIUM_CODE[test_medium]}",
                train_filter=PairFilter(doc_medium=train_medium),
                test_filter=PairFilter(doc_medium=test_medium),
                train_medium=train_medium,
                test_medium=test_medium,
            ))
    elif protocol is Protocol.P3:
        _check_grid_coverage(manifest, set(), True)
        for distance in DISTANCES:
            for camera in CAMERAS:
                plans.append(RunPlan(
                    protocol=protocol,
                    run_id=f"p3-d{distance}-c{camera}",
                    train_filter=PairFilter(
                        cameras=None if pool_train else (camera,),
                        distances=None if pool_train else (distance,),
                    ),
                    test_filter=PairFilter(cameras=(camera,), distances=(distance,)),
                    train_medium=None,
                    test_medium=None,
                    camera=camera,
                    distance=distance,
                ))
    else:  # pragma: no cover - enum is closed
        raise DataError(f"unknown protocol {protocol}")
    return plans


def execute_run(
    manifest: DatasetManifest,
    embeddings: EmbeddingProvider,
    plan: RunPlan,
    config: RunConfig = RunConfig(),
) -> ReportRow:
    """Train on the plan's training slice, evaluate on its test slice."""
    model = train_dmad(manifest, embeddings, plan.train_filter, config.pipeline)
    return evaluate_model(manifest, embeddings, model, plan, ablation=config.ablation)


def evaluate_model(
    manifest: DatasetManifest,
    embeddings: EmbeddingProvider,
    model: DmadModel,
    plan: RunPlan,
    *,
    ablation: bool = False,
) -> ReportRow:
    test_pairs = build_pairs(manifest, Split.TEST, plan.test_filter)
    if not test_pairs:
        raise DataError(f"run {plan.run_id}: no test pairs match the filter")
    fused = score_pairs_batch(model, embeddings, test_pairs)
    totals = [ScoredSample(fs.total, p.label) for fs, p in zip(fused, test_pairs)]
    row = ReportRow(
        run_id=plan.run_id,
        protocol=plan.protocol,
        train_medium=_MEDIUM_CODE[plan.train_medium],
        test_medium=_MEDIUM_CODE[plan.test_medium],
        camera=plan.camera,
        distance=plan.distance,
        d_eer_percent=d_eer(totals),
        bpcer_at_5_percent=bpcer_at_apcer(totals, 5.0),
        bpcer_at_10_percent=bpcer_at_apcer(totals, 10.0),
    )
    if ablation:
        deers: dict[str, float] = {}
        for name in COMPONENTS:
            samples = [
                ScoredSample(fs.component(name), p.label)
                for fs, p in zip(fused, test_pairs)
            ]
            deers[name] = d_eer(samples)
        deers[FUSED_KEY] = row.d_eer_percent
        row.component_deers = deers
    return row


def run_protocol(
    manifest: DatasetManifest,
    embeddings: EmbeddingProvider,
    protocol: Protocol,
    config: RunConfig = RunConfig(),
    *,
    pool_train: bool = False,
    jobs: int = 1,
) -> list[ReportRow]:
    """Execute every plan of a protocol, in plan order.

    ``jobs`` > 1 runs plans in a thread pool; each plan is independent,
    so the result list is identical to the sequential one.
    """
    plans = plan_protocol(protocol, manifest, pool_train=pool_train)
    if jobs <= 1:
        return [execute_run(manifest, embeddings, plan, config) for plan in plans]
    with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(execute_run, manifest, embeddings, plan, config) for plan in plans]
        return [f.result() for f in futures]


def write_report(rows: list[ReportRow], out: IO[str]) -> None:
    """CSV report, one row per run; ablation columns appear when any
    row carries component rates."""
    with_ablation = any(r.component_deers is not None for r in rows)
    header = [
        "run_id", "protocol", "train_medium", "test_medium",
        "camera", "distance",
        "d_eer", "bpcer_at_5", "bpcer_at_10",
    ]
    if with_ablation:
        header += [f"deer_{name}" for name in COMPONENTS] + [f"deer_{FUSED_KEY}"]
    out.write(",".join(header) + "\n")
    for row in rows:
        cells = [
            row.run_id,
            row.protocol.value,
            row.train_medium,
            row.test_medium,
            "" if row.camera is None else str(row.camera),
            "" if row.distance is None else str(row.distance),
            f"{row.d_eer_percent:.6f}",
            f"{row.bpcer_at_5_percent:.6f}",
            f"{row.bpcer_at_10_percent:.6f}",
        ]
        if with_ablation:
            deers = row.component_deers or {}
            for name in list(COMPONENTS) + [FUSED_KEY]:
                value = deers.get(name)
                cells.append("" if value is None else f"{value:.6f}")
        out.write(",".join(cells) + "\n")
