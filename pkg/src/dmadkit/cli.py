"""Command-line interface.

Exit codes: 0 success, 1 usage problems, 2 data or format problems,
3 numeric degeneracies. Every subcommand is deterministic for a fixed
seed, including parallel evaluation.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from .errors import DataError, DmadError, FormatError, NumericError, ValidationError
from .fusion import SlerpConfig
from .metrics import ScoredSample, det_curve
from .networks import CANONICAL_SCHEME, DimScheme, NetworkId, SMALL_SCHEME
from .pipeline import (
    COMPONENTS,
    PipelineConfig,
    load_dmad_model,
    save_dmad_model,
    score_pairs_batch,
    train_dmad,
)
from .protocols import Protocol, RunConfig, run_protocol, write_report
from .store import (
    DatasetManifest,
    EmbeddingDir,
    Label,
    Medium,
    PairFilter,
    Split,
    build_pairs,
    diagnose_manifest,
    infer_scheme,
    load_manifest,
)
from .svm import TrainConfig
from .synth import SynthConfig, generate, write_dataset

_PAIR_ROTATIONS = {"proposed": 0, "pair1": 1, "pair2": 2}


class UsageError(Exception):
    def __init__(self, parser: argparse.ArgumentParser, message: str):
        super().__init__(message)
        self.parser = parser


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit(2); we map usage to 1
        raise UsageError(self, message)


def _medium_arg(value: str) -> Medium | None:
    if value == "both":
        return None
    return Medium(value)


def _open_dataset(data_dir: str) -> tuple[DatasetManifest, EmbeddingDir]:
    root = Path(data_dir)
    manifest = load_manifest(root / "manifest.json")
    store = EmbeddingDir(root / "embeddings", cache=True)
    return manifest, store


def _add_train_options(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("training")
    group.add_argument("--seed", type=int, default=0)
    group.add_argument("--epochs", type=int, default=200)
    group.add_argument("--lr0", type=float, default=0.01)
    group.add_argument("--lr-decay", type=float, default=0.001)
    group.add_argument("--c", type=float, default=1.0, help="hinge loss weight")
    group.add_argument("--tol", type=float, default=1e-6)
    group.add_argument("--no-shuffle", action="store_true")
    group.add_argument("--slerp-t", type=float, default=0.5)
    group.add_argument(
        "--slerp-source", choices=("difference", "raw"), default="difference"
    )
    group.add_argument(
        "--pairs", choices=sorted(_PAIR_ROTATIONS), default="proposed",
        help="anchor choice: the selected pairing or one of the rotated ablations",
    )
    group.add_argument("--score-norm", action="store_true")


def _pipeline_config(args: argparse.Namespace) -> PipelineConfig:
    try:
        return PipelineConfig(
            train=TrainConfig(
                c=args.c,
                epochs=args.epochs,
                lr0=args.lr0,
                lr_decay=args.lr_decay,
                seed=args.seed,
                shuffle=not args.no_shuffle,
                tol=args.tol,
            ),
            slerp=SlerpConfig(t=args.slerp_t),
            slerp_source=args.slerp_source,
            pairs_rotation=_PAIR_ROTATIONS[args.pairs],
            score_norm=args.score_norm,
        )
    except ValueError as exc:
        raise DataError(str(exc)) from None


def _pair_filter(args: argparse.Namespace, medium_attr: str) -> PairFilter:
    return PairFilter(
        doc_medium=_medium_arg(getattr(args, medium_attr)),
        cameras=tuple(args.camera) if args.camera else None,
        distances=tuple(args.distance) if args.distance else None,
    )


def _cmd_synth(args: argparse.Namespace) -> int:
    if args.small:
        scheme = SMALL_SCHEME
    elif args.dims:
        scheme = DimScheme(g1=args.dims[0], g2=args.dims[1])
    else:
        scheme = CANONICAL_SCHEME
    try:
        config = SynthConfig(
            seed=args.seed,
            scheme=scheme,
            subjects_train=args.subjects_train,
            subjects_test=args.subjects_test,
            morphs_train=args.morphs_train,
            morphs_test=args.morphs_test,
            sigma_id=args.sigma_id,
            sigma_probe=args.sigma_probe,
            sigma_printscan=args.sigma_printscan,
            printscan_mix=args.printscan_mix,
            morph_artifact=args.morph_artifact,
            morph_mode=args.morph_mode,
        )
    except ValueError as exc:
        raise DataError(str(exc)) from None
    manifest, embeddings = generate(config)
    write_dataset(manifest, embeddings, args.out, scheme=scheme)
    print(
        f"wrote {len(manifest.entries)} manifest entries and "
        f"{len(embeddings)} embeddings to {args.out}"
    )
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    manifest, store = _open_dataset(args.data)
    findings = diagnose_manifest(manifest)
    for finding in findings:
        print(str(finding), file=sys.stderr)
    if findings:
        raise ValidationError(
            f"manifest failed validation with {len(findings)} finding(s)",
            diagnostics=findings,
        )
    print(f"manifest OK ({len(manifest.entries)} entries)")
    if args.embeddings:
        scheme = infer_scheme(store, manifest)
        checked = 0
        missing: list[str] = []
        strict = EmbeddingDir(store.root, scheme=scheme)
        for entry in manifest.entries:
            for network in NetworkId:
                if not strict.exists(entry.sample_id, network):
                    missing.append(f"{entry.sample_id}.{network.value}")
                    continue
                strict.load(entry.sample_id, network)  # raises on bad content
                checked += 1
        if missing:
            raise DataError(
                f"{len(missing)} embedding file(s) missing, first: {missing[0]}"
            )
        print(
            f"embeddings OK ({checked} files, widths {scheme.g1}/{scheme.g2})"
        )
    return 0


def _cmd_train(args: argparse.Namespace) -> int:
    manifest, store = _open_dataset(args.data)
    model = train_dmad(
        manifest, store, _pair_filter(args, "train_medium"), _pipeline_config(args)
    )
    save_dmad_model(model, args.model)
    anchors = ", ".join(
        f"{g.value}:{s.anchor.value}" for g, s in sorted(model.selections.items())
    )
    print(f"trained model -> {args.model} (anchors {anchors})")
    return 0


def _cmd_score(args: argparse.Namespace) -> int:
    manifest, store = _open_dataset(args.data)
    model = load_dmad_model(args.model)
    split = Split(args.split)
    pairs = build_pairs(manifest, split, _pair_filter(args, "test_medium"))
    if not pairs:
        raise DataError("no pairs match the filter")
    scores = score_pairs_batch(model, store, pairs)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["document_id", "probe_id", "label", *COMPONENTS, "fused"])
        for pair, fused in zip(pairs, scores):
            writer.writerow([
                pair.document_id,
                pair.probe_id,
                pair.label.value,
                *[repr(v) for v in fused.components],
                repr(fused.total),
            ])
    print(f"scored {len(pairs)} pairs -> {args.out}")
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    manifest, store = _open_dataset(args.data)
    rows = run_protocol(
        manifest,
        store,
        Protocol(f"P{args.protocol}"),
        RunConfig(pipeline=_pipeline_config(args), ablation=args.ablation),
        pool_train=args.pool_train,
        jobs=args.jobs,
    )
    with open(args.report, "w", encoding="utf-8") as fh:
        write_report(rows, fh)
    mean_deer = sum(r.d_eer_percent for r in rows) / len(rows)
    print(f"wrote {len(rows)} runs -> {args.report} (mean D-EER {mean_deer:.2f}%)")
    return 0


def _read_score_column(path: str, column: str) -> list[ScoredSample]:
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or "label" not in reader.fieldnames:
                raise FormatError(f"{path}: score CSV needs a 'label' column")
            if column not in reader.fieldnames:
                raise FormatError(f"{path}: no '{column}' column")
            samples = []
            for row in reader:
                samples.append(
                    ScoredSample(float(row[column]), Label(row["label"]))
                )
    except FileNotFoundError:
        raise DataError(f"scores file not found: {path}") from None
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None
    if not samples:
        raise DataError(f"{path}: no score rows")
    return samples


def _det_svg(curve) -> str:
    width, height = 640, 480
    left, right, top, bottom = 70.0, 610.0, 30.0, 420.0

    def x(apcer: float) -> float:
        return left + apcer / 100.0 * (right - left)

    def y(bpcer: float) -> float:
        return bottom - bpcer / 100.0 * (bottom - top)

    points = " ".join(
        f"{x(a):.2f},{y(b):.2f}" for _, a, b in curve.points
    )
    ticks = []
    for value in range(0, 101, 20):
        ticks.append(
            f'<line x1="{x(value):.1f}" y1="{bottom}" x2="{x(value):.1f}" '
            f'y2="{bottom + 6}" stroke="black"/>'
            f'<text x="{x(value):.1f}" y="{bottom + 22}" font-size="12" '
            f'text-anchor="middle">{value}</text>'
            f'<line x1="{left - 6}" y1="{y(value):.1f}" x2="{left}" '
            f'y2="{y(value):.1f}" stroke="black"/>'
            f'<text x="{left - 10}" y="{y(value) + 4:.1f}" font-size="12" '
            f'text-anchor="end">{value}</text>'
        )
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">'
        f'<rect width="{width}" height="{height}" fill="white"/>'
        f'<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>'
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}" stroke="black"/>'
        + "".join(ticks)
        + f'<polyline points="{points}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>'
        f'<text x="{(left + right) / 2}" y="{height - 18}" font-size="13" '
        f'text-anchor="middle">APCER (%)</text>'
        f'<text x="18" y="{(top + bottom) / 2}" font-size="13" text-anchor="middle" '
        f'transform="rotate(-90 18 {(top + bottom) / 2})">BPCER (%)</text>'
        "</svg>\n"
    )


def _cmd_det(args: argparse.Namespace) -> int:
    samples = _read_score_column(args.scores, args.column)
    curve = det_curve(samples)
    with open(args.out, "w", encoding="utf-8") as fh:
        curve.write_csv(fh)
    printed = f"wrote DET curve ({len(curve.points)} points) -> {args.out}"
    if args.svg:
        with open(args.svg, "w", encoding="utf-8") as fh:
            fh.write(_det_svg(curve))
        printed += f" and {args.svg}"
    print(printed)
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    rows: list[dict[str, str]] = []
    for path in args.input:
        try:
            with open(path, "r", encoding="utf-8", newline="") as fh:
                reader = csv.DictReader(fh)
                if reader.fieldnames is None or "d_eer" not in reader.fieldnames:
                    raise FormatError(f"{path}: not a report CSV")
                rows.extend(reader)
        except FileNotFoundError:
            raise DataError(f"report not found: {path}") from None
    if not rows:
        raise DataError("no report rows to summarize")
    columns = ["run_id", "train_medium", "test_medium", "camera", "distance", "d_eer"]
    widths = {c: max(len(c), max(len(r.get(c, "")) for r in rows)) for c in columns}
    print("  ".join(c.ljust(widths[c]) for c in columns))
    for row in rows:
        print("  ".join(row.get(c, "").ljust(widths[c]) for c in columns))
    by_combo: dict[tuple[str, str], list[float]] = {}
    for row in rows:
        key = (row.get("train_medium", ""), row.get("test_medium", ""))
        by_combo.setdefault(key, []).append(float(row["d_eer"]))
    print()
    for (train_medium, test_medium), values in sorted(by_combo.items()):
        mean = sum(values) / len(values)
        print(
            f"train {train_medium or '-'} / test {test_medium or '-'}: "
            f"mean D-EER {mean:.2f}% over {len(values)} run(s)"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dmadkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--small", action="store_true", help="reduced widths 64/32")
    p.add_argument("--dims", type=int, nargs=2, metavar=("G1", "G2"))
    p.add_argument("--subjects-train", type=int, default=56)
    p.add_argument("--subjects-test", type=int, default=21)
    p.add_argument("--morphs-train", type=int, default=92)
    p.add_argument("--morphs-test", type=int, default=28)
    p.add_argument("--sigma-id", type=float, default=0.02)
    p.add_argument("--sigma-probe", type=float, default=0.05)
    p.add_argument("--sigma-printscan", type=float, default=0.02)
    p.add_argument("--printscan-mix", type=float, default=0.10)
    p.add_argument("--morph-artifact", type=float, default=0.4)
    p.add_argument("--morph-mode", choices=("spherical", "linear"), default="spherical")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("validate", help="check a dataset directory")
    p.add_argument("--data", required=True)
    p.add_argument("--embeddings", action="store_true", help="also verify every EMB1 file")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("train", help="train a detector")
    p.add_argument("--data", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--train-medium", choices=("digital", "printscan", "both"), default="both")
    p.add_argument("--camera", type=int, action="append")
    p.add_argument("--distance", type=int, action="append")
    _add_train_options(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("score", help="score pairs with a trained detector")
    p.add_argument("--data", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--split", choices=("train", "test"), default="test")
    p.add_argument("--test-medium", choices=("digital", "printscan", "both"), default="both")
    p.add_argument("--camera", type=int, action="append")
    p.add_argument("--distance", type=int, action="append")
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("evaluate", help="run an evaluation protocol")
    p.add_argument("--data", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--protocol", type=int, choices=(1, 2, 3), required=True)
    p.add_argument("--ablation", action="store_true", help="also report per-component D-EER")
    p.add_argument("--pool-train", action="store_true",
                   help="train on all cells instead of the evaluated cell")
    p.add_argument("--jobs", type=int, default=1)
    _add_train_options(p)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("det", help="DET curve from a score CSV")
    p.add_argument("--scores", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--column", default="fused")
    p.add_argument("--svg", help="also render the curve as SVG")
    p.set_defaults(func=_cmd_det)

    p = sub.add_parser("report", help="summarize report CSVs")
    p.add_argument("--input", nargs="+", required=True)
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        exc.parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except (FormatError, ValidationError, DataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3
    except DmadError as exc:  # any future subtype defaults to the data class
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
