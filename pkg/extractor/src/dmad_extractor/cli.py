"""Command line entry point.

Exit codes: 0 success, 1 usage problems, 2 extraction failures.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import ExtractorError
from .extract import ExtractorConfig, extract
from .networks import NETWORKS


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _parse_networks(value: str) -> tuple[str, ...]:
    if value == "all":
        return NETWORKS
    return tuple(part.strip() for part in value.split(",") if part.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dmad-extract", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    ext = sub.add_parser("extract", help="export embeddings from an image directory")
    ext.add_argument("--input", required=True, type=Path, help="image directory")
    ext.add_argument("--output", required=True, type=Path, help="dataset directory to create")
    ext.add_argument(
        "--networks", default="all",
        help="'all' or a comma-separated subset of: " + ", ".join(NETWORKS),
    )
    ext.add_argument(
        "--no-pretrained", action="store_true",
        help="use seeded random weights instead of ImageNet weights",
    )
    ext.add_argument("--seed", type=int, default=0, help="seed for random weights")
    ext.add_argument("--batch-size", type=int, default=8)
    ext.add_argument("--device", default="cpu")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = ExtractorConfig(
            input_dir=args.input,
            output_dir=args.output,
            networks=_parse_networks(args.networks),
            pretrained=not args.no_pretrained,
            seed=args.seed,
            batch_size=args.batch_size,
            device=args.device,
        )
    except (_UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        result = extract(config)
    except ExtractorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(
        f"wrote {len(result.files)} embeddings to {result.embedding_dir} "
        f"and {result.fragment_path.name}"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
