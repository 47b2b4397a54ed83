"""`plots` command line entry point."""

from __future__ import annotations

import argparse
import sys

from .figures import bound_gap, explore_curve
from .io import SchemaError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plots", description="render figures from experiment run logs")
    sub = parser.add_subparsers(dest="command", required=True)

    curve = sub.add_parser("explore-curve",
                           help="median + IQR of cumulative exploration steps")
    curve.add_argument("--runs", required=True,
                       help="directory containing seed_*/ replica outputs")
    curve.add_argument("--out", required=True, help="figure file to write")
    curve.set_defaults(fn=explore_curve)

    gap = sub.add_parser("bound-gap",
                         help="observed exploration steps vs the step bound")
    gap.add_argument("--runs", required=True)
    gap.add_argument("--out", required=True)
    gap.set_defaults(fn=bound_gap)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.fn(args.runs, args.out)
    except (SchemaError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
