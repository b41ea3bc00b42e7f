"""Command-line figure generation from sweep CSV files."""

import argparse
import sys

from bcview.data import KINDS, FigureSpec, ViewerError
from bcview.plots import render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bcview", description="Plot cache-simulation sweep results")
    sub = parser.add_subparsers(dest="command", required=True)
    plot = sub.add_parser("plot", help="render one figure from CSV results")
    plot.add_argument("--csv", required=True, action="append",
                      help="sweep CSV (repeatable)")
    plot.add_argument("--kind", required=True, choices=KINDS)
    plot.add_argument("--baseline", default="wc",
                      help="baseline hierarchy key (only wc)")
    plot.add_argument("--out", required=True, help="output image path (.png)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = FigureSpec(tuple(args.csv), args.kind, args.out,
                          baseline=args.baseline)
        path = render(spec)
    except (ViewerError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
