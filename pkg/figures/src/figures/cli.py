"""Render one figure from a metrics CSV.

Exit codes: 0 figure written, 1 bad arguments or unusable input.
"""

import argparse
import sys
from dataclasses import replace
from typing import Optional

from .plotting import ERROR_BAR_MODES, FIGURES, FigureSpec, plot


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="multilru-figures",
        description="draw seed-pooled hit-probability lines from a sweep CSV",
    )
    parser.add_argument("csv", help="metrics CSV produced by a sweep")
    parser.add_argument("out", help="output PNG path; a PDF lands next to it")
    how = parser.add_mutually_exclusive_group(required=True)
    how.add_argument("--preset", choices=sorted(FIGURES), help="ready-made axes")
    how.add_argument("--x", help="x-axis column")
    parser.add_argument("--group", help="comma-separated grouping columns")
    parser.add_argument("--error-bars", choices=ERROR_BAR_MODES, default="stderr")
    return parser


def main(argv: Optional[list] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.preset:
            spec = replace(FIGURES[args.preset](args.csv, args.out), error_bars=args.error_bars)
        else:
            if not args.group:
                raise ValueError("--x needs --group naming at least one column")
            spec = FigureSpec(
                args.csv, args.x, tuple(args.group.split(",")), args.out, args.error_bars
            )
        path = plot(spec)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(path)
    return 0
