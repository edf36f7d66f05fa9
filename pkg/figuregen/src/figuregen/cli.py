"""Command-line figure renderer: figuregen render --csv ... --spec ... --out ..."""

from __future__ import annotations

import argparse
import sys

import matplotlib.pyplot as plt

from .render import PlotError, load_plot_spec, render


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="figuregen", description="Render sweep CSVs as figures")
    sub = parser.add_subparsers(dest="command", required=True)
    render_p = sub.add_parser("render", help="render one figure from a sweep CSV")
    render_p.add_argument("--csv", required=True, help="sweep CSV path")
    render_p.add_argument("--spec", required=True, help="plot spec JSON path")
    render_p.add_argument("--out", required=True, help="output image path")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        fig = render(load_plot_spec(args.spec, args.csv, args.out))
        plt.close(fig)
        return 0
    except PlotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
