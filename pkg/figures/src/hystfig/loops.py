"""Overlayed B-vs-H loop figures from trace CSVs.

    plot_loops trace1.csv trace2.csv [--axis x|y] --out loops.png

One curve per input file (legend = file stem); writes both PNG and SVG.
"""

from __future__ import annotations

import argparse
import os
import sys

from .io import read_trace_csv
from .style import apply_style, save_figure


def plot_loops(trace_csvs, axis: str = "x", out="loops.png", style_file=None):
    """Render the loop overlay; returns (written paths, figure)."""
    if axis not in ("x", "y"):
        raise ValueError("axis must be 'x' or 'y'")
    if not trace_csvs:
        raise ValueError("no input files")
    plt = apply_style(style_file)
    fig, ax = plt.subplots()
    comp = axis.upper()
    for path in trace_csvs:
        cols = read_trace_csv(path)
        label = os.path.splitext(os.path.basename(str(path)))[0]
        ax.plot(cols[f"H{axis}"], cols[f"B{axis}"], lw=1.2, label=label)
    ax.set_xlabel(f"H_{axis} (A/m)")
    ax.set_ylabel(f"B_{axis} (T)")
    ax.set_title(f"hysteresis loops, {comp} component")
    ax.legend(loc="best", fontsize=8)
    written = save_figure(fig, out)
    return written, fig


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="plot_loops",
                                 description="overlay B-vs-H loops from trace CSVs")
    ap.add_argument("traces", nargs="+", help="trace CSV files")
    ap.add_argument("--axis", choices=("x", "y"), default="x")
    ap.add_argument("--out", required=True, help="output image path")
    ap.add_argument("--style", default=None, help="matplotlib style file")
    args = ap.parse_args(argv)
    try:
        written, _ = plot_loops(args.traces, args.axis, args.out, args.style)
    except (ValueError, OSError) as exc:
        print(f"plot_loops: {exc}", file=sys.stderr)
        return 1
    for p in written:
        print(f"wrote {p}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
