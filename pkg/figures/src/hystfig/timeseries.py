"""Probe flux time series from field-solve CSVs.

    plot_timeseries probes-scalar.csv probes-vector.csv \
        --probes C6,C12 --out by.png

Plots B_y(t) for the requested probes, one line style per input file on
shared axes, so runs of the two formulations overlay directly.
"""

from __future__ import annotations

import argparse
import os
import sys

from .io import read_probe_csv
from .style import apply_style, save_figure


def plot_timeseries(probe_csvs, probes=None, out="timeseries.png",
                    style_file=None):
    """Render B_y(t) per probe per file; returns (written paths, figure)."""
    if isinstance(probe_csvs, (str, os.PathLike)):
        probe_csvs = [probe_csvs]
    if not probe_csvs:
        raise ValueError("no input files")
    plt = apply_style(style_file)
    fig, ax = plt.subplots()
    styles = ["-", "--", ":", "-."]
    for i, path in enumerate(probe_csvs):
        data = read_probe_csv(path)
        names = list(probes) if probes else sorted(data)
        for name in names:
            if name not in data:
                raise ValueError(
                    f"{path}: probe {name!r} not present; available: "
                    f"{', '.join(sorted(data))}")
        stem = os.path.splitext(os.path.basename(str(path)))[0]
        for name in names:
            ax.plot(data[name]["t"], data[name]["By"],
                    styles[i % len(styles)], lw=1.2,
                    label=f"{name} ({stem})")
    ax.set_xlabel("t")
    ax.set_ylabel("B_y (T)")
    ax.set_title("probe flux density")
    ax.legend(loc="best", fontsize=8)
    written = save_figure(fig, out)
    return written, fig


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="plot_timeseries",
                                 description="plot probe B_y(t) from probe CSVs")
    ap.add_argument("probe_csvs", nargs="+", help="probe CSV files")
    ap.add_argument("--probes", default=None,
                    help="comma-separated probe names (default: all)")
    ap.add_argument("--out", required=True, help="output image path")
    ap.add_argument("--style", default=None, help="matplotlib style file")
    args = ap.parse_args(argv)
    names = args.probes.split(",") if args.probes else None
    try:
        written, _ = plot_timeseries(args.probe_csvs, names, args.out, args.style)
    except (ValueError, OSError) as exc:
        print(f"plot_timeseries: {exc}", file=sys.stderr)
        return 1
    for p in written:
        print(f"wrote {p}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
