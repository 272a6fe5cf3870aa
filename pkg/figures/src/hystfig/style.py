"""Deterministic matplotlib setup shared by the figure scripts."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def apply_style(style_file=None):
    """Base style plus an optional user style file; pins the SVG hash
    salt and strips date metadata so identical inputs give identical
    bytes."""
    plt.rcdefaults()
    plt.rcParams.update({
        "figure.figsize": (6.4, 4.8),
        "figure.dpi": 120,
        "savefig.dpi": 120,
        "axes.grid": True,
        "grid.alpha": 0.3,
        "svg.hashsalt": "hystfig",
    })
    if style_file:
        plt.style.use(style_file)
    return plt


def save_figure(fig, out_path):
    """Write PNG plus SVG siblings of ``out_path``."""
    import os

    root, ext = os.path.splitext(str(out_path))
    ext = ext or ".png"
    written = []
    for e in dict.fromkeys([ext, ".png", ".svg"]):
        p = root + e
        fig.savefig(p, metadata={"Date": None} if e == ".svg" else None)
        written.append(p)
    return written
