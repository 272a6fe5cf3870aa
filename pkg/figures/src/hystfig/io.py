"""Readers for the two CSV schemas written by the hystkit CLI.

Trace files:  step,t,Hx,Hy,Bx,By,Jx,Jy          (one material point)
Probe files:  step,t,Is,probe,Hx,Hy,Bx,By       (field-solve probes)
"""

from __future__ import annotations

import csv

import numpy as np

TRACE_COLUMNS = ("step", "t", "Hx", "Hy", "Bx", "By", "Jx", "Jy")
PROBE_COLUMNS = ("step", "t", "Is", "probe", "Hx", "Hy", "Bx", "By")


class SchemaError(ValueError):
    pass


def _check_header(header, expected, path):
    if header is None:
        raise SchemaError(f"{path}: empty file")
    missing = [c for c in expected if c not in header]
    if tuple(header) != expected:
        raise SchemaError(f"{path}: bad header, missing columns {missing}"
                          if missing else f"{path}: column order must be "
                          f"{','.join(expected)}")


def read_trace_csv(path) -> dict:
    """Columns of one trace file as float arrays keyed by name."""
    with open(path, newline="") as f:
        rd = csv.reader(f)
        _check_header(next(rd, None), TRACE_COLUMNS, path)
        rows = [rec for rec in rd if rec]
    if not rows:
        raise SchemaError(f"{path}: no rows")
    data = np.array(rows, dtype=float)
    return {name: data[:, i] for i, name in enumerate(TRACE_COLUMNS)}


def read_probe_csv(path) -> dict:
    """Probe file split by probe name: {probe: {column: array}}."""
    with open(path, newline="") as f:
        rd = csv.reader(f)
        _check_header(next(rd, None), PROBE_COLUMNS, path)
        rows = [rec for rec in rd if rec]
    if not rows:
        raise SchemaError(f"{path}: no rows")
    out: dict = {}
    numeric = [c for c in PROBE_COLUMNS if c != "probe"]
    for rec in rows:
        probe = rec[3]
        vals = [float(x) for i, x in enumerate(rec) if i != 3]
        out.setdefault(probe, []).append(vals)
    return {probe: {name: np.array(vals)[:, i] for i, name in enumerate(numeric)}
            for probe, vals in out.items()}
