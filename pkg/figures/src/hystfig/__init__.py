"""Static figures from hystkit CSV output.

Reads only the two documented CSV schemas (point traces and field-probe
rows) and renders loop and time-series figures; all physics stays in the
producing package.
"""

from .io import read_probe_csv, read_trace_csv
from .loops import plot_loops
from .timeseries import plot_timeseries

__all__ = ["read_trace_csv", "read_probe_csv", "plot_loops", "plot_timeseries"]
