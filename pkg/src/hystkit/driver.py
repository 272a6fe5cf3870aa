"""Time-stepped single-material-point simulations and the operator benchmark.

A protocol defines an excitation sequence (uniaxial sine, rotational
ramp, nested multi-amplitude sines, or replay of a previously written
trace CSV).  The driver steps the forward or inverse operator through
the sequence, committing the material state after every step, and emits
trace rows ``step,t,Hx,Hy,Bx,By,Jx,Jy``.

Floats are written with ``repr`` (shortest round-trip form), so a written
trace replayed through ``csv-replay`` reproduces identical rows bit for
bit: the operators are deterministic functions of their float inputs.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass

import numpy as np

from .errors import OperatorError
from .forward import forward_solve_batch, prepare_pinned, solve_pinned_batch
from .inverse import coupled_objective_arrays, inverse_solve_batch
from .material import (MU0, MaterialParams, SolverSettings,
                       graded_chain_material)
from .newton import minimize

_KINDS = ("uniaxial-sine", "rotational-ramp", "multi-amplitude-sine", "csv-replay")
_DIRECTIONS = ("forward", "inverse")

TRACE_COLUMNS = ("step", "t", "Hx", "Hy", "Bx", "By", "Jx", "Jy")
BENCH_COLUMNS = ("nchi", "dir", "time_ms", "iters")


@dataclass(frozen=True)
class Protocol:
    """Excitation protocol for a single material point.

    ``amplitudes`` holds the peak field(s) H_m in A/m; only
    ``multi-amplitude-sine`` uses more than one (independent runs from
    the virgin state).  ``ramp_periods`` is the number of periods over
    which the rotational ramp reaches full amplitude.  With
    ``literal_rotation`` the second field component is cos(t) with unit
    amplitude instead of the amplitude-scaled cosine.
    """

    kind: str = "uniaxial-sine"
    amplitudes: tuple[float, ...] = (180.0,)
    steps_per_period: int = 500
    periods: int = 3
    direction: str = "forward"
    replay_path: str | None = None
    literal_rotation: bool = False
    ramp_periods: int = 3

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown protocol kind {self.kind!r}")
        if self.direction not in _DIRECTIONS:
            raise ValueError(f"unknown direction {self.direction!r}")
        if self.kind != "csv-replay":
            if self.steps_per_period < 8:
                raise ValueError("steps_per_period must be >= 8")
            if self.periods < 1:
                raise ValueError("periods must be >= 1")
            if len(self.amplitudes) < 1 or any(a <= 0 for a in self.amplitudes):
                raise ValueError("amplitudes must be positive")
        elif self.replay_path is None:
            raise ValueError("csv-replay needs replay_path")


@dataclass(frozen=True)
class TraceRow:
    step: int
    t: float
    h: np.ndarray
    b: np.ndarray
    j_total: np.ndarray


@dataclass
class TraceRun:
    label: str
    rows: list


def _sine_sequence(amplitude: float, spp: int, periods: int):
    i = np.arange(1, spp * periods + 1)
    t = 2.0 * np.pi * i / spp
    h = np.zeros((i.size, 2))
    h[:, 0] = amplitude * np.sin(t)
    return t, h


def _rotational_sequence(amplitude: float, spp: int, periods: int,
                         ramp_periods: int, literal: bool):
    i = np.arange(1, spp * periods + 1)
    t = 2.0 * np.pi * i / spp
    hm = amplitude * np.minimum(t / (2.0 * np.pi * ramp_periods), 1.0)
    h = np.empty((i.size, 2))
    h[:, 0] = hm * np.sin(t)
    h[:, 1] = np.cos(t) if literal else hm * np.cos(t)
    return t, h


class PreparedOperator:
    """Per-run cache of the flattened material parameter arrays.

    Stepping a protocol calls the operators thousands of times; pulling
    the per-site arrays out of :class:`MaterialParams` once keeps the
    hot loop free of repeated tuple-to-array conversions.
    """

    def __init__(self, params: MaterialParams, settings: SolverSettings):
        self.params = params
        self.settings = settings
        self.chi = params.chi
        self.w = params.weight
        self.A = params.steepness
        self.js = params.saturation
        self.K = params.n_sites
        self.prep = prepare_pinned(self.chi, self.w, self.A, self.js,
                                   settings, (self.K,))

    def forward_step(self, h, jp):
        """One forward update; returns (b, j_next, per-site iterations)."""
        hb = np.broadcast_to(h, (self.K, 2))
        res = solve_pinned_batch(hb, jp, self.chi, self.w, self.A, self.js,
                                 self.settings, prep=self.prep)
        if not res.converged.all():
            k = int(np.flatnonzero(~res.converged)[0])
            raise OperatorError(f"forward inner solve failed at site {k}", site=k)
        return MU0 * h + res.j.sum(axis=0), res.j, res.iterations

    def inverse_step(self, b, jp):
        """One inverse update; returns (h, j_next, Newton iterations)."""
        obj = coupled_objective_arrays(b, jp, self.chi, self.w, self.A, self.js,
                                       self.settings)
        scale = float(np.linalg.norm(b - jp.sum(axis=0)) / MU0 + self.chi.max())
        report = minimize(obj, jp.reshape(-1), self.settings, tol_scale=scale)
        if not report.converged:
            raise OperatorError("inverse inner solve failed",
                                iterations=report.iterations,
                                grad_norm=report.grad_norm)
        j = report.minimizer.reshape(self.K, 2)
        return (b - j.sum(axis=0)) / MU0, j, report.iterations


def _run_forward(op: PreparedOperator, t, h):
    jp = np.zeros((op.K, 2))
    rows = []
    for i in range(t.size):
        b, jp, _ = op.forward_step(h[i], jp)
        rows.append(TraceRow(i + 1, float(t[i]), h[i].copy(), b, jp.sum(axis=0)))
    return rows


def _run_inverse(op: PreparedOperator, t, b_seq, steps=None):
    jp = np.zeros((op.K, 2))
    rows = []
    for i in range(t.size):
        h, jp, _ = op.inverse_step(b_seq[i], jp)
        step = i + 1 if steps is None else int(steps[i])
        rows.append(TraceRow(step, float(t[i]), h, b_seq[i].copy(), jp.sum(axis=0)))
    return rows


def run_protocol(params: MaterialParams, protocol: Protocol,
                 settings: SolverSettings = SolverSettings()) -> list:
    """Execute a protocol; returns a list of :class:`TraceRun`.

    Every run starts from the virgin state (all partial polarizations
    zero) and commits the state after each accepted step.  In the
    inverse direction the flux sequence comes either from the replayed
    CSV or from an internal forward pass over the same excitation.
    """
    op = PreparedOperator(params, settings)
    runs = []

    if protocol.kind == "csv-replay":
        rows_in = read_trace(protocol.replay_path)
        t = np.array([r.t for r in rows_in])
        steps = np.array([r.step for r in rows_in])
        if protocol.direction == "forward":
            h = np.array([r.h for r in rows_in])
            jp = np.zeros((op.K, 2))
            rows = []
            for i in range(t.size):
                b, jp, _ = op.forward_step(h[i], jp)
                rows.append(TraceRow(int(steps[i]), float(t[i]), h[i].copy(), b,
                                     jp.sum(axis=0)))
            runs.append(TraceRun("replay", rows))
        else:
            b_seq = np.array([r.b for r in rows_in])
            runs.append(TraceRun("replay", _run_inverse(op, t, b_seq, steps)))
        return runs

    if protocol.kind == "multi-amplitude-sine":
        sequences = [(f"Hm{a:g}", *_sine_sequence(a, protocol.steps_per_period,
                                                  protocol.periods))
                     for a in protocol.amplitudes]
    elif protocol.kind == "uniaxial-sine":
        sequences = [(f"Hm{protocol.amplitudes[0]:g}",
                      *_sine_sequence(protocol.amplitudes[0],
                                      protocol.steps_per_period, protocol.periods))]
    else:
        sequences = [(f"rot{protocol.amplitudes[0]:g}",
                      *_rotational_sequence(protocol.amplitudes[0],
                                            protocol.steps_per_period,
                                            protocol.periods,
                                            protocol.ramp_periods,
                                            protocol.literal_rotation))]

    for label, t, h in sequences:
        if protocol.direction == "forward":
            runs.append(TraceRun(label, _run_forward(op, t, h)))
        else:
            fwd = _run_forward(op, t, h)
            b_seq = np.array([r.b for r in fwd])
            runs.append(TraceRun(label, _run_inverse(op, t, b_seq)))
    return runs


def write_trace(path, rows):
    """Write trace rows as CSV with full-precision round-trip floats."""
    with open(path, "w", newline="") as f:
        wr = csv.writer(f, lineterminator="\n")
        wr.writerow(TRACE_COLUMNS)
        for r in rows:
            wr.writerow([r.step, repr(float(r.t)),
                         repr(float(r.h[0])), repr(float(r.h[1])),
                         repr(float(r.b[0])), repr(float(r.b[1])),
                         repr(float(r.j_total[0])), repr(float(r.j_total[1]))])


def read_trace(path):
    """Read a trace CSV written by :func:`write_trace`."""
    rows = []
    with open(path, newline="") as f:
        rd = csv.reader(f)
        header = next(rd, None)
        if header is None or tuple(header) != TRACE_COLUMNS:
            missing = set(TRACE_COLUMNS) - set(header or ())
            raise ValueError(f"bad trace header, missing columns: {sorted(missing)}")
        for rec in rd:
            vals = [float(x) for x in rec[1:]]
            rows.append(TraceRow(int(rec[0]), vals[0],
                                 np.array(vals[1:3]), np.array(vals[3:5]),
                                 np.array(vals[5:7])))
    if not rows:
        raise ValueError("no rows")
    return rows


def zero_crossings(rows):
    """Interpolated H_x values where J_x crosses zero.

    Returns a list of ``(h_cross, branch)`` with branch ``"ascending"``
    or ``"descending"`` according to the sign of the H_x sweep at the
    crossing.  Used to read coercive fields off a computed major loop.
    """
    out = []
    for a, b in zip(rows[:-1], rows[1:]):
        ja, jb = a.j_total[0], b.j_total[0]
        if ja == 0.0 and jb == 0.0:
            continue
        if ja * jb < 0.0 or (ja != 0.0 and jb == 0.0):
            frac = ja / (ja - jb) if ja != jb else 0.0
            h_cross = a.h[0] + frac * (b.h[0] - a.h[0])
            branch = "ascending" if b.h[0] > a.h[0] else "descending"
            out.append((float(h_cross), branch))
    return out


@dataclass(frozen=True)
class BenchRow:
    nchi: int
    direction: str
    time_ms: float
    iters: float


def run_benchmark(n_chi_list, repetitions: int = 3, steps: int = 400,
                  amplitude: float = 500.0, points: int = 64,
                  settings: SolverSettings = SolverSettings()) -> list:
    """Mean per-step wall time and Newton iterations for both operators.

    For each site count the material is the equally weighted chain with
    pinning strengths graded linearly up to 140 A/m (steepness 50,
    saturation 1.54 T), driven by uniaxial sines.  The timed quantity is
    one load step of a batch of ``points`` independent material points
    (amplitudes spread over [0.4, 1] of the peak, as in a field solve
    where every point sees a different excitation) through the
    vectorized operator kernels, divided by the batch size.  Batching
    amortizes the interpreter dispatch overhead, so the forward/inverse
    cost ratio reflects the decoupled 2-dim solves against the coupled
    dense 2N-dim factorizations rather than call overhead.

    One untimed warm-up pass runs first; the reported time is the
    minimum over ``repetitions`` timed passes of the per-step per-point
    average on a monotonic clock (the minimum is the least-contended
    pass, the standard low-noise estimator for CPU-bound kernels).
    Returns a list of :class:`BenchRow`, forward and inverse per site
    count.
    """
    if not n_chi_list:
        raise ValueError("empty site-count list")
    out = []
    spp = max(8, steps)
    amps = np.linspace(0.4, 1.0, points) * amplitude
    for n in n_chi_list:
        params = graded_chain_material(n, 140.0, 50.0, 1.54)
        t, base = _sine_sequence(1.0, spp, 1)
        H = base[:, None, :] * amps[:, None]  # (steps, points, 2)

        def fwd_pass():
            jp = np.zeros((points, n, 2))
            iters = 0.0
            bs = np.empty((t.size, points, 2))
            for i in range(t.size):
                B, jp, _, _, its = forward_solve_batch(params, H[i], jp, settings)
                bs[i] = B
                iters += its.mean()
            return bs, iters / t.size

        b_seq, fwd_iters = fwd_pass()  # warm-up, also provides the flux inputs
        times = []
        for _ in range(repetitions):
            t0 = time.perf_counter()
            fwd_pass()
            times.append((time.perf_counter() - t0) / (t.size * points))
        out.append(BenchRow(n, "forward", 1e3 * float(min(times)), float(fwd_iters)))

        def inv_pass():
            jp = np.zeros((points, n, 2))
            iters = 0.0
            for i in range(t.size):
                _, jp, _, _, its = inverse_solve_batch(params, b_seq[i], jp, settings)
                iters += its.mean()
            return iters / t.size

        inv_iters = inv_pass()  # warm-up
        times = []
        for _ in range(repetitions):
            t0 = time.perf_counter()
            inv_pass()
            times.append((time.perf_counter() - t0) / (t.size * points))
        out.append(BenchRow(n, "inverse", 1e3 * float(min(times)), float(inv_iters)))
    return out


def bench_quotients(rows) -> dict:
    """Map site count -> inverse/forward per-step time quotient."""
    fwd = {r.nchi: r.time_ms for r in rows if r.direction == "forward"}
    inv = {r.nchi: r.time_ms for r in rows if r.direction == "inverse"}
    return {n: inv[n] / fwd[n] for n in fwd if n in inv}


def write_bench(path, rows):
    with open(path, "w", newline="") as f:
        wr = csv.writer(f, lineterminator="\n")
        wr.writerow(BENCH_COLUMNS)
        for r in rows:
            wr.writerow([r.nchi, r.direction, repr(r.time_ms), repr(r.iters)])
