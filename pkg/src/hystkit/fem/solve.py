"""Magnetostatic field solves driven by the hysteresis operator pair.

Scalar form: H = H_s - grad(psi), free boundary values (the zero-normal-
flux condition is natural), one gauge-pinned node; the discrete problem
minimizes the total co-energy and its optimality system applies the
forward operator element by element.

Vector form: B = Curl a with a = 0 on the outer boundary (or prescribed
values for the linear benchmarks); the discrete problem minimizes total
energy minus the source work and applies the inverse operator.

Both are strictly convex, so each time step runs a damped outer Newton
iteration: the element tangent (dB/dH resp. dH/dB of the eps-smoothed
operator, a byproduct of the converged inner solves) assembles an SPD
stiffness matrix, and the step length backtracks on the functional, so
descent and global convergence follow from convexity.  Element states
are committed only after a step converges; every operator evaluation
inside a step re-starts from the committed states, keeping the operator
a pure function of (field, previous state).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse.linalg as spla

from ..errors import OperatorError, OuterSolverError
from ..forward import forward_solve_batch
from ..inverse import inverse_solve_batch
from ..material import MU0, MaterialParams, SolverSettings
from .assembly import ElementGeometry, isotropic_tensor
from .mesh import IRON, Mesh2D, find_triangle
from .source import SourceModel

_OUTER_BACKTRACK_CAP = 30


@dataclass
class FieldState:
    """One converged potential solve."""

    potential: np.ndarray   # (N,) nodal psi or a
    h: np.ndarray           # (M, 2) per-triangle field
    b: np.ndarray           # (M, 2) per-triangle flux density
    states: np.ndarray      # (M_iron, K, 2) partial polarizations on iron
    functional: float
    outer_iterations: int
    residuals: list
    functional_history: list
    inner_iterations: float  # mean inner Newton iterations per operator call


class _Evaluation:
    __slots__ = ("F", "grad", "h", "b", "D", "states", "inner_iters")


class FieldProblem:
    """One formulation of the field problem bound to a mesh and material.

    ``params`` is the hysteretic iron material; pass ``None`` with
    ``iron_mu_r`` for a linear-iron configuration (benchmarks).
    ``dirichlet`` optionally prescribes nodal boundary values of the
    vector potential.
    """

    def __init__(self, mesh: Mesh2D, source: SourceModel,
                 params: MaterialParams | None,
                 settings: SolverSettings = SolverSettings(),
                 formulation: str = "scalar",
                 iron_mu_r: float = 1.0,
                 dirichlet=None,
                 outer_tol: float = 1e-6,
                 outer_cap: int = 500):
        if formulation not in ("scalar", "vector"):
            raise ValueError(f"unknown formulation {formulation!r}")
        self.mesh = mesh
        self.source = source
        self.params = params
        self.settings = settings
        # Field solves hand the element problems large reversals and
        # line-search trial fields; crossing the smoothed stick-region
        # kink then takes a long zigzag phase before Newton contracts,
        # so the element solves get a raised iteration cap (only the
        # still-active problems pay for it in the lockstep batch).
        self.inner_settings = replace(settings, max_iter=max(settings.max_iter, 400))
        self.formulation = formulation
        self.iron_mu_r = iron_mu_r
        self.outer_tol = outer_tol
        self.outer_cap = outer_cap

        self.geom = ElementGeometry(mesh)
        self.basis = self.geom.grad if formulation == "scalar" else self.geom.curl
        self.iron = np.flatnonzero(mesh.region == IRON)
        self.area = self.geom.area

        if formulation == "scalar":
            # Pure-Neumann problem: pin one node to fix the additive gauge.
            gauge = int(mesh.boundary_nodes[0]) if mesh.boundary_nodes.size else 0
            self.free = np.setdiff1d(np.arange(mesh.n_nodes), [gauge])
            self.fixed_values = np.zeros(mesh.n_nodes)
        else:
            self.free = np.setdiff1d(np.arange(mesh.n_nodes), mesh.boundary_nodes)
            self.fixed_values = np.zeros(mesh.n_nodes)
            if dirichlet is not None:
                self.fixed_values[mesh.boundary_nodes] = \
                    np.asarray(dirichlet, dtype=float)[mesh.boundary_nodes]
            self.unit_load = self.geom.assemble_load(source.j0)

        self.free_mask = np.zeros(mesh.n_nodes, dtype=bool)
        self.free_mask[self.free] = True

        # Linear coefficient per non-iron triangle (mu0 everywhere);
        # linear-iron runs fold mu_r into the same arrays.
        self.lin_coeff = np.full(mesh.n_triangles, MU0)
        self.lin_coeff[self.iron] *= iron_mu_r if params is None else 1.0

    def virgin_states(self) -> np.ndarray:
        k = self.params.n_sites if self.params is not None else 0
        return np.zeros((self.iron.size, k, 2))

    def zero_potential(self) -> np.ndarray:
        return self.fixed_values.copy()

    # -- evaluation ----------------------------------------------------

    def _evaluate(self, x, i_s: float, prev_states, warm=None) -> _Evaluation:
        """Evaluate functional, gradient, fields, tangent, and element
        states at nodal values ``x``.  ``warm`` optionally seeds the
        element inner solves (the minimizers do not depend on it)."""
        ev = _Evaluation()
        geom = self.geom

        if self.formulation == "scalar":
            field = self.source.h0 * i_s - geom.field_from_nodal(x, geom.grad)
            h = field
            b = self.lin_coeff[:, None] * field
            D = isotropic_tensor(self.lin_coeff)
            dens = 0.5 * self.lin_coeff * np.sum(field * field, axis=1)
            ev.inner_iters = 0.0
            ev.states = prev_states
            if self.params is not None and self.iron.size:
                B_i, J_i, wstar, D_i, iters = forward_solve_batch(
                    self.params, field[self.iron], prev_states,
                    self.inner_settings, start=warm)
                b = b.copy()
                b[self.iron] = B_i
                D[self.iron] = D_i
                dens = dens.copy()
                dens[self.iron] = wstar
                ev.states = J_i
                ev.inner_iters = float(iters.mean())
            ev.F = float(self.area @ dens)
            ev.grad = -geom.assemble_flux_divergence(b, geom.grad)
        else:
            field = geom.field_from_nodal(x, geom.curl)
            b = field
            h = field / self.lin_coeff[:, None]
            D = isotropic_tensor(1.0 / self.lin_coeff)
            dens = 0.5 * np.sum(field * field, axis=1) / self.lin_coeff
            ev.inner_iters = 0.0
            ev.states = prev_states
            if self.params is not None and self.iron.size:
                H_i, J_i, wval, D_i, iters = inverse_solve_batch(
                    self.params, field[self.iron], prev_states,
                    self.inner_settings, start=warm)
                h = h.copy()
                h[self.iron] = H_i
                D[self.iron] = D_i
                dens = dens.copy()
                dens[self.iron] = wval
                ev.states = J_i
                ev.inner_iters = float(iters.mean())
            load = self.unit_load * i_s
            ev.F = float(self.area @ dens) - float(load @ x)
            ev.grad = geom.assemble_flux_divergence(h, geom.curl) - load

        ev.h = h
        ev.b = b
        ev.D = D
        return ev

    def _try_evaluate(self, x, i_s, prev_states, warm):
        """Trial-point evaluation: an inner-solver failure at an extreme
        line-search trial is reported as F = +inf so the search backtracks."""
        try:
            return self._evaluate(x, i_s, prev_states, warm)
        except OperatorError:
            ev = _Evaluation()
            ev.F = np.inf
            ev.grad = None
            return ev

    def _step_cap(self, delta) -> float:
        """Largest step fraction keeping per-element field increments
        physically sized (vector form: flux bounded by saturation scale)."""
        if self.formulation != "vector" or self.params is None:
            return 1.0
        dB = self.geom.field_from_nodal(delta, self.geom.curl)
        peak = float(np.abs(dB).max())
        cap = 2.0 * (self.params.saturation_total + 0.2)
        return min(1.0, cap / peak) if peak > 0 else 1.0

    # -- one load step -------------------------------------------------

    def solve_step(self, x0, i_s: float, prev_states) -> FieldState:
        """Converge one load step from the warm start ``x0``.

        Raises :class:`OuterSolverError` with the residual history when
        the iteration cap is hit.
        """
        x = np.asarray(x0, dtype=float).copy()
        x[~self.free_mask] = self.fixed_values[~self.free_mask]
        ev = self._evaluate(x, i_s, prev_states)
        free = self.free
        rn = float(np.linalg.norm(ev.grad[free]))
        # Rounding-noise floor of the residual assembly (running-error
        # bound): a residual this small is numerically zero, e.g. when
        # the source field is already discretely divergence-free.
        field = ev.b if self.formulation == "scalar" else ev.h
        r_abs = self.geom.assemble_flux_divergence(np.abs(field),
                                                   np.abs(self.basis))
        floor = 64.0 * np.finfo(float).eps * float(np.linalg.norm(r_abs[free]))
        tol = max(self.outer_tol * rn, floor)
        residuals = [rn]
        fvals = [ev.F]
        inner = [ev.inner_iters]
        eps_f = 16.0 * np.finfo(float).eps

        it = 0
        while rn > tol and it < self.outer_cap:
            it += 1
            K = self.geom.assemble_stiffness(ev.D, self.basis)
            K_ff = K[free][:, free].tocsc()
            delta = np.zeros(self.mesh.n_nodes)
            delta[free] = spla.spsolve(K_ff, -ev.grad[free],
                                       permc_spec="MMD_AT_PLUS_A")
            slope = float(ev.grad[free] @ delta[free])

            tau = self._step_cap(delta)
            noise = eps_f * max(1.0, abs(ev.F))
            trial = self._try_evaluate(x + tau * delta, i_s, prev_states, ev.states)
            backtracks = 0
            while (trial.F > ev.F + 1e-4 * tau * slope
                   and -1e-4 * tau * slope > noise
                   and backtracks < _OUTER_BACKTRACK_CAP):
                backtracks += 1
                tau *= 0.5
                trial = self._try_evaluate(x + tau * delta, i_s, prev_states,
                                           ev.states)

            rn_trial = (np.inf if trial.grad is None
                        else float(np.linalg.norm(trial.grad[free])))
            armijo_ok = trial.F <= ev.F + 1e-4 * tau * slope
            noise_ok = (-1e-4 * tau * slope <= noise) and rn_trial < rn
            if not (armijo_ok or noise_ok):
                break  # stalled at numerical precision

            x = x + tau * delta
            ev = trial
            rn = rn_trial
            residuals.append(rn)
            fvals.append(ev.F)
            inner.append(ev.inner_iters)

        if rn > tol:
            raise OuterSolverError(
                f"outer iteration did not reach tolerance ({rn:.3e} > {tol:.3e})",
                residual_history=residuals, formulation=self.formulation)
        return FieldState(x, ev.h, ev.b, ev.states, ev.F, it, residuals, fvals,
                          float(np.mean(inner)))


def solve_scalar_step(mesh: Mesh2D, source: SourceModel,
                      params: MaterialParams | None,
                      settings: SolverSettings, i_s_value: float,
                      prev_states, **kw) -> FieldState:
    """One scalar-potential load step (forward operator in the elements).

    Convenience one-shot wrapper; time stepping should build a
    :class:`FieldProblem` once and reuse it.
    """
    prob = FieldProblem(mesh, source, params, settings, formulation="scalar",
                        **kw)
    return prob.solve_step(prob.zero_potential(), i_s_value, prev_states)


def solve_vector_step(mesh: Mesh2D, source: SourceModel,
                      params: MaterialParams | None,
                      settings: SolverSettings, i_s_value: float,
                      prev_states, **kw) -> FieldState:
    """One vector-potential load step (inverse operator in the elements)."""
    prob = FieldProblem(mesh, source, params, settings, formulation="vector",
                        **kw)
    return prob.solve_step(prob.zero_potential(), i_s_value, prev_states)


@dataclass(frozen=True)
class ProbeRow:
    step: int
    t: float
    i_s: float
    probe: str
    h: np.ndarray
    b: np.ndarray


def default_waveform(i_max: float, steps_per_period: int = 50, periods: int = 1,
                     harmonic3: float = 0.3):
    """Sinusoidal total-current waveform with a third-harmonic admixture:
    I_s(t) = i_max (sin t + harmonic3 sin 3t).  Returns (t, I_s) arrays."""
    i = np.arange(1, steps_per_period * periods + 1)
    t = 2.0 * np.pi * i / steps_per_period
    return t, i_max * (np.sin(t) + harmonic3 * np.sin(3.0 * t))


def run_load_cycle(problem: FieldProblem, t, waveform, probes: dict,
                   probe_radius: float | None = None):
    """Step the waveform, committing element states after every step.

    ``probes`` maps names to (x, y) points inside iron.  Probe fields
    are area-weighted means over the iron triangles within
    ``probe_radius`` of the point (default 2.5 local mesh sizes): the
    derived fields are piecewise constant, so a single-triangle read-out
    carries O(h) noise that the patch average removes.  Returns
    ``(probe_rows, field_states)`` where the rows carry per-step probe
    fields and the list holds one :class:`FieldState` per step.
    """
    mesh = problem.mesh
    cent = mesh.centroids()
    areas = problem.area
    iron_mask = mesh.region == IRON
    if probe_radius is None:
        mean_a = float(areas[iron_mask].mean()) if iron_mask.any() else float(areas.mean())
        probe_radius = 2.5 * np.sqrt(2.0 * mean_a)

    probe_sel = {}
    for name, pt in probes.items():
        tri = find_triangle(mesh, pt)
        if mesh.region[tri] != IRON:
            raise ValueError(f"probe {name} at {pt} is not inside iron")
        near = iron_mask & (np.hypot(cent[:, 0] - pt[0], cent[:, 1] - pt[1])
                            < probe_radius)
        sel = np.flatnonzero(near) if near.any() else np.array([tri])
        probe_sel[name] = (sel, areas[sel] / areas[sel].sum())

    states = problem.virgin_states()
    x = problem.zero_potential()
    prev_x, prev_i = None, None
    last_i = 0.0
    rows = []
    history = []
    for step, (ti, ii) in enumerate(zip(np.asarray(t), np.asarray(waveform)), 1):
        ii = float(ii)
        # Linear predictor in the load parameter: a warm start one secant
        # step ahead roughly halves the outer iteration count.
        x0 = x
        if prev_x is not None and abs(last_i - prev_i) > 1e-12:
            ratio = np.clip((ii - last_i) / (last_i - prev_i), -2.0, 2.0)
            x0 = x + ratio * (x - prev_x)
        try:
            try:
                sol = problem.solve_step(x0, ii, states)
            except OperatorError:
                if x0 is x:
                    raise
                sol = problem.solve_step(x, ii, states)  # drop the predictor
        except OuterSolverError as exc:
            exc.step = step
            raise
        prev_x, prev_i = x, last_i
        x = sol.potential
        last_i = ii
        states = sol.states
        history.append(sol)
        for name, (sel, wgt) in probe_sel.items():
            rows.append(ProbeRow(step, float(ti), float(ii), name,
                                 wgt @ sol.h[sel], wgt @ sol.b[sel]))
    return rows, history


PROBE_COLUMNS = ("step", "t", "Is", "probe", "Hx", "Hy", "Bx", "By")


def write_probes(path, rows):
    with open(path, "w", newline="") as f:
        wr = csv.writer(f, lineterminator="\n")
        wr.writerow(PROBE_COLUMNS)
        for r in rows:
            wr.writerow([r.step, repr(float(r.t)), repr(float(r.i_s)), r.probe,
                         repr(float(r.h[0])), repr(float(r.h[1])),
                         repr(float(r.b[0])), repr(float(r.b[1]))])


def read_probes(path):
    rows = []
    with open(path, newline="") as f:
        rd = csv.reader(f)
        header = next(rd, None)
        if header is None or tuple(header) != PROBE_COLUMNS:
            raise ValueError("bad probe CSV header")
        for rec in rd:
            rows.append(ProbeRow(int(rec[0]), float(rec[1]), float(rec[2]), rec[3],
                                 np.array([float(rec[4]), float(rec[5])]),
                                 np.array([float(rec[6]), float(rec[7])])))
    return rows
