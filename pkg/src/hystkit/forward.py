"""Forward hysteresis operator: B as the field-gradient of the co-energy density.

For each pinning site k the partial polarization solves the decoupled
strictly convex problem

    min_J  U_k(J) - <H, J> + chi_k |J - J_{p,k}|_eps

and the flux density is B = mu0 H + sum_k J_k.  The co-energy density is

    w*(H; {J_p}) = mu0/2 |H|^2 - sum_k min_k(...)

whose H-gradient reproduces B (Danskin identity).

The inner problems are independent, so they are solved in lockstep by a
vectorized damped Newton iteration with per-problem feasibility
safeguards and Armijo line searches; an arbitrary batch of material
points can be stacked into the same call, which is what the field solver
does.  Each problem backtracks on its own, so the results are identical
to solving the problems one at a time, in any order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import OperatorError
from .material import (MU0, MaterialParams, MaterialState, SolverSettings,
                       as_vec2)
from .newton import SmoothObjective

_FEAS_SHRINK_CAP = 200
_TH_CAP = 1.5707963  # just below pi/2; clipped angles are masked to +inf anyway


def _pinned_value(x, h, jp, chi, w, A, js, eps):
    s = np.sqrt(np.sum(x * x, axis=-1) + eps)
    v = x - jp
    sv = np.sqrt(np.sum(v * v, axis=-1) + eps)
    u = -(A * w * js / np.pi) * np.log(np.cos(0.5 * np.pi / (w * js) * s))
    return u - np.sum(h * x, axis=-1) + chi * sv


def _pinned_grad(x, h, jp, chi, w, A, js, eps):
    s = np.sqrt(np.sum(x * x, axis=-1) + eps)
    t = np.tan(0.5 * np.pi / (w * js) * s)
    v = x - jp
    sv = np.sqrt(np.sum(v * v, axis=-1) + eps)
    return (0.5 * A * t / s)[..., None] * x - h + (chi / sv)[..., None] * v


def _pinned_hess(x, jp, chi, w, A, js, eps):
    """Hessian entries (hxx, hxy, hyy) of the pinned site objective."""
    s2 = np.sum(x * x, axis=-1) + eps
    s = np.sqrt(s2)
    c = 0.5 * np.pi / (w * js)
    t = np.tan(c * s)
    iso = 0.5 * A * t / s
    rad = 0.5 * A * (c * (1.0 + t * t) - t / s) / s2
    v = x - jp
    sv2 = np.sum(v * v, axis=-1) + eps
    sv = np.sqrt(sv2)
    piso = chi / sv
    prad = -piso / sv2
    hxx = iso + rad * x[..., 0] ** 2 + piso + prad * v[..., 0] ** 2
    hyy = iso + rad * x[..., 1] ** 2 + piso + prad * v[..., 1] ** 2
    hxy = rad * x[..., 0] * x[..., 1] + prad * v[..., 0] * v[..., 1]
    return hxx, hxy, hyy


# Fused kernels for the lockstep solver; cw = pi/(2 w Js), uc = A w Js / pi,
# Ah = A/2, bnd = (1 - margin) w Js are precomputed per problem.

def _fused_value(x, jp, h, chi, cw, uc, eps, bnd):
    x0, x1 = x[:, 0], x[:, 1]
    s = np.sqrt(x0 * x0 + x1 * x1 + eps)
    v0 = x0 - jp[:, 0]
    v1 = x1 - jp[:, 1]
    sv = np.sqrt(v0 * v0 + v1 * v1 + eps)
    f = (-uc * np.log(np.cos(np.minimum(cw * s, _TH_CAP)))
         - (h[:, 0] * x0 + h[:, 1] * x1) + chi * sv)
    return np.where(s < bnd, f, np.inf)


def _fused_grad_hess(x, jp, h, chi, cw, Ah, eps):
    x0, x1 = x[:, 0], x[:, 1]
    s2 = x0 * x0 + x1 * x1 + eps
    s = np.sqrt(s2)
    t = np.tan(cw * s)
    v0 = x0 - jp[:, 0]
    v1 = x1 - jp[:, 1]
    sv2 = v0 * v0 + v1 * v1 + eps
    sv = np.sqrt(sv2)
    iso = Ah * t / s
    rad = (Ah * cw * (1.0 + t * t) - iso) / s2
    pis = chi / sv
    prd = -pis / sv2
    g = np.empty_like(x)
    g[:, 0] = iso * x0 + pis * v0 - h[:, 0]
    g[:, 1] = iso * x1 + pis * v1 - h[:, 1]
    hxx = iso + pis + rad * x0 * x0 + prd * v0 * v0
    hyy = iso + pis + rad * x1 * x1 + prd * v1 * v1
    hxy = rad * x0 * x1 + prd * v0 * v1
    return g, hxx, hxy, hyy


@dataclass
class PinnedBatchResult:
    j: np.ndarray           # (P, 2) minimizers
    value: np.ndarray       # (P,) objective minima
    iterations: np.ndarray  # (P,) Newton iterations
    converged: np.ndarray   # (P,) bool


def prepare_pinned(chi, w, A, js, settings: SolverSettings, shape):
    """Precompute the derived per-problem parameter arrays used by
    :func:`solve_pinned_batch` (broadcast to the flat problem shape)."""
    chi = np.broadcast_to(np.asarray(chi, dtype=float), shape)
    w = np.broadcast_to(np.asarray(w, dtype=float), shape)
    A = np.broadcast_to(np.asarray(A, dtype=float), shape)
    js = np.broadcast_to(np.asarray(js, dtype=float), shape)
    cw = 0.5 * np.pi / (w * js)
    uc = A * w * js / np.pi
    Ah = 0.5 * A
    bnd = (1.0 - settings.boundary_margin) * w * js
    return chi, cw, uc, Ah, bnd


def solve_pinned_batch(h, jp, chi, w, A, js, settings: SolverSettings,
                       prep=None, start=None, _retry=True) -> PinnedBatchResult:
    """Solve P independent pinned-site problems in lockstep.

    All arrays are flat over the problem index: ``h``/``jp`` of shape
    (P, 2), the parameters of shape (P,) or broadcastable to it.  Warm
    starts at ``jp`` (the pinning anchor) unless ``start`` supplies a
    better feasible guess; the minimizer does not depend on the start.
    Acceptance uses the Armijo test; once the predicted decrease falls
    below the rounding noise of the objective the trial is accepted on
    gradient-norm reduction instead, which is what terminates cleanly in
    the very stiff smoothed stick region.

    Callers in time-stepping loops pass ``prep`` from
    :func:`prepare_pinned` to keep parameter broadcasting out of the
    hot path.
    """
    eps = settings.epsilon
    h = np.asarray(h, dtype=float)
    jp = np.asarray(jp, dtype=float)
    x = (jp if start is None else np.asarray(start, dtype=float)).copy()
    P = x.shape[0]
    if prep is None:
        prep = prepare_pinned(chi, w, A, js, settings, (P,))
    chi, cw, uc, Ah, bnd = prep
    eps_f = 16.0 * np.finfo(float).eps

    if np.any(np.sqrt(np.sum(x * x, axis=-1) + eps) >= bnd):
        raise ValueError("infeasible warm start (state at saturation bound)")

    f = _fused_value(x, jp, h, chi, cw, uc, eps, bnd)
    g, hxx, hxy, hyy = _fused_grad_hess(x, jp, h, chi, cw, Ah, eps)
    gn = np.sqrt(g[:, 0] ** 2 + g[:, 1] ** 2)
    # Tolerance relative to the driving-term magnitude: the gradient is a
    # difference of terms of size ~(|H| + chi), which bounds what float64
    # cancellation can resolve even when the warm start is nearly optimal.
    scale = np.sqrt(h[:, 0] ** 2 + h[:, 1] ** 2) + chi
    tol = settings.grad_tol * np.maximum(np.maximum(1.0, gn), scale)
    iters = np.zeros(P, dtype=int)
    failed = np.zeros(P, dtype=bool)
    idx = np.flatnonzero(gn > tol)

    for _ in range(settings.max_iter):
        if idx.size == 0:
            break
        xs, gs, fs, gns = x[idx], g[idx], f[idx], gn[idx]
        jps, hs, chis = jp[idx], h[idx], chi[idx]
        cws, ucs, Ahs, bnds = cw[idx], uc[idx], Ah[idx], bnd[idx]
        a, bq, d = hxx[idx], hxy[idx], hyy[idx]

        det = a * d - bq * bq
        p = np.empty_like(xs)
        p[:, 0] = (bq * gs[:, 1] - d * gs[:, 0]) / det
        p[:, 1] = (bq * gs[:, 0] - a * gs[:, 1]) / det
        slope = gs[:, 0] * p[:, 0] + gs[:, 1] * p[:, 1]

        t = np.ones(idx.size)
        for _shrink in range(_FEAS_SHRINK_CAP):
            trial = xs + t[:, None] * p
            bad = np.sqrt(np.sum(trial * trial, axis=-1) + eps) >= bnds
            if not bad.any():
                break
            t[bad] *= settings.backtrack

        ft = _fused_value(trial, jps, hs, chis, cws, ucs, eps, bnds)
        noise = eps_f * np.maximum(1.0, np.abs(fs))
        need = (ft > fs + settings.armijo_c * t * slope) \
            & (-settings.armijo_c * t * slope > noise)
        for _bt in range(settings.max_backtracks):
            if not need.any():
                break
            t[need] *= settings.backtrack
            trial[need] = xs[need] + t[need, None] * p[need]
            ft[need] = _fused_value(trial[need], jps[need], hs[need], chis[need],
                                    cws[need], ucs[need], eps, bnds[need])
            need &= (ft > fs + settings.armijo_c * t * slope) \
                & (-settings.armijo_c * t * slope > noise)

        g_tr, na, nb, nd = _fused_grad_hess(trial, jps, hs, chis, cws, Ahs, eps)
        gn_tr = np.sqrt(g_tr[:, 0] ** 2 + g_tr[:, 1] ** 2)
        armijo_ok = ft <= fs + settings.armijo_c * t * slope
        noise_ok = (-settings.armijo_c * t * slope <= noise) \
            & (gn_tr < gns) & np.isfinite(ft)
        accept = armijo_ok | noise_ok

        moved = idx[accept]
        x[moved] = trial[accept]
        f[moved] = ft[accept]
        g[moved] = g_tr[accept]
        gn[moved] = gn_tr[accept]
        hxx[moved], hxy[moved], hyy[moved] = na[accept], nb[accept], nd[accept]
        iters[idx] += 1
        failed[idx[~accept]] = True
        idx = moved[gn_tr[accept] > tol[moved]]

    converged = (gn <= tol) & ~failed

    if _retry and not converged.all():
        # A large rotation of a nearly saturated polarization makes the
        # warm start crawl along the circular domain boundary (straight
        # Newton steps get feasibility-clipped to tiny arcs).  Retry the
        # failures once from the anhysteretic point in the direction of
        # the drive, which has the right angle and radius.
        bad = np.flatnonzero(~converged)
        hb = h[bad]
        hn = np.sqrt(hb[:, 0] ** 2 + hb[:, 1] ** 2)
        safe = np.maximum(hn, 1e-30)
        r0 = np.minimum((1.0 / cw[bad]) * np.arctan(2.0 * hn / (2.0 * Ah[bad])),
                        (1.0 - 2.0 * settings.boundary_margin) * bnd[bad])
        smart = (r0 / safe)[:, None] * hb
        sub = solve_pinned_batch(hb, jp[bad], chi[bad], None, None, None,
                                 settings,
                                 prep=(chi[bad], cw[bad], uc[bad], Ah[bad],
                                       bnd[bad]),
                                 start=smart, _retry=False)
        x[bad] = sub.j
        f[bad] = sub.value
        iters[bad] += sub.iterations
        converged[bad] = sub.converged

    return PinnedBatchResult(x, f, iters, converged)


def site_objective(site, h, j_prev, settings: SolverSettings) -> SmoothObjective:
    """The single-site inner problem as a generic :class:`SmoothObjective`."""
    h = as_vec2(h)
    jp = as_vec2(j_prev)
    chi = np.array(site.chi)
    w = np.array(site.weight)
    A = np.array(site.steepness)
    js = np.array(site.saturation)
    eps = settings.epsilon
    bound = (1.0 - settings.boundary_margin) * site.j_bound

    return SmoothObjective(
        n=2,
        value=lambda x: float(_pinned_value(x, h, jp, chi, w, A, js, eps)),
        grad=lambda x: _pinned_grad(x, h, jp, chi, w, A, js, eps),
        hess=lambda x: _hess_matrix(x, jp, chi, w, A, js, eps),
        feasible=lambda x: bool(np.sqrt(x @ x + eps) < bound),
    )


def _hess_matrix(x, jp, chi, w, A, js, eps):
    hxx, hxy, hyy = _pinned_hess(x, jp, chi, w, A, js, eps)
    return np.array([[hxx, hxy], [hxy, hyy]])


@dataclass
class ForwardResult:
    b: np.ndarray
    state: MaterialState
    inner_values: np.ndarray    # per-site minima of the inner problems
    iterations: np.ndarray      # per-site Newton iteration counts


def forward_solve(params: MaterialParams, h, prev: MaterialState,
                  settings: SolverSettings = SolverSettings()) -> ForwardResult:
    """Run the per-site inner minimizations for one material point."""
    h = as_vec2(h)
    prev.validate(params)
    K = params.n_sites
    hb = np.broadcast_to(h, (K, 2))
    res = solve_pinned_batch(hb, prev.partials, params.chi, params.weight,
                             params.steepness, params.saturation, settings)
    if not res.converged.all():
        k = int(np.flatnonzero(~res.converged)[0])
        raise OperatorError(
            f"forward inner solve failed to converge at site {k}",
            site=k, iterations=int(res.iterations[k]))
    b = MU0 * h + res.j.sum(axis=0)
    return ForwardResult(b, MaterialState(res.j), res.value, res.iterations)


def forward_update(params: MaterialParams, h, prev: MaterialState,
                   settings: SolverSettings = SolverSettings()):
    """Apply the forward operator: returns ``(b, next_state)``.

    ``prev`` is not mutated; callers commit the returned state once the
    time step is accepted.
    """
    res = forward_solve(params, h, prev, settings)
    return res.b, res.state


def coenergy_density(params: MaterialParams, h, prev: MaterialState,
                     settings: SolverSettings = SolverSettings()) -> float:
    """Co-energy density w*(H; {J_p}), J/m^3."""
    h = as_vec2(h)
    res = forward_solve(params, h, prev, settings)
    return float(0.5 * MU0 * (h @ h) - res.inner_values.sum())


def forward_solve_batch(params: MaterialParams, H, prev, settings: SolverSettings,
                        start=None):
    """Forward operator on a batch of M material points.

    Parameters
    ----------
    H : (M, 2) array of field vectors.
    prev : (M, K, 2) array of previous partial polarizations.
    start : optional (M, K, 2) warm-start guess for the minimizers.

    Returns
    -------
    B : (M, 2); J : (M, K, 2); wstar : (M,) co-energy densities;
    tangent : (M, 2, 2) derivative dB/dH of the smoothed operator;
    iterations : (M, K).
    """
    H = np.asarray(H, dtype=float)
    prev = np.asarray(prev, dtype=float)
    M, K = prev.shape[0], prev.shape[1]
    hb = np.broadcast_to(H[:, None, :], (M, K, 2)).reshape(M * K, 2)
    jp = prev.reshape(M * K, 2)
    chi = np.broadcast_to(params.chi, (M, K)).reshape(-1)
    w = np.broadcast_to(params.weight, (M, K)).reshape(-1)
    A = np.broadcast_to(params.steepness, (M, K)).reshape(-1)
    js = np.broadcast_to(params.saturation, (M, K)).reshape(-1)

    res = solve_pinned_batch(hb, jp, chi, w, A, js, settings,
                             start=None if start is None
                             else np.asarray(start, dtype=float).reshape(M * K, 2))
    if not res.converged.all():
        flat = int(np.flatnonzero(~res.converged)[0])
        raise OperatorError(
            f"forward inner solve failed at point {flat // K}, site {flat % K}",
            site=flat % K)

    J = res.j.reshape(M, K, 2)
    B = MU0 * H + J.sum(axis=1)
    wstar = 0.5 * MU0 * np.sum(H * H, axis=1) - res.value.reshape(M, K).sum(axis=1)

    # dB/dH = mu0 I + sum_k (inner Hessian_k)^-1 at the minimizers.
    hxx, hxy, hyy = _pinned_hess(res.j, jp, chi, w, A, js, settings.epsilon)
    det = hxx * hyy - hxy * hxy
    inv = np.empty((M * K, 2, 2))
    inv[:, 0, 0] = hyy / det
    inv[:, 1, 1] = hxx / det
    inv[:, 0, 1] = inv[:, 1, 0] = -hxy / det
    tangent = MU0 * np.eye(2) + inv.reshape(M, K, 2, 2).sum(axis=1)
    return B, J, wstar, tangent, res.iterations.reshape(M, K)
