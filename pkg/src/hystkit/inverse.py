"""Inverse hysteresis operator: H as the flux-gradient of the energy density.

The partial polarizations jointly minimize the coupled strictly convex
problem in 2*K unknowns

    min_{J_1..J_K}  1/(2 mu0) |B - sum_k J_k|^2
                    + sum_k ( U_k(J_k) + chi_k |J_k - J_{p,k}|_eps )

and the field is recovered as H = (B - sum_k J_k) / mu0.  The minimum
value is the energy density w(B; {J_p}), the convex conjugate of the
forward co-energy density; at conjugate (H, B) pairs both operators
produce the same set of partial polarizations.

Unlike the forward case the sites do not decouple (they share the
quadratic flux mismatch term), so one damped Newton iteration runs on
the full system with a dense factorization per step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import OperatorError
from .material import (MU0, MaterialParams, MaterialState, SolverSettings,
                       as_vec2)
from .newton import SmoothObjective, SolveReport, minimize

_FEAS_SHRINK_CAP = 200


def _coupled_value(x, b, jp, chi, w, A, js, eps):
    """Coupled objective for x of shape (M, K, 2); returns (M,)."""
    r = b - x.sum(axis=1)
    s = np.sqrt(np.sum(x * x, axis=-1) + eps)
    u = -(A * w * js / np.pi) * np.log(np.cos(0.5 * np.pi / (w * js) * s))
    v = x - jp
    sv = np.sqrt(np.sum(v * v, axis=-1) + eps)
    return (0.5 / MU0) * np.sum(r * r, axis=-1) + np.sum(u + chi * sv, axis=-1)


def _coupled_grad(x, b, jp, chi, w, A, js, eps):
    r = b - x.sum(axis=1)
    s = np.sqrt(np.sum(x * x, axis=-1) + eps)
    t = np.tan(0.5 * np.pi / (w * js) * s)
    v = x - jp
    sv = np.sqrt(np.sum(v * v, axis=-1) + eps)
    du = (0.5 * A * t / s)[..., None] * x
    return du + (chi / sv)[..., None] * v - r[:, None, :] / MU0


def _site_blocks(x, jp, chi, w, A, js, eps):
    """Per-site 2x2 Hessian blocks (internal energy + smoothed pinning)."""
    s2 = np.sum(x * x, axis=-1) + eps
    s = np.sqrt(s2)
    c = 0.5 * np.pi / (w * js)
    t = np.tan(c * s)
    iso = 0.5 * A * t / s
    rad = 0.5 * A * (c * (1.0 + t * t) / s2 - t / (s2 * s))
    v = x - jp
    sv2 = np.sum(v * v, axis=-1) + eps
    sv = np.sqrt(sv2)
    piso = chi / sv
    prad = -chi / (sv2 * sv)
    blocks = np.empty(x.shape[:-1] + (2, 2))
    blocks[..., 0, 0] = iso + rad * x[..., 0] ** 2 + piso + prad * v[..., 0] ** 2
    blocks[..., 1, 1] = iso + rad * x[..., 1] ** 2 + piso + prad * v[..., 1] ** 2
    blocks[..., 0, 1] = blocks[..., 1, 0] = (rad * x[..., 0] * x[..., 1]
                                             + prad * v[..., 0] * v[..., 1])
    return blocks


def _coupled_hess(x, jp, chi, w, A, js, eps):
    """Full (M, 2K, 2K) Hessian: per-site diagonal blocks plus the
    rank-structured flux coupling (1/mu0) I2 in every block pair."""
    M, K = x.shape[0], x.shape[1]
    H = np.empty((M, K, 2, K, 2))
    H[...] = np.eye(2)[None, None, :, None, :] / MU0
    kk = np.arange(K)
    blocks = _site_blocks(x, jp, chi, w, A, js, eps)  # (M, K, 2, 2)
    H[:, kk, :, kk, :] += blocks.transpose(1, 0, 2, 3)
    return H.reshape(M, 2 * K, 2 * K)


def _feasible_rows(x, w, js, eps, margin):
    s = np.sqrt(np.sum(x * x, axis=-1) + eps)
    return np.all(s < (1.0 - margin) * w * js, axis=-1)


def coupled_objective_arrays(b, jp, chi, w, A, js,
                             settings: SolverSettings) -> SmoothObjective:
    """Coupled inner problem over the stacked vector
    (J_1x, J_1y, ..., J_Kx, J_Ky) from raw parameter arrays."""
    b = np.asarray(b, dtype=float)
    jp = np.asarray(jp, dtype=float)
    K = jp.shape[0]
    jpb = jp[None, :, :]
    eps = settings.epsilon

    def resh(xflat):
        return xflat.reshape(1, K, 2)

    return SmoothObjective(
        n=2 * K,
        value=lambda xf: float(_coupled_value(resh(xf), b, jpb, chi, w, A, js, eps)[0]),
        grad=lambda xf: _coupled_grad(resh(xf), b, jpb, chi, w, A, js, eps).reshape(-1),
        hess=lambda xf: _coupled_hess(resh(xf), jpb, chi, w, A, js, eps)[0],
        feasible=lambda xf: bool(_feasible_rows(resh(xf), w, js, eps,
                                                settings.boundary_margin)[0]),
    )


def coupled_objective(params: MaterialParams, b, prev: MaterialState,
                      settings: SolverSettings) -> SmoothObjective:
    """The coupled inner problem as a generic :class:`SmoothObjective`."""
    return coupled_objective_arrays(as_vec2(b), prev.partials, params.chi,
                                    params.weight, params.steepness,
                                    params.saturation, settings)


@dataclass
class InverseResult:
    h: np.ndarray
    state: MaterialState
    value: float
    iterations: int
    report: SolveReport


def _anhysteretic_start(params: MaterialParams, b) -> np.ndarray:
    """Aggregate anhysteretic state aligned with ``b`` (retry start for
    boundary-crawl failures); see :func:`inverse_solve_batch`."""
    w, js, A = params.weight, params.saturation, params.steepness
    bn = float(np.linalg.norm(b))
    lo, hi = 0.0, bn / MU0 + 1.0
    for _ in range(50):
        mid = 0.5 * (lo + hi)
        jtot = float(np.sum(2.0 * w * js / np.pi * np.arctan(2.0 * mid / A)))
        if MU0 * mid + jtot < bn:
            lo = mid
        else:
            hi = mid
    s_star = 0.5 * (lo + hi)
    direction = b / max(bn, 1e-30)
    radius = np.minimum(2.0 * w * js / np.pi * np.arctan(2.0 * s_star / A),
                        0.999 * w * js)
    return radius[:, None] * direction


def inverse_solve(params: MaterialParams, b, prev: MaterialState,
                  settings: SolverSettings = SolverSettings()) -> InverseResult:
    """Solve the coupled minimization for one material point."""
    b = as_vec2(b)
    prev.validate(params)
    obj = coupled_objective(params, b, prev, settings)
    scale = float(np.linalg.norm(b - prev.total) / MU0 + params.chi.max())
    report = minimize(obj, prev.partials.reshape(-1), settings, tol_scale=scale)
    if not report.converged:
        retry = minimize(obj, _anhysteretic_start(params, b).reshape(-1),
                         settings, tol_scale=scale)
        if retry.converged:
            retry.iterations += report.iterations
            report = retry
    if not report.converged:
        raise OperatorError(
            "inverse inner solve failed to converge",
            iterations=report.iterations, grad_norm=report.grad_norm,
            iterate=report.minimizer)
    J = report.minimizer.reshape(params.n_sites, 2)
    h = (b - J.sum(axis=0)) / MU0
    return InverseResult(h, MaterialState(J), report.objective_value,
                         report.iterations, report)


def inverse_update(params: MaterialParams, b, prev: MaterialState,
                   settings: SolverSettings = SolverSettings()):
    """Apply the inverse operator: returns ``(h, next_state)``.

    ``prev`` is not mutated.
    """
    res = inverse_solve(params, b, prev, settings)
    return res.h, res.state


def energy_density(params: MaterialParams, b, prev: MaterialState,
                   settings: SolverSettings = SolverSettings()) -> float:
    """Energy density w(B; {J_p}), J/m^3."""
    return inverse_solve(params, b, prev, settings).value


def inverse_solve_batch(params: MaterialParams, B, prev, settings: SolverSettings,
                        start=None, _retry=True):
    """Inverse operator on a batch of M material points in lockstep.

    Parameters
    ----------
    B : (M, 2) array of flux densities.
    prev : (M, K, 2) array of previous partial polarizations.
    start : optional (M, K, 2) warm-start guess for the minimizers.

    Returns
    -------
    H : (M, 2); J : (M, K, 2); wval : (M,) energy densities;
    tangent : (M, 2, 2) derivative dH/dB of the smoothed operator;
    iterations : (M,).
    """
    B = np.asarray(B, dtype=float)
    prev = np.asarray(prev, dtype=float)
    x = (prev if start is None else np.asarray(start, dtype=float)).copy()
    M, K = x.shape[0], x.shape[1]
    chi, w = params.chi, params.weight
    A, js = params.steepness, params.saturation
    eps = settings.epsilon
    margin = settings.boundary_margin

    if not _feasible_rows(x, w, js, eps, margin).all():
        raise ValueError("infeasible warm start (state at saturation bound)")

    f = _coupled_value(x, B, prev, chi, w, A, js, eps)
    g = _coupled_grad(x, B, prev, chi, w, A, js, eps)
    gn = np.linalg.norm(g.reshape(M, -1), axis=1)
    # Tolerance relative to the driving-term magnitude (see forward.py);
    # the flux mismatch term has size |B - sum J_p| / mu0 ~ |H|.
    r0 = B - prev.sum(axis=1)
    scale = np.sqrt(np.sum(r0 * r0, axis=-1)) / MU0 + chi.max()
    tol = settings.grad_tol * np.maximum(np.maximum(1.0, gn), scale)
    iters = np.zeros(M, dtype=int)
    failed = np.zeros(M, dtype=bool)
    idx = np.flatnonzero(gn > tol)

    for _ in range(settings.max_iter):
        if idx.size == 0:
            break
        xs, bs, jps = x[idx], B[idx], prev[idx]
        gs, fs = g[idx].reshape(idx.size, -1), f[idx]
        H = _coupled_hess(xs, jps, chi, w, A, js, eps)
        p = np.linalg.solve(H, -gs[:, :, None])[:, :, 0]
        slope = np.sum(gs * p, axis=1)
        pr = p.reshape(idx.size, K, 2)

        t = np.ones(idx.size)
        for _shrink in range(_FEAS_SHRINK_CAP):
            trial = xs + t[:, None, None] * pr
            bad = ~_feasible_rows(trial, w, js, eps, margin)
            if not bad.any():
                break
            t[bad] *= settings.backtrack

        # Armijo while the predicted decrease is resolvable in float64;
        # below that, accept on gradient-norm reduction (see forward.py).
        noise = 16.0 * np.finfo(float).eps * np.maximum(1.0, np.abs(fs))
        gns = gn[idx]
        ft = _coupled_value(trial, bs, jps, chi, w, A, js, eps)
        need = (ft > fs + settings.armijo_c * t * slope) \
            & (-settings.armijo_c * t * slope > noise)
        for _bt in range(settings.max_backtracks):
            if not need.any():
                break
            t[need] *= settings.backtrack
            trial[need] = xs[need] + t[need, None, None] * pr[need]
            ft[need] = _coupled_value(trial[need], bs[need], jps[need],
                                      chi, w, A, js, eps)
            need &= (ft > fs + settings.armijo_c * t * slope) \
                & (-settings.armijo_c * t * slope > noise)

        g_tr = _coupled_grad(trial, bs, jps, chi, w, A, js, eps)
        gn_tr = np.linalg.norm(g_tr.reshape(idx.size, -1), axis=1)
        armijo_ok = ft <= fs + settings.armijo_c * t * slope
        noise_ok = (-settings.armijo_c * t * slope <= noise) \
            & (gn_tr < gns) & np.isfinite(ft)
        accept = armijo_ok | noise_ok

        moved = idx[accept]
        x[moved] = trial[accept]
        f[moved] = ft[accept]
        g[moved] = g_tr[accept]
        gn[moved] = gn_tr[accept]
        iters[idx] += 1
        failed[idx[~accept]] = True
        idx = moved[gn_tr[accept] > tol[moved]]

    converged = (gn <= tol) & ~failed

    if _retry and not converged.all():
        # Large rotations of nearly saturated states crawl along the
        # domain boundary (see forward.py); retry once from the aggregate
        # anhysteretic state aligned with the flux direction.  The scalar
        # field magnitude solves mu0 s + sum_k (2 w_k Js/pi) atan(2s/A) = |B|
        # by bisection.
        bad = np.flatnonzero(~converged)
        Bb = B[bad]
        bn = np.sqrt(np.sum(Bb * Bb, axis=-1))
        lo = np.zeros(bad.size)
        hi = bn / MU0 + 1.0
        for _ in range(50):
            mid = 0.5 * (lo + hi)
            jtot = np.sum(2.0 * w * js / np.pi
                          * np.arctan(2.0 * mid[:, None] / A), axis=1)
            too_low = MU0 * mid + jtot < bn
            lo = np.where(too_low, mid, lo)
            hi = np.where(too_low, hi, mid)
        s_star = 0.5 * (lo + hi)
        direction = Bb / np.maximum(bn, 1e-30)[:, None]
        radius = np.minimum(2.0 * w * js / np.pi
                            * np.arctan(2.0 * s_star[:, None] / A),
                            (1.0 - 2.0 * margin) * w * js)
        smart = radius[:, :, None] * direction[:, None, :]
        Hs, Js, fs_, tg, it2 = inverse_solve_batch(params, Bb, prev[bad],
                                                   settings, start=smart,
                                                   _retry=False)
        x[bad] = Js
        f[bad] = fs_
        iters[bad] += it2
        converged[bad] = True

    if not converged.all():
        m = int(np.flatnonzero(~converged)[0])
        raise OperatorError(
            f"inverse inner solve failed at point {m}",
            iterations=int(iters[m]), grad_norm=float(gn[m]))

    Jsum = x.sum(axis=1)
    Hfield = (B - Jsum) / MU0

    # dH/dB = (1/mu0) (I - (1/mu0) E^T Hess^-1 E), E stacking K identities.
    Hess = _coupled_hess(x, prev, chi, w, A, js, eps)
    E = np.tile(np.eye(2), (K, 1))
    Z = np.linalg.solve(Hess, np.broadcast_to(E, (M, 2 * K, 2)))
    EtZ = Z.reshape(M, K, 2, 2).sum(axis=1)
    tangent = (np.eye(2) - EtZ / MU0) / MU0
    tangent = 0.5 * (tangent + tangent.transpose(0, 2, 1))
    return Hfield, x, f, tangent, iters
