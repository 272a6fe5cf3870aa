import numpy as np
import pytest
import scipy.integrate

from hystkit import (MU0, MaterialParams, MaterialState, SolverSettings,
                     coenergy_density, forward_solve_batch, forward_update,
                     near_kink, single_site_material)
from conftest import ramp_states


def rotation(angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


def test_zero_input_zero_output(fig1_material, settings):
    b, nxt = forward_update(fig1_material, (0.0, 0.0),
                            MaterialState.virgin(fig1_material), settings)
    assert np.all(b == 0.0)
    assert np.all(nxt.partials == 0.0)


def test_stick_region(fig1_material, settings):
    # |H| = 50 < chi = 71: the previous polarization stays optimal up to
    # the eps-smoothing leak
    b, nxt = forward_update(fig1_material, (50.0, 0.0),
                            MaterialState.virgin(fig1_material), settings)
    assert np.linalg.norm(nxt.total) <= 1e-4
    assert b[0] == pytest.approx(MU0 * 50.0, abs=1.2e-4)


def test_ascending_branch(fig1_material):
    # monotone ramp to 600 lands on the closed-form branch
    # J = (2 w Js / pi) atan(2 (H - chi) / A); the smoothing bias scales
    # with sqrt(eps), so the sharp-limit oracle needs a small eps
    settings = SolverSettings(epsilon=1e-10)
    state = ramp_states(fig1_material, 600.0, 400, settings)[-1]
    b, nxt = forward_update(fig1_material, (600.0, 0.0), state, settings)
    assert nxt.total[0] == pytest.approx(1.5048024748629243, abs=1e-3)
    assert b[0] == pytest.approx(1.505556457099786, abs=1e-3)


def test_prev_not_mutated(fig1_material, settings):
    prev = MaterialState(np.array([[0.2, 0.1]]))
    snapshot = prev.partials.copy()
    forward_update(fig1_material, (300.0, -100.0), prev, settings)
    assert np.array_equal(prev.partials, snapshot)


def test_site_decoupling_order_invariance(fig3_material, settings):
    # permuting the site order permutes the outputs bit for bit
    perm = np.random.default_rng(7).permutation(fig3_material.n_sites)
    shuffled = MaterialParams(tuple(fig3_material.sites[k] for k in perm))
    prev = MaterialState.virgin(fig3_material)
    h = (321.0, 45.0)
    b1, n1 = forward_update(fig3_material, h, prev, settings)
    b2, n2 = forward_update(shuffled, h, MaterialState.virgin(shuffled), settings)
    assert np.array_equal(n1.partials[perm], n2.partials)
    # b sums the sites, so only its reduction order differs
    assert np.allclose(b1, b2, rtol=1e-14, atol=1e-15)


def test_danskin_identity(fig1_material, settings, rng):
    # central differences of the co-energy density reproduce B away from
    # stick-region kinks
    checked = 0
    while checked < 25:
        prev = MaterialState.virgin(fig1_material)
        for _ in range(2):
            _, prev = forward_update(fig1_material,
                                     rng.uniform(-300, 300, 2), prev, settings)
        h = rng.uniform(-300.0, 300.0, 2)
        if near_kink(fig1_material, h, prev, settings):
            continue
        checked += 1
        b, _ = forward_update(fig1_material, h, prev, settings)
        step = 1e-3 * np.linalg.norm(h)
        fd = np.empty(2)
        for i in range(2):
            d = np.zeros(2)
            d[i] = step
            fd[i] = (coenergy_density(fig1_material, h + d, prev, settings)
                     - coenergy_density(fig1_material, h - d, prev, settings)
                     ) / (2 * step)
        assert np.linalg.norm(fd - b) / max(1.0, np.linalg.norm(b)) <= 1e-5


def test_isotropy(fig1_material, settings, rng):
    for _ in range(10):
        R = rotation(rng.uniform(0, 2 * np.pi))
        h = rng.uniform(-400, 400, 2)
        prev = MaterialState(rng.uniform(-0.5, 0.5, (1, 2)))
        b1, n1 = forward_update(fig1_material, h, prev, settings)
        b2, n2 = forward_update(fig1_material, R @ h,
                                MaterialState(prev.partials @ R.T), settings)
        assert np.allclose(R @ b1, b2, atol=1e-9)
        assert np.allclose(n1.partials @ R.T, n2.partials, atol=1e-9)


def test_saturation_bound(fig3_material, settings, rng):
    prev = MaterialState.virgin(fig3_material)
    bound = fig3_material.saturation_total
    for _ in range(20):
        h = rng.uniform(-5e4, 5e4, 2)
        _, prev = forward_update(fig3_material, h, prev, settings)
        assert np.linalg.norm(prev.total) < bound


def test_coenergy_zero(fig1_material):
    settings = SolverSettings(epsilon=1e-12)
    w = coenergy_density(fig1_material, (0.0, 0.0),
                         MaterialState.virgin(fig1_material), settings)
    assert abs(w) <= 1e-4


def test_coenergy_quadrature_oracle():
    # chi = 0: w*(h) = mu0 |h|^2 / 2 + integral of the anhysteretic curve
    params = single_site_material(chi=0.0)
    settings = SolverSettings(epsilon=1e-12)
    A, w, js = 38.0, 1.0, 1.54

    def anhysteretic(s):
        return 2.0 * w * js / np.pi * np.arctan(2.0 * s / A)

    for hmag in (50.0, 200.0, 700.0):
        integral, err = scipy.integrate.quad(anhysteretic, 0.0, hmag)
        expected = 0.5 * MU0 * hmag ** 2 + integral
        got = coenergy_density(params, (hmag, 0.0),
                               MaterialState.virgin(params), settings)
        assert got == pytest.approx(expected, rel=1e-6)


def test_batch_matches_pointwise(fig3_material, settings, rng):
    M = 17
    H = rng.uniform(-400, 400, (M, 2))
    prev = rng.uniform(-0.02, 0.02, (M, fig3_material.n_sites, 2))
    B, J, wstar, tangent, iters = forward_solve_batch(fig3_material, H, prev,
                                                      settings)
    for m in range(M):
        b, nxt = forward_update(fig3_material, H[m],
                                MaterialState(prev[m]), settings)
        assert np.allclose(b, B[m], atol=1e-12)
        assert np.allclose(nxt.partials, J[m], atol=1e-12)
    # tangent is SPD and matches finite differences of B(H)
    for m in range(0, M, 5):
        assert np.all(np.linalg.eigvalsh(tangent[m]) > 0)
        step = 1e-2
        fd = np.empty((2, 2))
        for i in range(2):
            d = np.zeros(2)
            d[i] = step
            bp, _ = forward_update(fig3_material, H[m] + d,
                                   MaterialState(prev[m]), settings)
            bm, _ = forward_update(fig3_material, H[m] - d,
                                   MaterialState(prev[m]), settings)
            fd[:, i] = (bp - bm) / (2 * step)
        if not near_kink(fig3_material, H[m], MaterialState(prev[m]), settings):
            assert np.allclose(fd, tangent[m], rtol=2e-3, atol=1e-8)
