import numpy as np
import pytest

from hystkit import (MU0, MaterialState, SolverSettings, coenergy_density,
                     coupled_objective, energy_density, forward_update,
                     inverse_solve_batch, inverse_update)
from conftest import ramp_states


def test_zero_input_zero_output(fig1_material, settings):
    h, nxt = inverse_update(fig1_material, (0.0, 0.0),
                            MaterialState.virgin(fig1_material), settings)
    assert np.allclose(h, 0.0, atol=1e-10)
    assert np.allclose(nxt.partials, 0.0, atol=1e-12)


def test_branch_inverse(fig1_material):
    # invert the ascending-branch forward example
    settings = SolverSettings(epsilon=1e-10)
    states = ramp_states(fig1_material, 600.0, 400, settings)
    b, _ = forward_update(fig1_material, (600.0, 0.0), states[-1], settings)
    h, _ = inverse_update(fig1_material, b, states[-1], settings)
    assert h[0] == pytest.approx(600.0, rel=1e-3)
    assert abs(h[1]) < 1e-6


def test_roundtrip_short_sequence(fig1_material, settings, rng):
    hs = [rng.uniform(-250, 250, 2) for _ in range(30)]
    state_f = MaterialState.virgin(fig1_material)
    bs = []
    for h in hs:
        b, state_f = forward_update(fig1_material, h, state_f, settings)
        bs.append(b)
    state_i = MaterialState.virgin(fig1_material)
    for h, b in zip(hs, bs):
        h_rec, state_i = inverse_update(fig1_material, b, state_i, settings)
        assert np.linalg.norm(h_rec - h) <= 1e-6 * max(1.0, np.linalg.norm(h))


def test_coupled_hessian_matches_gradient_fd(fig3_material, settings, rng):
    # block-diagonal site curvature plus the uniform flux coupling
    prev = MaterialState(rng.uniform(-0.01, 0.01, (fig3_material.n_sites, 2)))
    b = np.array([0.9, -0.4])
    obj = coupled_objective(fig3_material, b, prev, settings)
    x = prev.partials.reshape(-1) * 0.5
    H = obj.hess(x)
    n = x.size
    assert np.allclose(H, H.T)
    step = 1e-7
    fd = np.empty((n, n))
    for i in range(n):
        d = np.zeros(n)
        d[i] = step
        fd[:, i] = (obj.grad(x + d) - obj.grad(x - d)) / (2 * step)
    assert np.allclose(fd, H, rtol=1e-5, atol=1e-5 * np.abs(H).max())
    # uniform off-diagonal coupling equals 1/mu0 on the vector components
    K = fig3_material.n_sites
    Hb = H.reshape(K, 2, K, 2)
    for k in range(0, K, 7):
        for m in range(0, K, 7):
            if k != m:
                assert np.allclose(Hb[k, :, m, :], np.eye(2) / MU0, rtol=1e-12)


def test_minimizer_consistency_with_forward(fig3_material, settings, rng):
    # at a conjugate pair both operators find the same partial polarizations
    prev = MaterialState.virgin(fig3_material)
    for _ in range(3):
        _, prev = forward_update(fig3_material, rng.uniform(-400, 400, 2),
                                 prev, settings)
    h = rng.uniform(-400, 400, 2)
    b, nxt_f = forward_update(fig3_material, h, prev, settings)
    h_rec, nxt_i = inverse_update(fig3_material, b, prev, settings)
    assert np.allclose(nxt_f.partials, nxt_i.partials, atol=1e-6)
    assert np.allclose(h_rec, h, atol=1e-6 * max(1.0, np.linalg.norm(h)))


def test_fenchel_young_equality(fig1_material, settings, rng):
    prev = MaterialState.virgin(fig1_material)
    _, prev = forward_update(fig1_material, (150.0, 60.0), prev, settings)
    for _ in range(10):
        h = rng.uniform(-400, 400, 2)
        b, _ = forward_update(fig1_material, h, prev, settings)
        gap = (energy_density(fig1_material, b, prev, settings)
               + coenergy_density(fig1_material, h, prev, settings)
               - float(h @ b))
        assert abs(gap) <= 1e-8 * max(1.0, abs(float(h @ b)))


def test_fenchel_young_inequality(fig1_material, settings, rng):
    prev = MaterialState.virgin(fig1_material)
    for _ in range(20):
        h = rng.uniform(-400, 400, 2)
        b = rng.uniform(-1.4, 1.4, 2)
        val = (energy_density(fig1_material, b, prev, settings)
               + coenergy_density(fig1_material, h, prev, settings)
               - float(h @ b))
        assert val >= -1e-8


def test_monotonicity(fig1_material, settings, rng):
    # strong monotonicity of the forward map: <h1-h2, b1-b2> >= mu0 |h1-h2|^2
    prev = MaterialState.virgin(fig1_material)
    _, prev = forward_update(fig1_material, (100.0, -40.0), prev, settings)
    for _ in range(20):
        h1 = rng.uniform(-500, 500, 2)
        h2 = rng.uniform(-500, 500, 2)
        b1, _ = forward_update(fig1_material, h1, prev, settings)
        b2, _ = forward_update(fig1_material, h2, prev, settings)
        dh = h1 - h2
        assert float(dh @ (b1 - b2)) >= MU0 * float(dh @ dh) - 1e-12


def test_batch_matches_pointwise(fig3_material, settings, rng):
    M = 9
    B = rng.uniform(-1.2, 1.2, (M, 2))
    prev = rng.uniform(-0.01, 0.01, (M, fig3_material.n_sites, 2))
    H, J, wval, tangent, iters = inverse_solve_batch(fig3_material, B, prev,
                                                     settings)
    for m in range(M):
        h, nxt = inverse_update(fig3_material, B[m], MaterialState(prev[m]),
                                settings)
        assert np.allclose(h, H[m], atol=1e-6)
        assert np.allclose(nxt.partials, J[m], atol=1e-9)
        assert wval[m] == pytest.approx(
            energy_density(fig3_material, B[m], MaterialState(prev[m]), settings),
            rel=1e-10)
    for m in range(0, M, 3):
        ev = np.linalg.eigvalsh(tangent[m])
        assert np.all(ev > 0)
        assert np.all(ev <= 1.0 / MU0 + 1e-6)


def test_prev_not_mutated(fig3_material, settings):
    prev = MaterialState(np.full((fig3_material.n_sites, 2), 0.01))
    snapshot = prev.partials.copy()
    inverse_update(fig3_material, (0.8, 0.2), prev, settings)
    assert np.array_equal(prev.partials, snapshot)
