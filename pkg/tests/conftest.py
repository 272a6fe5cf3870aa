import numpy as np
import pytest

from hystkit import (MaterialState, SolverSettings, default_fem_iron,
                     graded_chain_material, single_site_material)


@pytest.fixture
def settings():
    return SolverSettings()


@pytest.fixture
def fig1_material():
    """Single pinning force: A=38, J_s=1.54 T, chi=71, w=1."""
    return single_site_material()


@pytest.fixture
def fig3_material():
    """Twenty equally weighted sites, chi graded to 140 A/m, A=50."""
    return graded_chain_material()


@pytest.fixture
def fem_iron():
    return default_fem_iron()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def ramp_states(params, target_h, steps, settings):
    """Monotone uniaxial ramp from the virgin state; returns the state list."""
    from hystkit import forward_update

    state = MaterialState.virgin(params)
    states = [state]
    for h in np.linspace(0.0, target_h, steps)[1:]:
        _, state = forward_update(params, (h, 0.0), state, settings)
        states.append(state)
    return states
