import numpy as np
import pytest

import glflow
from glflow.state import FlowState


@pytest.fixture(scope="session")
def flat_2pi_64():
    return glflow.make_geometry(2 * np.pi, 2 * np.pi, 64, 64)


@pytest.fixture(scope="session")
def sub_geom():
    """Subcritical for N = 1: area 9 < 4 pi."""
    return glflow.make_geometry(3.0, 3.0, 32, 32)


@pytest.fixture(scope="session")
def super_geom():
    """Supercritical for N = 1: area 8 pi^2 > 4 pi."""
    L = 2 * np.pi * np.sqrt(2)
    return glflow.make_geometry(L, L, 32, 32)


def random_state(geom, bundle, seed, phi_scale=1.0, a_scale=0.3):
    """Generic smooth-ish state for invariance and oracle tests."""
    rng = np.random.default_rng(seed)
    phi = glflow.random_section(bundle, geom, seed, smoothing_steps=10)
    phi = phi_scale * phi / np.max(np.abs(phi))
    a1, a2 = glflow.random_divfree_oneform(geom, seed + 1, a_scale)
    da = rng.standard_normal((2,) + geom.shape)
    return FlowState(0.0, a1 + 0.02 * da[0], a2 + 0.02 * da[1], phi)
