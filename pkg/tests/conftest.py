import numpy as np
import pytest

from optomech_bistab.params import (
    PhysicalParams,
    default_params,
    derive_model,
)

TWO_PI = 2.0 * np.pi


@pytest.fixture
def reference_physical():
    """Millimetre-cavity set with the decay rate derived from the finesse."""
    omega_m = TWO_PI * 1e7
    return PhysicalParams(
        cavity_length=1e-3,
        finesse=1.07e4,
        wavelength=810e-9,
        power=0.05,
        mass=5e-12,
        omega_m=omega_m,
        gamma_m=TWO_PI * 100.0,
        temperature=0.4,
        delta0=2.62 * omega_m,
    )


@pytest.fixture
def reference_model(reference_physical):
    return derive_model(reference_physical)


@pytest.fixture
def default_physical():
    """Bundled default set (decay rate pinned to 1.4 omega_m)."""
    return default_params()


@pytest.fixture
def default_model(default_physical):
    return derive_model(default_physical)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
