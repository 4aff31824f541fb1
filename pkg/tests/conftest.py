import numpy as np
import pytest

from povmrank import DensityMatrix


def _random_density_matrix(rng, dim):
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    rho /= np.trace(rho).real
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


@pytest.fixture
def make_rho():
    """Factory for random valid density matrices."""
    return _random_density_matrix
