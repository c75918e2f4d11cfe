import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def latent_pair(rho, n, seed):
    """n draws from a standard bivariate normal with correlation rho."""
    rng = np.random.default_rng(seed)
    return rng.multivariate_normal([0.0, 0.0], [[1.0, rho], [rho, 1.0]], size=n)


def cut(z, gammas, levels=None):
    """Discretize latent values at the given cut-points."""
    idx = np.searchsorted(np.asarray(gammas, dtype=float), z, side="right")
    levels = np.arange(len(gammas) + 1, dtype=float) if levels is None else np.asarray(levels, dtype=float)
    return levels[idx]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
