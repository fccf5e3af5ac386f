import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def band_limited(grid, rng, modes=3, lead=()):
    """Smooth random periodic field: a few low Fourier modes per axis."""
    X = grid.coords()
    out = np.zeros(lead + grid.shape)
    for idx in np.ndindex(*lead) if lead else [()]:
        f = np.zeros(grid.shape)
        for _ in range(modes):
            k = [2 * np.pi * rng.integers(-2, 3) / e for e in grid.extents]
            phase = rng.uniform(0, 2 * np.pi)
            f = f + rng.standard_normal() * np.cos(sum(ki * xi for ki, xi in zip(k, X)) + phase)
        out[idx] = f
    return out
