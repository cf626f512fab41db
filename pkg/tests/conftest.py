import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def random_points(rng, n, scale=2.0):
    """Random Heisenberg points with coordinates of moderate size."""
    pts = rng.uniform(-scale, scale, size=(n, 3))
    return pts
