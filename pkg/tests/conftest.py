import numpy as np
import pytest


def central_diff(fn, x, eps=1e-5):
    """Central finite-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(x)
    for j in range(x.size):
        step = np.zeros_like(x)
        step[j] = eps
        out[j] = (fn(x + step) - fn(x - step)) / (2.0 * eps)
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
