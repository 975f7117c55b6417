import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def gauss_legendre_01(n=20):
    """Independent quadrature oracle on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w
