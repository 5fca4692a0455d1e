import numpy as np
import pytest


def gauss_oracle(n=64):
    """Gauss-Legendre nodes/weights on [0, 1] from numpy (independent of the package's Lobatto code)."""
    t, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (t + 1.0), 0.5 * w


@pytest.fixture(scope="session")
def gauss64():
    return gauss_oracle(64)


def legendre_oracle(n, x):
    """Shifted Legendre L_n(x) = P_n(2x - 1) via numpy's Legendre series."""
    c = np.zeros(n + 1)
    c[n] = 1.0
    return np.polynomial.legendre.legval(2 * np.asarray(x) - 1, c)
