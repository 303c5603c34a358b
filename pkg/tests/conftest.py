import warnings

import numpy as np
import pytest

from schrotbc.spectral import DomainMap, SpectralSpace


def gram(N, order):
    """Quadrature Gram matrix of the basis (or its derivatives), exact for these degrees."""
    from schrotbc.spectral import lgl_grid, lobatto_table

    q = lgl_grid(N + 2)
    T = lobatto_table(N, q.nodes, order)
    return (T * q.weights) @ T.T


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def small_space():
    return SpectralSpace(DomainMap.square(6.0), 8, 10)


def gaussian(width=1.0, x0=(0.0, 0.0)):
    def f(x1, x2, t=0.0):
        return np.exp(-((x1 - x0[0]) ** 2 + (x2 - x0[1]) ** 2) / width ** 2) + 0j
    return f


@pytest.fixture(autouse=True)
def _quiet_support_warning():
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="initial boundary trace")
        yield
