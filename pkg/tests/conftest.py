import warnings

import numpy as np
import pytest
from numpy.polynomial.hermite_e import hermegauss

from augarch.model import make_builtin


def gauss_hermite_mean(h, nodes: int = 200) -> float:
    """E h(Z) for standard normal Z by probabilists' Gauss-Hermite quadrature."""
    x, w = hermegauss(nodes)
    return float(np.sum(w * h(x)) / np.sqrt(2 * np.pi))


@pytest.fixture
def garch():
    return make_builtin("garch", {"omega": 0.1, "alpha": 0.1, "beta": 0.8})


@pytest.fixture
def iid():
    return make_builtin("iid", {})


@pytest.fixture
def egarch():
    return make_builtin("egarch", {"omega": -0.1, "beta": 0.9, "alpha": 0.2, "gamma": -0.1})


@pytest.fixture
def igarch():
    return make_builtin("igarch", {"omega": 0.1, "alpha": 0.1})


@pytest.fixture(autouse=True)
def _quiet_runtime_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        yield
