import math

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from augarch.dependence import (
    autocovariance,
    classify_regime,
    coupling_tail,
    default_alpha,
    eta_difference,
    fit_geometric_decay,
    l2_coupling_error,
    summability_check,
)
from augarch.model import Transform, make_builtin

ABS = Transform("power-abs", 1.0)


def test_geometric_fit_exact_sequence():
    fit = fit_geometric_decay([1, 2, 3, 4], [1, 0.5, 0.25, 0.125])
    assert fit.rate == pytest.approx(0.5, rel=1e-12)
    assert fit.r_squared == 1.0
    assert fit.contracting


def test_geometric_fit_exact_coupling():
    fit = fit_geometric_decay([1, 2, 3], [0.0, 0.0, 0.0])
    assert fit.degenerate and fit.rate == 0.0


def test_geometric_fit_drops_points_below_noise_floor():
    err = np.array([1, 0.5, 0.25, 0.125, 1e-6])
    fit = fit_geometric_decay(np.arange(1, 6), err, stderr=np.full(5, 1e-6))
    assert_array_equal(fit.used, [True, True, True, True, False])


def test_classify_regime_synthetic():
    m = np.arange(1, 30)
    assert classify_regime(m, 0.8**m)[0] == "exponential"
    assert classify_regime(m, m**-2.0)[0] == "polynomial"
    assert classify_regime(m, np.ones(m.size))[0] == "inconclusive"
    assert classify_regime([1, 2], [0.5, 0.25])[0] == "inconclusive"


def test_default_alpha():
    assert default_alpha(-0.2) == pytest.approx(0.05)
    assert default_alpha(-5.0) == 0.1


def brute_acov(v, L):
    v = np.asarray(v, float)
    n, mu = v.size, v.mean()
    return np.array([np.sum((v[: n - k] - mu) * (v[k:] - mu)) / (n - k) for k in range(L + 1)])


@pytest.mark.parametrize("batches", [2, 7])
def test_autocovariance_matches_brute_force(batches):
    rng = np.random.default_rng(3)
    v = 5.0 + np.cumsum(rng.standard_normal(997)) * 0.1
    t = autocovariance(v, max_lag=6, batches=batches)
    assert_allclose(t.gamma, brute_acov(v, 6), rtol=1e-10, atol=1e-12)
    assert t.mean == pytest.approx(v.mean(), rel=1e-13)
    assert t.partial_abs_sums[-1] == pytest.approx(np.sum(np.abs(t.gamma[1:])), rel=1e-12)


def test_autocovariance_requires_two_batches():
    with pytest.raises(ValueError):
        autocovariance(np.ones(10), batches=1)


def test_signed_observations_are_uncorrelated(garch):
    # y_k = sigma_k eps_k is a martingale difference sequence
    t = autocovariance(garch, Transform("signed-power", 1.0), max_lag=5, budget=400_000, seed=1)
    assert np.all(np.abs(t.gamma[1:]) <= 5 * t.se[1:] + 1e-3)
    assert t.gamma[0] == pytest.approx(1.0, abs=0.05)


def test_iid_coupling_is_exact(iid):
    fit = l2_coupling_error(iid, ABS, [1, 2, 3], reps=1000, seed=0)
    assert fit.degenerate and fit.rate == 0.0
    tail = coupling_tail(iid, [1, 2, 3], reps=1000)
    assert np.all(tail.lambda_counts == 0)


def test_constant_coefficient_decay_rate():
    # c == 0.5: the state difference is exactly 0.5^m X_{k-m}, and with
    # f = Lambda^(1/2)-power the rate of ||eta - eta_m||_2 is governed by 0.5
    m = make_builtin("constant", {"c": 0.5, "g": 1.0, "delta": 1.0})
    fit = l2_coupling_error(m, Transform("power-abs", 2.0), list(range(1, 12)), reps=2000, seed=0)
    assert fit.rate == pytest.approx(0.5, rel=1e-6)


def test_eta_difference_is_exact_for_tiny_differences(garch):
    f = Transform("power-abs", 1.0)
    x_m = np.array([1.3])
    diff = np.array([1e-14])
    eps = np.array([0.7])
    got = eta_difference(garch, f, x_m, diff, eps)
    # d/dx sqrt(x) * |eps| at x = 1.3
    assert got[0] == pytest.approx(0.7 * 0.5 / math.sqrt(1.3) * 1e-14, rel=1e-6)


def test_summability_for_exact_coupling(iid):
    t = autocovariance(iid, ABS, max_lag=3, budget=20_000, seed=0)
    fit = l2_coupling_error(iid, ABS, [1, 2, 3], reps=500)
    s = summability_check(t, fit)
    assert s.certified and s.tail_bound == 0.0
