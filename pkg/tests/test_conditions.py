import math

import numpy as np
import pytest

from augarch.conditions import (
    check_exp_moment,
    check_lambda_moment,
    check_log_moments,
    check_lyapunov_bounds,
    check_nonnegativity,
    check_power_moment,
    check_sigma_inverse_moment,
    check_stationarity,
    check_transform_moment,
    contraction_rate,
    expect,
    gate,
    lyapunov_exponent,
    moment_abs,
)
from augarch.exceptions import ModelError, NoCertificateError, PreconditionError
from augarch.model import CoeffExpr, InnovationDist, LinkFunction, ModelSpec, Transform, make_builtin

from conftest import gauss_hermite_mean


def test_garch_coefficient_moments_closed_form(garch):
    assert moment_abs(garch.c, 1.0, garch.innovation).point == pytest.approx(0.9, rel=1e-12)
    assert moment_abs(garch.c, 2.0, garch.innovation).point == pytest.approx(0.8**2 + 2 * 0.1 * 0.8 + 3 * 0.01, rel=1e-12)


def test_garch_moments_against_gauss_hermite(garch):
    for mu in (1.0, 2.0, 3.0):
        oracle = gauss_hermite_mean(lambda x: (0.8 + 0.1 * x * x) ** mu)
        assert moment_abs(garch.c, mu, garch.innovation, method="quadrature").point == pytest.approx(oracle, rel=1e-9)


def test_lyapunov_exponent_against_gauss_hermite(garch):
    oracle = gauss_hermite_mean(lambda x: np.log(0.8 + 0.1 * x * x))
    assert lyapunov_exponent(garch).point == pytest.approx(oracle, rel=1e-8)


def test_monte_carlo_band_covers_closed_form(garch):
    est = moment_abs(garch.c, 2.0, garch.innovation, method="monte-carlo", budget=400_000, seed=3)
    assert est.ci_low - 0.01 < 0.83 < est.ci_high + 0.01
    assert est.method.startswith("monte-carlo")


def test_garch_conditions_hold(garch):
    assert check_stationarity(garch).verdict == "holds"
    assert check_lyapunov_bounds(garch).verdict == "holds"
    assert check_nonnegativity(garch).verdict == "holds"
    assert check_power_moment(garch, 1.0).verdict == "holds"
    assert check_power_moment(garch, 2.0).verdict == "holds"
    assert check_lambda_moment(garch, 2.0).verdict == "holds"
    assert check_sigma_inverse_moment(garch, 1.0).verdict == "holds"


def test_igarch_stationary_without_variance(igarch):
    assert check_stationarity(igarch).verdict == "holds"
    r = check_power_moment(igarch, 1.0)
    assert r.verdict == "fails"
    assert r.converse


def test_power_moment_needs_polynomial_link(egarch):
    with pytest.raises(ModelError):
        check_power_moment(egarch, 1.0)


def test_egarch_exponential_moment_depends_on_tails(egarch):
    assert check_exp_moment(egarch, 1.0).verdict == "holds"
    heavy = egarch.with_innovation(InnovationDist("student-t", 5.0))
    assert check_exp_moment(heavy, 1.0).verdict == "fails"


def test_exp_c_log_moment_regime():
    m = make_builtin("exp-c", {"slope": 0.5, "shift": 1.0, "omega": 0.1})
    reports = check_log_moments(m, 3.0)
    assert reports["EQ21"].verdict == "fails"
    assert reports["EQ20"].verdict == "holds"
    assert lyapunov_exponent(m).point == pytest.approx(-1.0)
    with pytest.raises(NoCertificateError):
        contraction_rate(m)


def test_vanishing_coefficient_has_minus_infinite_lyapunov(iid):
    assert lyapunov_exponent(iid).point == -math.inf
    assert check_stationarity(iid).verdict == "holds"
    assert check_lyapunov_bounds(iid).verdict == "fails"
    assert contraction_rate(iid) == (0.0, 1.0)


def test_explosive_constant_model():
    m = make_builtin("constant", {"c": 1.5, "g": 1.0, "delta": 1.0})
    assert check_stationarity(m).verdict == "fails"


def test_negative_coefficients_fail_nonnegativity():
    m = ModelSpec(CoeffExpr(k0=0.5, k1=0.2), CoeffExpr(k0=1.0), LinkFunction("polynomial", 1.0))
    assert check_nonnegativity(m).verdict == "fails"


def test_contraction_rate_of_garch(garch):
    rate, mu = contraction_rate(garch)
    assert mu == 1.0 and rate == pytest.approx(0.9)


def test_transform_gate(garch, igarch):
    f = Transform("signed-power", 1.0)
    assert gate(check_transform_moment(garch, f, 2.0), "test") == "holds"
    with pytest.raises(PreconditionError) as info:
        gate(check_transform_moment(igarch, f, 2.0), "test")
    assert any(r.verdict == "fails" for r in info.value.reports)


def test_inconclusive_gate_warns():
    from augarch.conditions import ConditionReport

    with pytest.warns(RuntimeWarning):
        assert gate([ConditionReport("X", "inconclusive")], "test") == "inconclusive"


def test_two_point_expectation_is_exact():
    innov = InnovationDist("two-point")
    est = expect(lambda x: x * x + x, innov)
    assert est.point == 1.0 and est.ci_low == est.ci_high
