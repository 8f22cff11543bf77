import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from augarch.exceptions import ModelError
from augarch.model import (
    CoeffExpr,
    ExpLinearCoeff,
    InnovationDist,
    LinkFunction,
    ModelSpec,
    PowerCoeff,
    Transform,
    describe_family,
    make_builtin,
)

KINDS = [("normal", None), ("student-t", 5.0), ("uniform", None), ("two-point", None), ("centered-exponential", None)]


@pytest.mark.parametrize("kind,df", KINDS)
def test_innovations_have_unit_variance(kind, df):
    innov = InnovationDist(kind, df)
    assert innov.abs_moment(2.0) == pytest.approx(1.0, rel=1e-10)
    x = innov.sample(np.random.default_rng(0), 400_000)
    assert np.mean(x) == pytest.approx(0.0, abs=0.01)
    assert np.var(x) == pytest.approx(1.0, abs=0.03)


def test_student_t_needs_finite_variance():
    with pytest.raises(ModelError):
        InnovationDist("student-t", 2.0)
    assert not InnovationDist("student-t", 5.0).abs_moment_finite(5.0)


def test_normal_abs_moment_matches_quadrature():
    innov = InnovationDist()
    for p in (0.5, 1.0, 3.0, 4.5):
        oracle = 2 * mpmath.quad(lambda x: x**p * mpmath.npdf(x), [0, mpmath.inf])
        assert innov.abs_moment(p) == pytest.approx(float(oracle), rel=1e-12)


def test_student_t_abs_moment_matches_quadrature():
    innov = InnovationDist("student-t", 5.0)
    s = math.sqrt(3.0 / 5.0)
    for p in (1.0, 2.0, 3.0):
        oracle = 2 * mpmath.quad(lambda x: (s * x) ** p * mpmath.gamma(3) / (mpmath.sqrt(5 * mpmath.pi) * mpmath.gamma(2.5)) * (1 + x * x / 5) ** -3, [0, mpmath.inf])
        assert innov.abs_moment(p) == pytest.approx(float(oracle), rel=1e-10)


def test_centered_exponential_half_moments():
    innov = InnovationDist("centered-exponential")
    # E eps = 0 splits into equal halves
    assert innov.half_moment(1, +1) == pytest.approx(-innov.half_moment(1, -1), abs=1e-14)
    assert innov.half_moment(1, +1) == pytest.approx(1 / math.e)


def test_cdf_and_pdf_are_consistent():
    for kind, df in KINDS:
        if kind == "two-point":
            continue
        innov = InnovationDist(kind, df)
        x = np.linspace(-0.8, 2.0, 7)
        h = 1e-5
        assert_allclose((innov.cdf(x + h) - innov.cdf(x - h)) / (2 * h), innov.pdf(x), rtol=1e-4, atol=1e-8)


def test_garch_coefficients():
    m = make_builtin("garch", {"omega": 0.1, "alpha": 0.1, "beta": 0.8})
    assert m.c(2.0) == pytest.approx(0.8 + 0.1 * 4)
    assert m.g(-3.0) == pytest.approx(0.1)
    assert m.link.kind == "polynomial" and m.link.delta == 1.0


def test_gjr_has_leverage_term():
    m = make_builtin("gjr", {"omega": 0.1, "alpha": 0.05, "alpha_neg": 0.1, "beta": 0.8})
    assert m.c(-1.0) == pytest.approx(0.95)
    assert m.c(1.0) == pytest.approx(0.85)


def test_egarch_uses_log_link():
    m = make_builtin("egarch", {"omega": -0.1, "beta": 0.9, "alpha": 0.2, "gamma": -0.1})
    assert m.link.kind == "exponential"
    assert m.g(-1.0) == pytest.approx(-0.1 + 0.2 + 0.1)


def test_power_garch_general_delta():
    m = make_builtin("power-garch", {"omega": 0.1, "alpha": 0.1, "beta": 0.8, "delta": 0.75})
    assert isinstance(m.c, PowerCoeff)
    assert m.c(-2.0) == pytest.approx(0.8 + 0.1 * 2.0**1.5)


def test_exp_c_defaults_to_student_t():
    m = make_builtin("exp-c", {"slope": 0.5, "shift": 1.0, "omega": 0.1})
    assert m.innovation.kind == "student-t" and m.innovation.df == 5.0
    assert isinstance(m.c, ExpLinearCoeff)
    assert m.c(2.0) == pytest.approx(1.0)


@pytest.mark.parametrize(
    "family,params",
    [("garch", {"omega": 0.1, "alpha": 0.1}), ("garch", {"omega": -1, "alpha": 0.1, "beta": 0.8}), ("nosuch", {})],
)
def test_bad_families_are_rejected(family, params):
    with pytest.raises(ModelError):
        make_builtin(family, params)


def test_describe_family():
    assert "beta + alpha*x^2" in describe_family("garch")
    assert "Lambda = log" in describe_family("egarch")
    with pytest.raises(ModelError):
        describe_family("nosuch")


def test_model_round_trips_through_dict():
    m = make_builtin("gjr", {"omega": 0.1, "alpha": 0.05, "alpha_neg": 0.1, "beta": 0.8})
    again = ModelSpec.from_dict(m.to_dict())
    x = np.linspace(-3, 3, 13)
    assert_allclose(again.c(x), m.c(x))
    assert again.link == m.link and again.innovation == m.innovation


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 3.0), st.floats(1e-3, 1e3))
def test_polynomial_link_inverts(delta, s2):
    link = LinkFunction("polynomial", delta)
    assert float(link.invert(link.apply(s2))) == pytest.approx(s2, rel=1e-10)


@settings(max_examples=60, deadline=None)
@given(st.floats(-20.0, 20.0))
def test_exponential_link_inverts(x):
    link = LinkFunction("exponential")
    assert float(link.apply(link.invert(x))) == pytest.approx(x, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.floats(-50, 50), st.floats(0.1, 4.0))
def test_transforms(y, nu):
    assert Transform("power-abs", nu)(y) == pytest.approx(abs(y) ** nu)
    assert Transform("signed-power", nu)(y) == pytest.approx(math.copysign(abs(y) ** nu, y) if y else 0.0)


def test_coeff_expr_basis():
    e = CoeffExpr(k0=1.0, k1=2.0, k2=3.0, k3=4.0, k4=5.0)
    x = -1.5
    assert e(x) == pytest.approx(1 + 2 * x + 3 * x * x + 4 * abs(x) + 5 * x * x)
    assert e(1.5) == pytest.approx(1 + 3 + 3 * 2.25 + 6)
