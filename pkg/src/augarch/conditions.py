"""
Stationarity and moment conditions with evidence.

Every check returns a :class:`ConditionReport` whose verdict is ``holds``,
``fails`` or ``inconclusive``.  A verdict is ``inconclusive`` exactly when the
decision threshold lies inside the 95% band of an estimate.

Finiteness of moments is decided structurally from the growth of the
coefficient expression and the tail of the innovation law; finite values are
then estimated in closed form, by adaptive quadrature (normal innovations) or
by Monte Carlo.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P
from scipy import integrate

from augarch.exceptions import ModelError, NoCertificateError, PreconditionError
from augarch.model import ExpLinearCoeff, InnovationDist, ModelSpec
from augarch.seeding import SeedSpec

__all__ = [
    "ConditionReport",
    "MomentEstimate",
    "check_exp_moment",
    "check_lambda_moment",
    "check_log_moments",
    "check_lyapunov_bounds",
    "check_nonnegativity",
    "check_power_moment",
    "check_sigma_inverse_moment",
    "check_transform_moment",
    "gate",
    "check_stationarity",
    "contraction_rate",
    "expect",
    "lyapunov_exponent",
    "moment_abs",
]

HOLDS, FAILS, INCONCLUSIVE = "holds", "fails", "inconclusive"
DEFAULT_MC = 1_000_000
EXP_MARGIN = 1.1
_MC_CHUNK = 1_000_000
_Z95 = 1.959963984540054


@dataclass(frozen=True)
class MomentEstimate:
    """Point estimate of an expectation with a 95% band."""

    quantity: str
    order: float | None
    point: float
    ci_low: float
    ci_high: float
    method: str

    @property
    def finite(self) -> bool:
        return math.isfinite(self.point)

    def below(self, threshold: float) -> str:
        """Ternary comparison ``point < threshold`` honouring the band."""
        if self.ci_high < threshold:
            return HOLDS
        if self.ci_low >= threshold:
            return FAILS
        return INCONCLUSIVE

    def to_dict(self) -> dict:
        return {
            "quantity": self.quantity,
            "order": self.order,
            "point": self.point,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "method": self.method,
        }


@dataclass
class ConditionReport:
    condition: str
    verdict: str
    evidence: list[MomentEstimate] = field(default_factory=list)
    parameter: float | None = None
    theta: float | None = None
    converse: bool | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return self.verdict == HOLDS

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "verdict": self.verdict,
            "parameter": self.parameter,
            "theta": self.theta,
            "converse": self.converse,
            "notes": list(self.notes),
            "evidence": [e.to_dict() for e in self.evidence],
        }


def _combine(*verdicts: str) -> str:
    if FAILS in verdicts:
        return FAILS
    if INCONCLUSIVE in verdicts:
        return INCONCLUSIVE
    return HOLDS


def _exact(quantity, order, value, method="closed-form") -> MomentEstimate:
    return MomentEstimate(quantity, order, float(value), float(value), float(value), method)


# ---------------------------------------------------------------------------
# Structural moment finiteness
# ---------------------------------------------------------------------------


def _innovation_tail(innov: InnovationDist, side: int) -> tuple[str, float]:
    lo, hi = innov.support
    if (side > 0 and math.isfinite(hi)) or (side < 0 and math.isfinite(lo)):
        return ("bounded", 0.0)
    if innov.kind == "normal":
        return ("gauss", 0.0)
    if innov.kind == "student-t":
        return ("power", innov.df)
    return ("expo", 1.0)


def _open_sides(innov):
    return [s for s in (+1, -1) if _innovation_tail(innov, s)[0] != "bounded"]


def abs_power_finite(expr, mu: float, innov: InnovationDist) -> bool:
    """Whether E|e(eps)|^mu < inf."""
    for side in _open_sides(innov):
        tail, tpar = _innovation_tail(innov, side)
        kind, order, _ = expr.tail(side)
        if kind == "poly" and tail == "power" and mu * order >= tpar:
            return False
        if kind == "exp":
            if tail == "power":
                return False
            if tail == "expo" and mu * order >= tpar:
                return False
    return True


def exp_abs_finite(expr, mu: float, innov: InnovationDist) -> bool:
    """Whether E exp(mu |e(eps)|) < inf."""
    for side in _open_sides(innov):
        tail, _ = _innovation_tail(innov, side)
        kind, order, coef = expr.tail(side)
        if kind == "const":
            continue
        if kind == "exp" or tail == "power":
            return False
        if tail == "gauss" and (order > 2 or (order == 2 and mu * coef >= 0.5)):
            return False
        if tail == "expo" and (order > 1 or (order == 1 and mu * coef >= 1.0)):
            return False
    return True


def _vanishes_with_positive_probability(expr, innov: InnovationDist) -> bool:
    if innov.atoms is not None:
        return any(float(expr(a)) == 0.0 for a in innov.atoms)
    if expr.constant == 0.0:
        return True
    lo, hi = innov.support
    sides = ([+1] if hi > 0 else []) + ([-1] if lo < 0 else [])
    return any(expr.vanishes_on_side(s) for s in sides)


def log_abs_power_finite(expr, mu: float, innov: InnovationDist) -> bool:
    """Whether E|log|e(eps)||^mu < inf (``inf`` when e vanishes on a non-null set)."""
    if _vanishes_with_positive_probability(expr, innov):
        return False
    for side in _open_sides(innov):
        tail, tpar = _innovation_tail(innov, side)
        kind, _, _ = expr.log_tail(side)
        if kind == "poly" and tail == "power" and mu >= tpar:
            return False
    return True


def log_plus_power_finite(expr, mu: float, innov: InnovationDist) -> bool:
    """Whether E(log+ |e(eps)|)^mu < inf."""
    for side in _open_sides(innov):
        tail, tpar = _innovation_tail(innov, side)
        kind, order, _ = expr.tail(side)
        if kind == "exp" and tail == "power" and mu >= tpar:
            return False
    return True


def support_extrema(expr, innov: InnovationDist) -> tuple[float, float]:
    """Essential infimum and supremum of e(eps)."""
    if innov.atoms is not None:
        vals = [float(expr(a)) for a in innov.atoms]
        return min(vals), max(vals)
    if not hasattr(expr, "extrema_on"):
        raise NotImplementedError
    return expr.extrema_on(*innov.support)


# ---------------------------------------------------------------------------
# Expectations
# ---------------------------------------------------------------------------


def _mc_stream(innov, budget, seed: SeedSpec):
    gen = seed.generator()
    left = budget
    while left > 0:
        k = min(left, _MC_CHUNK)
        left -= k
        yield innov.sample(gen, k)


def _monte_carlo(h, innov, budget, seed, quantity, order) -> MomentEstimate:
    total, total2, count = [], [], 0
    for x in _mc_stream(innov, budget, seed):
        v = np.asarray(h(x), dtype=float)
        if np.any(np.isneginf(v)):
            return _exact(quantity, order, -math.inf, f"monte-carlo({budget})")
        total.append(float(np.sum(v)))
        total2.append(float(np.sum(v * v)))
        count += v.size
    mean = math.fsum(total) / count
    var = max(math.fsum(total2) / count - mean * mean, 0.0) * count / max(count - 1, 1)
    half = _Z95 * math.sqrt(var / count)
    return MomentEstimate(quantity, order, mean, mean - half, mean + half, f"monte-carlo({count})")


def _quadrature(h, innov, quantity, order, breaks=()) -> MomentEstimate:
    lo, hi = innov.support
    pts = sorted({lo, hi, 0.0, *[b for b in breaks if lo < b < hi]})
    total, err = 0.0, 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for a, b in zip(pts[:-1], pts[1:]):
            val, e = integrate.quad(lambda x: float(h(x)) * float(innov.pdf(x)), a, b, limit=400, epsabs=1e-13, epsrel=1e-11)
            total += val
            err += e
    err = 10.0 * err + 1e-14 * abs(total)
    return MomentEstimate(quantity, order, total, total - err, total + err, "quadrature")


def expect(h, innov: InnovationDist, *, quantity="E h(eps)", order=None, method="auto", budget=DEFAULT_MC, seed=0, breaks=()):
    """E h(eps) with a 95% band.

    ``method`` is ``auto`` (exact for two-point, quadrature for normal,
    Monte Carlo otherwise), ``quadrature`` or ``monte-carlo``.
    """
    if innov.atoms is not None and method != "monte-carlo":
        vals = [float(h(a)) for a in innov.atoms]
        return _exact(quantity, order, sum(vals) / len(vals))
    if method == "auto":
        method = "quadrature" if innov.kind == "normal" else "monte-carlo"
    if method == "quadrature":
        return _quadrature(h, innov, quantity, order, breaks)
    if method == "monte-carlo":
        seed = seed if isinstance(seed, SeedSpec) else SeedSpec(int(seed), 0, f"conditions/{quantity}/{order}")
        return _monte_carlo(h, innov, int(budget), seed, quantity, order)
    raise ValueError(f"unknown method {method!r}")


def _poly_side_expectation(coefs, side, innov) -> float:
    return sum(a * innov.half_moment(p, side) for p, a in enumerate(coefs) if a != 0)


def _closed_form_abs_power(expr, mu: float, innov: InnovationDist) -> float | None:
    const = expr.constant
    if const is not None:
        return abs(const) ** mu
    if isinstance(expr, ExpLinearCoeff) and innov.kind == "normal":
        return math.exp(-mu * expr.shift + 0.5 * (mu * expr.slope) ** 2)
    if hasattr(expr, "signed_poly") and float(mu).is_integer():
        k = int(mu)
        if k % 2 == 1 and support_extrema(expr, innov)[0] < 0:
            return None
        total = 0.0
        for side in (+1, -1):
            coefs = P.polypow(expr.signed_poly(side), k)
            total += _poly_side_expectation(coefs, side, innov)
        return total
    return None


def _breaks(expr) -> list[float]:
    """Kinks and roots where quadrature should split the integration range."""
    out = []
    if hasattr(expr, "side_poly"):
        for side in (+1, -1):
            roots = np.roots([c for c in reversed(expr.side_poly(side))]) if any(expr.side_poly(side)[1:]) else []
            for r in np.atleast_1d(roots):
                if abs(np.imag(r)) < 1e-12 and np.real(r) > 0:
                    out.append(side * float(np.real(r)))
    return out


def moment_abs(expr, mu: float, innov: InnovationDist, *, name="e", method="auto", budget=DEFAULT_MC, seed=0) -> MomentEstimate:
    """E|e(eps)|^mu, ``inf`` when structurally divergent."""
    quantity = f"E|{name}(eps)|^mu"
    if not abs_power_finite(expr, mu, innov):
        return _exact(quantity, mu, math.inf, "structural")
    if method in ("auto", "closed-form"):
        cf = _closed_form_abs_power(expr, mu, innov)
        if cf is not None:
            return _exact(quantity, mu, cf)
        if method == "closed-form":
            raise ValueError(f"no closed form for {quantity} of order {mu}")
    return expect(lambda x: np.abs(expr(x)) ** mu, innov, quantity=quantity, order=mu, method=method, budget=budget, seed=seed, breaks=_breaks(expr))


def _exp_abs_moment(expr, mu, innov, name, method, budget, seed) -> MomentEstimate:
    quantity = f"E exp(mu|{name}(eps)|)"
    if not exp_abs_finite(expr, mu, innov):
        return _exact(quantity, mu, math.inf, "structural")
    const = expr.constant
    if const is not None:
        return _exact(quantity, mu, math.exp(mu * abs(const)))
    return expect(lambda x: np.exp(mu * np.abs(expr(x))), innov, quantity=quantity, order=mu, method=method, budget=budget, seed=seed, breaks=_breaks(expr))


def _log_plus_moment(expr, mu, innov, name, method, budget, seed) -> MomentEstimate:
    quantity = f"E(log+|{name}(eps)|)^mu"
    if not log_plus_power_finite(expr, mu, innov):
        return _exact(quantity, mu, math.inf, "structural")
    const = expr.constant
    if const is not None:
        return _exact(quantity, mu, max(math.log(abs(const)), 0.0) ** mu if const != 0 else 0.0)

    def h(x):
        with np.errstate(divide="ignore"):
            return np.maximum(np.log(np.abs(expr(x))), 0.0) ** mu

    return expect(h, innov, quantity=quantity, order=mu, method=method, budget=budget, seed=seed, breaks=_breaks(expr))


def _log_abs_moment(expr, mu, innov, name, method, budget, seed) -> MomentEstimate:
    quantity = f"E|log|{name}(eps)||^mu"
    if not log_abs_power_finite(expr, mu, innov):
        return _exact(quantity, mu, math.inf, "structural")
    const = expr.constant
    if const is not None:
        return _exact(quantity, mu, abs(math.log(abs(const))) ** mu)

    def h(x):
        with np.errstate(divide="ignore"):
            return np.abs(np.log(np.abs(expr(x)))) ** mu

    return expect(h, innov, quantity=quantity, order=mu, method=method, budget=budget, seed=seed, breaks=_breaks(expr))


# ---------------------------------------------------------------------------
# Checks
# ---------------------------------------------------------------------------


def lyapunov_exponent(model: ModelSpec, method: str = "auto", budget: int = DEFAULT_MC, seed=0) -> MomentEstimate:
    """E log|c(eps_0)|; ``-inf`` when c vanishes with positive probability."""
    quantity = "E log|c(eps)|"
    c, innov = model.c, model.innovation
    if _vanishes_with_positive_probability(c, innov):
        return _exact(quantity, None, -math.inf, "structural")
    const = c.constant
    if const is not None:
        return _exact(quantity, None, math.log(abs(const)))
    if isinstance(c, ExpLinearCoeff):
        return _exact(quantity, None, -c.shift)

    def h(x):
        with np.errstate(divide="ignore"):
            return np.log(np.abs(c(x)))

    return expect(h, innov, quantity=quantity, method=method, budget=budget, seed=seed, breaks=_breaks(c))


def check_stationarity(model: ModelSpec, method: str = "auto", budget: int = DEFAULT_MC, seed=0) -> ConditionReport:
    """E log|c| < 0 with finite E log+|g| and E log+|c|."""
    lyap = lyapunov_exponent(model, method, budget, seed)
    lg = _log_plus_moment(model.g, 1.0, model.innovation, "g", method, budget, seed)
    lc = _log_plus_moment(model.c, 1.0, model.innovation, "c", method, budget, seed)
    verdicts = [lyap.below(0.0)]
    if not (lg.finite and lc.finite):
        verdicts.append(FAILS)
    report = ConditionReport("EQ5", _combine(*verdicts), [lyap, lg, lc])
    if lyap.point == -math.inf:
        report.notes.append("c vanishes with positive probability; the series has finitely many terms")
    return report


def check_lyapunov_bounds(model: ModelSpec, method: str = "auto", budget: int = DEFAULT_MC, seed=0) -> ConditionReport:
    """-inf < E log|c| < 0, required by the tail-probability coupling bounds."""
    lyap = lyapunov_exponent(model, method, budget, seed)
    if lyap.point == -math.inf:
        return ConditionReport("EQ19", FAILS, [lyap], notes=["E log|c| = -inf: lower bound fails"])
    return ConditionReport("EQ19", lyap.below(0.0), [lyap])


def check_nonnegativity(model: ModelSpec, budget: int = DEFAULT_MC, seed=0) -> ConditionReport:
    """c(eps) >= 0 and g(eps) >= 0 almost surely."""
    evidence, verdicts = [], []
    for name, expr in (("c", model.c), ("g", model.g)):
        try:
            lo, _ = support_extrema(expr, model.innovation)
        except NotImplementedError:
            gen = SeedSpec(int(seed) if not isinstance(seed, SeedSpec) else seed.master_seed, 0, f"conditions/nonneg/{name}").generator()
            lo = float(np.min(expr(model.innovation.sample(gen, budget))))
            evidence.append(_exact(f"min sampled {name}(eps)", None, lo, f"monte-carlo({budget})"))
            verdicts.append(FAILS if lo < 0 else INCONCLUSIVE)
            continue
        evidence.append(_exact(f"ess inf {name}(eps)", None, lo, "structural"))
        verdicts.append(HOLDS if lo >= 0 else FAILS)
    return ConditionReport("EQ9", _combine(*verdicts), evidence)


def _nonneg_holds(model: ModelSpec) -> bool:
    return check_nonnegativity(model).holds


def check_lambda_moment(model: ModelSpec, mu: float, method: str = "auto", budget: int = DEFAULT_MC, seed=0) -> ConditionReport:
    """E|g|^mu < inf and E|c|^mu < 1 (sufficient for E|Lambda(sigma_0^2)|^mu < inf)."""
    if not mu > 0:
        raise ValueError("mu must be positive")
    g_m = moment_abs(model.g, mu, model.innovation, name="g", method=method, budget=budget, seed=seed)
    c_m = moment_abs(model.c, mu, model.innovation, name="c", method=method, budget=budget, seed=seed)
    verdict = _combine(HOLDS if g_m.finite else FAILS, c_m.below(1.0))
    report = ConditionReport("EQ8", verdict, [c_m, g_m], parameter=mu)
    report.converse = _nonneg_holds(model)
    if verdict == FAILS and report.converse:
        report.notes.append("c, g >= 0: E|Lambda(sigma_0^2)|^mu = inf")
    return report


def check_power_moment(model: ModelSpec, nu: float, method: str = "auto", budget: int = DEFAULT_MC, seed=0) -> ConditionReport:
    """E|c|^(nu/delta) < 1 and E|g|^(nu/delta) < inf, deciding E|y_0|^(2 nu) < inf."""
    if model.link.kind != "polynomial":
        raise ModelError("check_power_moment applies to polynomial links; use check_exp_moment")
    if not nu > 0:
        raise ValueError("nu must be positive")
    order = nu / model.link.delta
    c_m = moment_abs(model.c, order, model.innovation, name="c", method=method, budget=budget, seed=seed)
    g_m = moment_abs(model.g, order, model.innovation, name="g", method=method, budget=budget, seed=seed)
    eps_m = _exact("E|eps|^(2nu)", 2 * nu, model.innovation.abs_moment(2 * nu), "closed-form")
    verdict = _combine(c_m.below(1.0), HOLDS if g_m.finite else FAILS, HOLDS if eps_m.finite else FAILS)
    report = ConditionReport("EQ10", verdict, [c_m, g_m, eps_m], parameter=nu)
    report.converse = _nonneg_holds(model) and eps_m.finite
    if report.converse:
        report.notes.append("c, g >= 0: the condition is necessary and sufficient for E|y_0|^(2nu) < inf")
    return report


def check_exp_moment(model: ModelSpec, mu: float, method: str = "auto", budget: int = DEFAULT_MC, seed=0) -> ConditionReport:
    """|c| <= const < 1 a.s. and E exp(mu|g|) < inf (exponential link)."""
    if model.link.kind != "exponential":
        raise ModelError("check_exp_moment applies to the exponential link")
    if not mu > 0:
        raise ValueError("mu must be positive")
    innov = model.innovation
    lo, hi = support_extrema(model.c, innov)
    sup_abs = max(abs(lo), abs(hi))
    c_sup = _exact("ess sup |c(eps)|", None, sup_abs, "structural")
    g_exp = _exp_abs_moment(model.g, mu, innov, "g", method, budget, seed)
    eps_m = _exact("E|eps|^(2mu)", 2 * mu, innov.abs_moment(2 * mu), "closed-form")
    verdict = _combine(
        HOLDS if sup_abs < 1 else FAILS,
        HOLDS if g_exp.finite else FAILS,
        HOLDS if eps_m.finite else FAILS,
    )
    report = ConditionReport("EQ11", verdict, [c_sup, g_exp, eps_m], parameter=mu)
    nonneg = _nonneg_holds(model)
    report.converse = False
    if nonneg:
        p_le_one = sup_abs <= 1
        report.notes.append(f"EQ12 P(|c| <= 1) = 1: {'holds' if p_le_one else 'fails'}")
        if not p_le_one or not g_exp.finite:
            report.converse = True
            report.notes.append("c, g >= 0 and a necessary condition fails: E|y_0|^(2mu) = inf")
    return report


def check_log_moments(model: ModelSpec, mu: float, method: str = "auto", budget: int = DEFAULT_MC, seed=0) -> dict[str, ConditionReport]:
    """Which tail-bound regime the model satisfies at order mu.

    Returns ``{"EQ21": ...}`` and, for mu > 2, ``"EQ20"`` as well.
    """
    if not mu > 0:
        raise ValueError("mu must be positive")
    innov = model.innovation
    out = {}
    c_m = moment_abs(model.c, mu, innov, name="c", method=method, budget=budget, seed=seed)
    g_m = moment_abs(model.g, mu, innov, name="g", method=method, budget=budget, seed=seed)
    out["EQ21"] = ConditionReport("EQ21", _combine(c_m.below(1.0), HOLDS if g_m.finite else FAILS), [c_m, g_m], parameter=mu)
    if mu > 2:
        lc = _log_abs_moment(model.c, mu, innov, "c", method, budget, seed)
        lg = _log_plus_moment(model.g, mu, innov, "g", method, budget, seed)
        verdict = HOLDS if (lc.finite and lg.finite) else FAILS
        out["EQ20"] = ConditionReport("EQ20", verdict, [lc, lg], parameter=mu)
    return out


def check_sigma_inverse_moment(model: ModelSpec, theta: float, budget: int = 100_000, seed=0, method: str = "auto") -> ConditionReport:
    """E sigma_0^(-theta) < inf, via structural lower bounds or Monte Carlo."""
    if not theta > 0:
        raise ValueError("theta must be positive")
    innov = model.innovation
    evidence = []
    if model.link.kind == "polynomial":
        c_lo, _ = support_extrema(model.c, innov)
        g_lo, _ = support_extrema(model.g, innov)
        evidence.append(_exact("ess inf g(eps)", None, g_lo, "structural"))
        if c_lo >= 0 and g_lo > 0:
            bound = model.link.invert(g_lo)
            evidence.append(_exact("lower bound sigma_0^2", None, bound, "structural"))
            return ConditionReport("EQ27", HOLDS, evidence, theta=theta, notes=["sigma_0^2 >= Lambda^-1(ess inf g) > 0"])
    else:
        lo, hi = support_extrema(model.c, innov)
        sup_abs = max(abs(lo), abs(hi))
        g_exp = _exp_abs_moment(model.g, theta / 2, innov, "g", method, budget, seed)
        evidence += [_exact("ess sup |c(eps)|", None, sup_abs, "structural"), g_exp]
        if sup_abs < 1 and g_exp.finite:
            return ConditionReport("EQ27", HOLDS, evidence, theta=theta, notes=["|c| <= c < 1 and E exp(theta/2 |g|) < inf"])
    from augarch.simulate import stationary_draws

    seed_spec = seed if isinstance(seed, SeedSpec) else SeedSpec(int(seed), 0, "conditions/sigma-inverse")
    draws = stationary_draws(model, budget, seed=seed_spec)
    vals = np.power(draws.sigma2, -theta / 2)
    mean = float(np.mean(vals))
    half = _Z95 * float(np.std(vals, ddof=1)) / math.sqrt(vals.size)
    evidence.append(MomentEstimate("E sigma_0^-theta", theta, mean, mean - half, mean + half, f"monte-carlo({vals.size})"))
    return ConditionReport("EQ27", INCONCLUSIVE, evidence, theta=theta, notes=["no structural certificate; Monte Carlo estimate reported"])


def contraction_rate(model: ModelSpec, method: str = "auto", budget: int = DEFAULT_MC, seed=0) -> tuple[float, float]:
    """Per-step contraction of the truncated series tail.

    Returns ``(rate, mu)`` with ``rate = (E|c|^mu)^(1/mu)``, trying mu = 1
    first and then smaller orders.  Raises :class:`NoCertificateError` when no
    order gives a rate below one.
    """
    if model.c_is_zero:
        return 0.0, 1.0
    for mu in (1.0, 0.5, 0.25, 0.125):
        est = moment_abs(model.c, mu, model.innovation, name="c", method=method, budget=budget, seed=seed)
        if est.finite and est.ci_high < 1.0:
            return est.point ** (1.0 / mu), mu
    raise NoCertificateError("no moment order gives E|c|^mu < 1; pass an explicit truncation depth")


# ---------------------------------------------------------------------------
# Gates for transformed observations
# ---------------------------------------------------------------------------


def check_transform_moment(model: ModelSpec, f, power: float, method: str = "auto", budget: int = DEFAULT_MC, seed=0) -> list[ConditionReport]:
    """Reports certifying E|f(y_0)|^power < inf for f(x) = |x|^nu or sign(x)|x|^nu.

    Polynomial links need c, g >= 0 together with the power-moment
    criterion at order ``power * nu / 2``; the exponential link needs the
    exponential-moment criterion at an order strictly above that, as the
    limit theorems for that link require.
    """
    order = power * f.nu / 2.0
    if model.link.kind == "polynomial":
        return [check_nonnegativity(model), check_power_moment(model, order, method, budget, seed)]
    return [check_exp_moment(model, EXP_MARGIN * order, method, budget, seed)]


def gate(reports, purpose: str) -> str:
    """Refuse when any report fails; warn when any is inconclusive.

    Returns the combined verdict.
    """
    reports = list(reports)
    verdict = _combine(*(r.verdict for r in reports))
    if verdict == FAILS:
        failed = ", ".join(r.condition for r in reports if r.verdict == FAILS)
        raise PreconditionError(f"{purpose} refused: condition {failed} fails", reports)
    if verdict == INCONCLUSIVE:
        shaky = ", ".join(r.condition for r in reports if r.verdict == INCONCLUSIVE)
        warnings.warn(f"{purpose}: condition {shaky} is inconclusive; running anyway", RuntimeWarning, stacklevel=2)
    return verdict
