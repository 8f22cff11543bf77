"""
Augmented GARCH(1,1) model family.

The model is the triple (c, g, link) together with an i.i.d. innovation law:

    X_k = c(eps_{k-1}) X_{k-1} + g(eps_{k-1}),   X_k = link(sigma_k^2),
    y_k = sigma_k * eps_k.

Coefficient functions are expressed in a small serializable basis
(:class:`CoeffExpr`) with two extra shapes (:class:`PowerCoeff`,
:class:`ExpLinearCoeff`) needed by the power-GARCH and random-exponential
coefficient families.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy import integrate, special

from augarch.exceptions import DomainError, ModelError

__all__ = [
    "FAMILIES",
    "CoeffExpr",
    "ExpLinearCoeff",
    "InnovationDist",
    "LinkFunction",
    "ModelSpec",
    "PowerCoeff",
    "Transform",
    "coeff_from_dict",
    "describe_family",
    "eval_coeff",
    "link_apply",
    "link_invert",
    "make_builtin",
    "transform_apply",
]

SQRT3 = math.sqrt(3.0)


def _scalar_or_array(values, like):
    if np.ndim(like) == 0:
        return float(values)
    return values


# ---------------------------------------------------------------------------
# Innovations
# ---------------------------------------------------------------------------

_INNOVATION_KINDS = ("normal", "student-t", "uniform", "two-point", "centered-exponential")


@dataclass(frozen=True)
class InnovationDist:
    """Unit-variance innovation law.

    Parameters
    ----------
    kind : str
        One of ``normal``, ``student-t``, ``uniform`` (on +-sqrt(3)),
        ``two-point`` (+-1) or ``centered-exponential`` (Exp(1) - 1).
    df : float, optional
        Degrees of freedom for ``student-t``; must exceed 2 so that the
        variance can be normalized to one.
    """

    kind: str = "normal"
    df: float | None = None

    def __post_init__(self):
        if self.kind not in _INNOVATION_KINDS:
            raise ModelError(f"unknown innovation kind {self.kind!r}")
        if self.kind == "student-t":
            if self.df is None or not self.df > 2:
                raise ModelError("student-t innovations need df > 2 for unit variance")
        elif self.df is not None:
            raise ModelError(f"df is only meaningful for student-t, not {self.kind}")

    @property
    def scale(self) -> float:
        if self.kind == "student-t":
            return math.sqrt((self.df - 2.0) / self.df)
        return 1.0

    @property
    def support(self) -> tuple[float, float]:
        if self.kind == "uniform":
            return (-SQRT3, SQRT3)
        if self.kind == "two-point":
            return (-1.0, 1.0)
        if self.kind == "centered-exponential":
            return (-1.0, math.inf)
        return (-math.inf, math.inf)

    @property
    def atoms(self) -> tuple[float, ...] | None:
        """Support points of a discrete law, ``None`` for continuous laws."""
        return (-1.0, 1.0) if self.kind == "two-point" else None

    @property
    def symmetric(self) -> bool:
        return self.kind != "centered-exponential"

    @property
    def lipschitz_order(self) -> float | None:
        """Hoelder order of the distribution function H, ``None`` if discontinuous."""
        return None if self.kind == "two-point" else 1.0

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.kind == "normal":
            return rng.standard_normal(size)
        if self.kind == "student-t":
            return rng.standard_t(self.df, size) * self.scale
        if self.kind == "uniform":
            return rng.uniform(-SQRT3, SQRT3, size)
        if self.kind == "two-point":
            return rng.integers(0, 2, size).astype(np.float64) * 2.0 - 1.0
        return rng.standard_exponential(size) - 1.0

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "normal":
            out = special.ndtr(x)
        elif self.kind == "student-t":
            out = special.stdtr(self.df, x / self.scale)
        elif self.kind == "uniform":
            out = np.clip((x + SQRT3) / (2 * SQRT3), 0.0, 1.0)
        elif self.kind == "two-point":
            out = np.where(x < -1, 0.0, np.where(x < 1, 0.5, 1.0))
        else:
            out = np.where(x < -1, 0.0, -np.expm1(-(x + 1.0)))
        return _scalar_or_array(out, x)

    def pdf(self, x):
        """Density for continuous laws."""
        x = np.asarray(x, dtype=float)
        if self.kind == "normal":
            out = np.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)
        elif self.kind == "student-t":
            nu, s = self.df, self.scale
            logc = special.gammaln((nu + 1) / 2) - special.gammaln(nu / 2) - 0.5 * math.log(nu * math.pi)
            out = np.exp(logc - (nu + 1) / 2 * np.log1p((x / s) ** 2 / nu)) / s
        elif self.kind == "uniform":
            out = np.where(np.abs(x) <= SQRT3, 1.0 / (2 * SQRT3), 0.0)
        elif self.kind == "two-point":
            raise ModelError("two-point innovations have no density")
        else:
            out = np.where(x >= -1, np.exp(-(x + 1.0)), 0.0)
        return _scalar_or_array(out, x)

    def abs_moment_finite(self, p: float) -> bool:
        """Whether E|eps|^p is finite."""
        if self.kind == "student-t":
            return p < self.df
        return True

    def abs_moment(self, p: float) -> float:
        """E|eps|^p in closed form (``inf`` when it diverges)."""
        if p == 0:
            return 1.0
        if not self.abs_moment_finite(p):
            return math.inf
        if self.kind == "normal":
            return 2 ** (p / 2) * math.gamma((p + 1) / 2) / math.sqrt(math.pi)
        if self.kind == "student-t":
            nu = self.df
            log_m = (
                p / 2 * math.log(nu)
                + special.gammaln((p + 1) / 2)
                + special.gammaln((nu - p) / 2)
                - 0.5 * math.log(math.pi)
                - special.gammaln(nu / 2)
            )
            return math.exp(log_m) * self.scale**p
        if self.kind == "uniform":
            return SQRT3**p / (p + 1)
        if self.kind == "two-point":
            return 1.0
        return self.half_moment(p, +1, absolute=True) + self.half_moment(p, -1, absolute=True)

    def half_moment(self, p: float, side: int, absolute: bool = False) -> float:
        """E[eps^p 1{eps >= 0}] for ``side=+1`` or E[eps^p 1{eps < 0}] for ``side=-1``.

        With ``absolute`` the power is taken of |eps|; otherwise ``p`` must be
        an integer and the sign of eps^p is kept.
        """
        if not absolute and p != int(p):
            raise ValueError("signed half moments need an integer power")
        sign = 1.0 if (side > 0 or absolute or int(p) % 2 == 0) else -1.0
        if self.kind == "centered-exponential":
            if side > 0:
                return math.gamma(p + 1) / math.e
            val, _ = integrate.quad(lambda t: t**p * math.exp(t - 1.0), 0.0, 1.0, epsabs=1e-15, epsrel=1e-13)
            return sign * val
        if self.kind == "two-point":
            return sign * 0.5
        return sign * 0.5 * self.abs_moment(p)

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"kind": self.kind}
        if self.df is not None:
            out["df"] = self.df
        return out

    @classmethod
    def from_dict(cls, data: dict) -> InnovationDist:
        return cls(kind=data.get("kind", "normal"), df=data.get("df"))

    def describe(self) -> str:
        if self.kind == "student-t":
            return f"student-t(df={self.df:g}) scaled to unit variance"
        return self.kind


# ---------------------------------------------------------------------------
# Link functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LinkFunction:
    """Invertible map between sigma^2 and the recursion state X.

    ``polynomial`` is x -> x**delta on [0, inf); ``exponential`` is log.
    """

    kind: str = "polynomial"
    delta: float = 1.0

    def __post_init__(self):
        if self.kind not in ("polynomial", "exponential"):
            raise ModelError(f"unknown link kind {self.kind!r}")
        if self.kind == "polynomial" and not (self.delta > 0 and math.isfinite(self.delta)):
            raise ModelError(f"polynomial link needs delta > 0, got {self.delta!r}")

    @property
    def domain(self) -> tuple[float, float]:
        """Admissible interval D(X_0) for link values."""
        if self.kind == "polynomial":
            return (0.0, math.inf)
        return (-math.inf, math.inf)

    @property
    def _integer_inverse_power(self) -> int | None:
        inv = 1.0 / self.delta
        r = round(inv)
        return int(r) if abs(inv - r) < 1e-12 else None

    def apply(self, sigma2):
        s = np.asarray(sigma2, dtype=float)
        if self.kind == "polynomial":
            if np.any(s < 0):
                raise DomainError("polynomial link is defined on [0, inf)")
            out = s if self.delta == 1.0 else np.power(s, self.delta)
        else:
            if np.any(s <= 0):
                raise DomainError("exponential link is defined on (0, inf)")
            out = np.log(s)
        return _scalar_or_array(out, s)

    def invert(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "exponential":
            out = np.exp(x)
        elif self.delta == 1.0:
            out = x.copy() if x.ndim else x
        else:
            if np.any(x < 0):
                k = self._integer_inverse_power
                if k is None:
                    raise DomainError(
                        f"negative argument to polynomial link inverse with non-integer 1/delta={1 / self.delta:g}"
                    )
                out = np.power(x, k)
            else:
                out = np.power(x, 1.0 / self.delta)
        return _scalar_or_array(out, x)

    def to_dict(self) -> dict:
        if self.kind == "polynomial":
            return {"kind": "polynomial", "delta": self.delta}
        return {"kind": "exponential"}

    @classmethod
    def from_dict(cls, data: dict) -> LinkFunction:
        return cls(kind=data.get("kind", "polynomial"), delta=float(data.get("delta", 1.0)))

    def describe(self) -> str:
        if self.kind == "exponential":
            return "log(sigma^2)"
        return "sigma^2" if self.delta == 1.0 else f"sigma^(2*{self.delta:g})"


def link_apply(link: LinkFunction, sigma2):
    return link.apply(sigma2)


def link_invert(link: LinkFunction, x):
    return link.invert(x)


# ---------------------------------------------------------------------------
# Coefficient expressions
# ---------------------------------------------------------------------------


def _quad_extrema(coefs, lo, hi):
    """Min and max of a0 + a1 t + a2 t^2 on [lo, hi] (hi may be inf)."""
    a0, a1, a2 = coefs

    def f(t):
        return a0 + a1 * t + a2 * t * t

    pts = [lo]
    if math.isfinite(hi):
        pts.append(hi)
    if a2 != 0:
        v = -a1 / (2 * a2)
        if lo < v < hi:
            pts.append(v)
    vals = [f(t) for t in pts]
    vmin, vmax = min(vals), max(vals)
    if not math.isfinite(hi):
        lead = a2 if a2 != 0 else a1
        if lead > 0:
            vmax = math.inf
        elif lead < 0:
            vmin = -math.inf
    return vmin, vmax


@dataclass(frozen=True)
class CoeffExpr:
    """e(x) = k0 + k1 x + k2 x^2 + k3 |x| + k4 x^2 1{x<0}."""

    k0: float = 0.0
    k1: float = 0.0
    k2: float = 0.0
    k3: float = 0.0
    k4: float = 0.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = self.k0 + x * (self.k1 + self.k2 * x) if (self.k1 or self.k2) else np.full(x.shape, self.k0)
        if self.k3:
            out = out + self.k3 * np.abs(x)
        if self.k4:
            out = out + self.k4 * np.where(x < 0, x * x, 0.0)
        return _scalar_or_array(out, x)

    @property
    def kappas(self) -> tuple[float, float, float, float, float]:
        return (self.k0, self.k1, self.k2, self.k3, self.k4)

    @property
    def constant(self) -> float | None:
        if self.k1 == self.k2 == self.k3 == self.k4 == 0:
            return float(self.k0)
        return None

    def side_poly(self, side: int) -> tuple[float, float, float]:
        """Coefficients of e as a quadratic in t = |x| on one half-line."""
        if side > 0:
            return (self.k0, self.k1 + self.k3, self.k2)
        return (self.k0, self.k3 - self.k1, self.k2 + self.k4)

    def signed_poly(self, side: int) -> list[float]:
        """Coefficients of e as an ordinary polynomial in x on one half-line."""
        if side > 0:
            return [self.k0, self.k1 + self.k3, self.k2]
        return [self.k0, self.k1 - self.k3, self.k2 + self.k4]

    def extrema_on(self, lo: float, hi: float) -> tuple[float, float]:
        vals = []
        if hi >= 0:
            a, b = max(lo, 0.0), hi
            vals.append(_quad_extrema(self.side_poly(+1), a, b))
        if lo < 0:
            a, b = max(-hi, 0.0), -lo
            vals.append(_quad_extrema(self.side_poly(-1), a, b))
        return min(v[0] for v in vals), max(v[1] for v in vals)

    def tail(self, side: int) -> tuple[str, float, float]:
        a0, a1, a2 = self.side_poly(side)
        if a2 != 0:
            return ("poly", 2.0, abs(a2))
        if a1 != 0:
            return ("poly", 1.0, abs(a1))
        return ("const", 0.0, abs(a0))

    def log_tail(self, side: int) -> tuple[str, float, float]:
        return ("log", 0.0, 0.0)

    def vanishes_on_side(self, side: int) -> bool:
        return all(v == 0 for v in self.side_poly(side))

    def to_dict(self) -> dict:
        return {"type": "basis", "k0": self.k0, "k1": self.k1, "k2": self.k2, "k3": self.k3, "k4": self.k4}

    def describe(self, var: str = "x") -> str:
        terms = []
        for coef, name in zip(self.kappas, ("", var, f"{var}^2", f"|{var}|", f"{var}^2 1{{{var}<0}}")):
            if coef == 0:
                continue
            if not name:
                terms.append(f"{coef:g}")
            elif coef == 1:
                terms.append(name)
            else:
                terms.append(f"{coef:g}*{name}")
        return " + ".join(terms) if terms else "0"


@dataclass(frozen=True)
class PowerCoeff:
    """e(x) = a + b |x|^p, used by power GARCH with a non-integer power."""

    a: float
    b: float
    p: float

    def __post_init__(self):
        if not self.p > 0:
            raise ModelError("power coefficient needs p > 0")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = self.a + self.b * np.power(np.abs(x), self.p)
        return _scalar_or_array(out, x)

    @property
    def constant(self) -> float | None:
        return float(self.a) if self.b == 0 else None

    def extrema_on(self, lo: float, hi: float) -> tuple[float, float]:
        if self.b == 0:
            return self.a, self.a
        tmin = 0.0 if lo <= 0 <= hi else min(abs(lo), abs(hi))
        tmax = max(abs(lo), abs(hi))
        near = self.a + self.b * tmin**self.p
        far = self.a + self.b * tmax**self.p if math.isfinite(tmax) else math.copysign(math.inf, self.b)
        return min(near, far), max(near, far)

    def tail(self, side: int) -> tuple[str, float, float]:
        if self.b == 0:
            return ("const", 0.0, abs(self.a))
        return ("poly", self.p, abs(self.b))

    def log_tail(self, side: int) -> tuple[str, float, float]:
        return ("log", 0.0, 0.0)

    def vanishes_on_side(self, side: int) -> bool:
        return self.a == 0 and self.b == 0

    def to_dict(self) -> dict:
        return {"type": "power", "a": self.a, "b": self.b, "p": self.p}

    def describe(self, var: str = "x") -> str:
        return f"{self.a:g} + {self.b:g}*|{var}|^{self.p:g}"


@dataclass(frozen=True)
class ExpLinearCoeff:
    """e(x) = exp(slope * x - shift); strictly positive, log-linear in x."""

    slope: float
    shift: float

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar_or_array(np.exp(self.slope * x - self.shift), x)

    @property
    def constant(self) -> float | None:
        return math.exp(-self.shift) if self.slope == 0 else None

    def extrema_on(self, lo: float, hi: float) -> tuple[float, float]:
        ends = [self.slope * lo - self.shift, self.slope * hi - self.shift] if self.slope else [-self.shift] * 2
        ends = [math.exp(v) if v < 700 else math.inf for v in ends]
        return min(ends), max(ends)

    def tail(self, side: int) -> tuple[str, float, float]:
        rate = self.slope * side
        if rate > 0:
            return ("exp", rate, 1.0)
        return ("const", 0.0, 1.0)

    def log_tail(self, side: int) -> tuple[str, float, float]:
        if self.slope == 0:
            return ("log", 0.0, 0.0)
        return ("poly", 1.0, abs(self.slope))

    def vanishes_on_side(self, side: int) -> bool:
        return False

    def to_dict(self) -> dict:
        return {"type": "exp-linear", "slope": self.slope, "shift": self.shift}

    def describe(self, var: str = "x") -> str:
        return f"exp({self.slope:g}*{var} - {self.shift:g})"


def coeff_from_dict(data: dict):
    data = dict(data)
    kind = data.pop("type", "basis")
    try:
        if kind == "basis":
            return CoeffExpr(**{k: float(v) for k, v in data.items()})
        if kind == "power":
            return PowerCoeff(**{k: float(v) for k, v in data.items()})
        if kind == "exp-linear":
            return ExpLinearCoeff(**{k: float(v) for k, v in data.items()})
    except TypeError as exc:
        raise ModelError(f"bad coefficient fields for {kind!r}: {exc}") from None
    raise ModelError(f"unknown coefficient type {kind!r}")


def eval_coeff(expr, x):
    """Evaluate a coefficient expression at ``x`` (scalar or array)."""
    return expr(x)


# ---------------------------------------------------------------------------
# Transforms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Transform:
    """Observation transform f(x) = |x|^nu or sign(x) |x|^nu."""

    kind: str = "power-abs"
    nu: float = 1.0

    def __post_init__(self):
        if self.kind not in ("power-abs", "signed-power"):
            raise ModelError(f"unknown transform kind {self.kind!r}")
        if not self.nu > 0:
            raise ModelError("transform power nu must be positive")

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        a = np.abs(y)
        out = a if self.nu == 1.0 else (a * a if self.nu == 2.0 else np.power(a, self.nu))
        if self.kind == "signed-power":
            out = np.sign(y) * out
        return _scalar_or_array(out, y)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "nu": self.nu}

    @classmethod
    def from_dict(cls, data: dict) -> Transform:
        return cls(kind=data.get("kind", "power-abs"), nu=float(data.get("nu", 1.0)))

    def describe(self) -> str:
        if self.kind == "power-abs":
            return f"|x|^{self.nu:g}"
        return f"sign(x)|x|^{self.nu:g}"


def transform_apply(f: Transform, y):
    return f(y)


# ---------------------------------------------------------------------------
# Model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModelSpec:
    """An augmented GARCH(1,1) process.

    ``nonnegative`` declares condition c, g >= 0 a.s.; ``None`` means it has
    to be verified by :func:`augarch.conditions.check_nonnegativity`.
    """

    c: Any
    g: Any
    link: LinkFunction = field(default_factory=LinkFunction)
    innovation: InnovationDist = field(default_factory=InnovationDist)
    family: str = "custom"
    params: tuple = ()
    nonnegative: bool | None = None

    @property
    def param_dict(self) -> dict:
        return dict(self.params)

    @property
    def c_is_zero(self) -> bool:
        return self.c.constant == 0.0

    def with_innovation(self, innovation: InnovationDist) -> ModelSpec:
        return ModelSpec(self.c, self.g, self.link, innovation, self.family, self.params, self.nonnegative)

    def to_dict(self) -> dict:
        out: dict[str, Any] = {
            "c": self.c.to_dict(),
            "g": self.g.to_dict(),
            "link": self.link.to_dict(),
            "innovation": self.innovation.to_dict(),
            "family": self.family,
        }
        if self.params:
            out["params"] = dict(self.params)
        if self.nonnegative is not None:
            out["nonnegative"] = self.nonnegative
        return out

    @classmethod
    def from_dict(cls, data: dict) -> ModelSpec:
        return cls(
            c=coeff_from_dict(data["c"]),
            g=coeff_from_dict(data["g"]),
            link=LinkFunction.from_dict(data.get("link", {})),
            innovation=InnovationDist.from_dict(data.get("innovation", {})),
            family=data.get("family", "custom"),
            params=tuple(sorted(data.get("params", {}).items())),
            nonnegative=data.get("nonnegative"),
        )

    def describe(self) -> str:
        lines = [
            f"family: {self.family}",
            f"c(x) = {self.c.describe()}",
            f"g(x) = {self.g.describe()}",
            f"link: Lambda(sigma^2) = {self.link.describe()}",
            f"innovation: {self.innovation.describe()}",
        ]
        return "\n".join(lines)


def _require(params: dict, names: tuple[str, ...], family: str) -> list[float]:
    missing = [n for n in names if n not in params]
    if missing:
        raise ModelError(f"{family} needs parameters {', '.join(missing)}")
    extra = set(params) - set(names)
    if extra:
        raise ModelError(f"{family} got unknown parameters {', '.join(sorted(extra))}")
    return [float(params[n]) for n in names]


def _positive(name: str, value: float):
    if not value > 0:
        raise ModelError(f"{name} must be > 0, got {value!r}")


def _nonneg(name: str, value: float):
    if not value >= 0:
        raise ModelError(f"{name} must be >= 0, got {value!r}")


def _garch(p):
    omega, alpha, beta = _require(p, ("omega", "alpha", "beta"), "garch")
    _positive("omega", omega)
    _nonneg("alpha", alpha)
    _nonneg("beta", beta)
    return CoeffExpr(k0=beta, k2=alpha), CoeffExpr(k0=omega), LinkFunction("polynomial", 1.0), True


def _igarch(p):
    omega, alpha = _require(p, ("omega", "alpha"), "igarch")
    _positive("omega", omega)
    if not 0 < alpha <= 1:
        raise ModelError("igarch needs 0 < alpha <= 1")
    return CoeffExpr(k0=1.0 - alpha, k2=alpha), CoeffExpr(k0=omega), LinkFunction("polynomial", 1.0), True


def _gjr(p):
    omega, alpha, alpha_neg, beta = _require(p, ("omega", "alpha", "alpha_neg", "beta"), "gjr")
    _positive("omega", omega)
    _nonneg("alpha", alpha)
    _nonneg("beta", beta)
    _nonneg("alpha + alpha_neg", alpha + alpha_neg)
    return CoeffExpr(k0=beta, k2=alpha, k4=alpha_neg), CoeffExpr(k0=omega), LinkFunction("polynomial", 1.0), True


def _power_garch(p):
    omega, alpha, beta, delta = _require(p, ("omega", "alpha", "beta", "delta"), "power-garch")
    _positive("omega", omega)
    _positive("delta", delta)
    _nonneg("alpha", alpha)
    _nonneg("beta", beta)
    if delta == 1.0:
        c = CoeffExpr(k0=beta, k2=alpha)
    elif delta == 0.5:
        c = CoeffExpr(k0=beta, k3=alpha)
    else:
        c = PowerCoeff(beta, alpha, 2.0 * delta)
    return c, CoeffExpr(k0=omega), LinkFunction("polynomial", delta), True


def _egarch(p):
    omega, beta, alpha, gamma = _require(p, ("omega", "beta", "alpha", "gamma"), "egarch")
    return CoeffExpr(k0=beta), CoeffExpr(k0=omega, k1=gamma, k3=alpha), LinkFunction("exponential"), None


def _iid(p):
    _require(p, (), "iid")
    return CoeffExpr(), CoeffExpr(k0=1.0), LinkFunction("polynomial", 1.0), True


def _constant(p):
    c0, g0, delta = _require(p, ("c", "g", "delta"), "constant")
    _positive("delta", delta)
    return CoeffExpr(k0=c0), CoeffExpr(k0=g0), LinkFunction("polynomial", delta), (c0 >= 0 and g0 >= 0)


def _exp_c(p):
    slope, shift, omega = _require(p, ("slope", "shift", "omega"), "exp-c")
    _positive("omega", omega)
    return ExpLinearCoeff(slope, shift), CoeffExpr(k0=omega), LinkFunction("polynomial", 1.0), True


_BUILDERS = {
    "garch": (_garch, "normal"),
    "igarch": (_igarch, "normal"),
    "gjr": (_gjr, "normal"),
    "threshold": (_gjr, "normal"),
    "power-garch": (_power_garch, "normal"),
    "egarch": (_egarch, "normal"),
    "iid": (_iid, "normal"),
    "constant": (_constant, "normal"),
    "exp-c": (_exp_c, "student-t"),
}

FAMILIES = tuple(_BUILDERS)

_DESCRIPTIONS = {
    "garch": (
        "sigma_k^2 = omega + alpha y_{k-1}^2 + beta sigma_{k-1}^2",
        "c(x) = beta + alpha*x^2, g(x) = omega, Lambda(s) = s",
        "stationarity E log(beta + alpha eps^2) < 0; E y^2 < inf iff alpha + beta < 1 (EQ10, nu=1); "
        "E y^4 < inf iff E c^2 < 1 (EQ10, nu=2)",
    ),
    "igarch": (
        "garch with alpha + beta = 1",
        "c(x) = (1 - alpha) + alpha*x^2, g(x) = omega, Lambda(s) = s",
        "strictly stationary (E log c < 0) but E y^2 = inf: EQ10 with nu=1 fails, log-moment results (EQ20) apply",
    ),
    "gjr": (
        "sigma_k^2 = omega + (alpha + alpha_neg 1{y<0}) y_{k-1}^2 + beta sigma_{k-1}^2",
        "c(x) = beta + alpha*x^2 + alpha_neg*x^2 1{x<0}, g(x) = omega, Lambda(s) = s",
        "EQ5 and EQ10 as for garch with E c = beta + alpha + alpha_neg E[eps^2 1{eps<0}]",
    ),
    "power-garch": (
        "sigma_k^(2 delta) = omega + alpha |y_{k-1}|^(2 delta) + beta sigma_{k-1}^(2 delta)",
        "c(x) = beta + alpha*|x|^(2 delta), g(x) = omega, Lambda(s) = s^delta",
        "EQ10 with exponent nu/delta",
    ),
    "egarch": (
        "log sigma_k^2 = omega + beta log sigma_{k-1}^2 + alpha |eps_{k-1}| + gamma eps_{k-1}",
        "c(x) = beta, g(x) = omega + alpha*|x| + gamma*x, Lambda = log",
        "EQ11 (|c| <= c < 1 and E exp(mu |g|) < inf); EQ27 via E exp(theta/2 |g|) < inf",
    ),
    "iid": ("sigma_k^2 = 1", "c(x) = 0, g(x) = 1, Lambda(s) = s", "all conditions hold; coupling is exact for m >= 1"),
    "constant": (
        "deterministic coefficients",
        "c(x) = c, g(x) = g, Lambda(s) = s^delta",
        "stationary iff |c| < 1",
    ),
    "exp-c": (
        "random coefficient c = exp(slope eps - shift)",
        "c(x) = exp(slope*x - shift), g(x) = omega, Lambda(s) = s",
        "with student-t innovations E c^mu = inf for every mu > 0 (EQ21 fails) while EQ20 holds for mu < df",
    ),
}


def make_builtin(family: str, params: dict | None = None, innovation: InnovationDist | dict | None = None) -> ModelSpec:
    """Build a named model family.

    Parameters
    ----------
    family : str
        One of :data:`FAMILIES`.
    params : dict
        Family parameters, e.g. ``{"omega": 0.1, "alpha": 0.1, "beta": 0.8}``
        for ``garch``.
    innovation : InnovationDist or dict, optional
        Defaults to standard normal (student-t with 5 df for ``exp-c``).
    """
    if family not in _BUILDERS:
        raise ModelError(f"unknown family {family!r}; known: {', '.join(FAMILIES)}")
    builder, default_innov = _BUILDERS[family]
    params = dict(params or {})
    c, g, link, nonneg = builder(params)
    if innovation is None:
        innovation = InnovationDist("student-t", 5.0) if default_innov == "student-t" else InnovationDist()
    elif isinstance(innovation, dict):
        innovation = InnovationDist.from_dict(innovation)
    return ModelSpec(
        c=c,
        g=g,
        link=link,
        innovation=innovation,
        family=family,
        params=tuple(sorted((k, float(v)) for k, v in params.items())),
        nonnegative=nonneg,
    )


def describe_family(family: str) -> str:
    """Human-readable (c, g, Lambda) mapping of a family and its binding conditions."""
    if family not in _DESCRIPTIONS:
        raise ModelError(f"unknown family {family!r}; known: {', '.join(FAMILIES)}")
    recursion, mapping, conds = _DESCRIPTIONS[family]
    return f"{family}\n  recursion: {recursion}\n  mapping:   {mapping}\n  conditions: {conds}"
