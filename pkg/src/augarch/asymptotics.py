"""
Limit functionals of transformed observations and Monte Carlo checks.

Partial-sum processes, long-run variance, the finite-n variance curve
beta_n^2, Berry-Esseen curves, the sequential empirical process of the
probability integral transforms and its covariance kernel, and
Kolmogorov-Smirnov checks of replicate samples against the Gaussian limits.

Centering means and marginal distribution functions always come from
calibration streams that are independent of the evaluated paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from augarch.conditions import (
    ConditionReport,
    MomentEstimate,
    check_log_moments,
    check_sigma_inverse_moment,
    check_stationarity,
    check_transform_moment,
    contraction_rate,
    expect,
    gate,
    moment_abs,
)
from augarch.dependence import AutocovarianceTable, DecayFit, _LagAccumulator, _table
from augarch.exceptions import NoCertificateError
from augarch.model import ModelSpec, Transform
from augarch.seeding import SeedSpec, as_seed, run_blocks
from augarch.simulate import Path, default_depth, stationary_draws, stream_paths
from augarch.stats import ks_critical, ks_pvalue, ks_statistic, normal_cdf, spearman, sup_w_cdf

__all__ = [
    "BerryEsseenCurve",
    "Calibration",
    "CdfEstimate",
    "ChangePointPower",
    "CovarianceKernel",
    "DistributionalTest",
    "EmpiricalProcessSurface",
    "ExactCdf",
    "LongRunVariance",
    "PartialSumProcess",
    "VarianceCheck",
    "VarianceCurve",
    "berry_esseen_curve",
    "beta_n_check",
    "beta_n_squared",
    "calibrate",
    "change_point_power",
    "change_point_sample",
    "change_point_statistic",
    "empirical_clt_check",
    "empirical_clt_route",
    "empirical_process_surface",
    "estimate_cdf",
    "exact_cdf",
    "fclt_marginal_check",
    "fclt_sup_check",
    "gamma_kernel",
    "ks_statistic",
    "lag_window",
    "long_run_variance",
    "long_run_variance_from_table",
    "normal_cdf",
    "partial_sum_process",
    "sup_w_cdf",
]

KS_LEVEL = 0.01
KS_SLACK = 0.009
LAG_TOL = 1e-3
CALIBRATION_SIZE = 10_000_000
CDF_SIZE = 1_000_000
CLT_ORDER = 11.0
REP_BLOCK = 1000
BE_BLOCK = 5000
CP_BLOCK = 250
_GRID_EPS = 1e-9


def _index(n: int, t) -> np.ndarray:
    """floor(n t) with a guard against representation error in t."""
    return np.floor(n * np.asarray(t, dtype=float) + _GRID_EPS).astype(int)


def _values(source, f: Transform | None, variant: str) -> np.ndarray:
    if variant not in ("observation", "volatility"):
        raise ValueError(f"unknown variant {variant!r}")
    if isinstance(source, Path):
        raw = source.y if variant == "observation" else np.sqrt(source.sigma2)
    else:
        raw = np.asarray(source, dtype=float)
    return raw if f is None else f(raw)


# ---------------------------------------------------------------------------
# Partial sums
# ---------------------------------------------------------------------------


@dataclass
class PartialSumProcess:
    """``S_n(t) = n^(-1/2) sum_{i <= n t} (f(x_i) - mean)`` on a grid of t."""

    t: np.ndarray
    values: np.ndarray
    n: int
    variant: str
    mean: float

    def rows(self):
        return [(float(a), float(b)) for a, b in zip(self.t, self.values)]


def partial_sum_process(source, f: Transform | None, *, mean: float, grid=None, variant: str = "observation") -> PartialSumProcess:
    """Partial-sum process of ``f(y_i)`` (``observation``) or ``f(sigma_i)`` (``volatility``).

    ``source`` is a :class:`~augarch.simulate.Path` or an array of raw
    values (``y`` or ``sigma``).  ``mean`` must come from an analytic value
    or an independent calibration run.  The default grid is ``k/n``,
    ``k = 0..n``.
    """
    v = _values(source, f, variant) - float(mean)
    n = v.size
    cs = np.concatenate([[0.0], np.cumsum(v)])
    t = np.arange(n + 1) / n if grid is None else np.asarray(grid, dtype=float)
    if np.any(t < 0) or np.any(t > 1) or np.any(np.diff(t) <= 0):
        raise ValueError("grid must be increasing in [0, 1]")
    return PartialSumProcess(t, cs[_index(n, t)] / math.sqrt(n), n, variant, float(mean))


# ---------------------------------------------------------------------------
# Calibration: centering mean and autocovariances from one long path
# ---------------------------------------------------------------------------


@dataclass
class Calibration:
    """Centering mean and autocovariance table from an independent long path.

    ``method`` is ``analytic`` (mean known exactly), ``control-variate``
    (conditional expectation given sigma, corrected with the recursion
    state whose mean is known) or ``conditional`` (conditional expectation
    only).
    """

    mean: float
    mean_se: float
    method: str
    table: AutocovarianceTable
    size: int
    variant: str

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "mean_se": self.mean_se,
            "method": self.method,
            "size": self.size,
            "variant": self.variant,
            "max_lag": int(self.table.lags[-1]),
        }


def _precise(est: MomentEstimate) -> bool:
    return est.finite and (est.ci_high - est.ci_low) <= 1e-9 * max(1.0, abs(est.point))


def _state_mean(model: ModelSpec) -> float | None:
    """E Lambda(sigma_0^2) = E g / (1 - E c) when E|c| < 1 and both means are exact."""
    innov = model.innovation
    if model.c_is_zero:
        eg = expect(model.g, innov, quantity="E g")
        return eg.point if _precise(eg) else None
    ac = moment_abs(model.c, 1.0, innov, name="c")
    if not (ac.finite and ac.ci_high < 1.0):
        return None
    ec = expect(model.c, innov, quantity="E c")
    eg = expect(model.g, innov, quantity="E g")
    if not (_precise(ec) and _precise(eg)):
        return None
    return eg.point / (1.0 - ec.point)


def _conditional_factor(f: Transform, model: ModelSpec, variant: str) -> float | None:
    """kappa with E[f(y_k) | sigma_k] = kappa sigma_k^nu (1 for the volatility variant)."""
    if variant == "volatility":
        return 1.0
    innov = model.innovation
    if f.kind == "power-abs":
        return innov.abs_moment(f.nu)
    if innov.symmetric:
        return 0.0
    return innov.half_moment(f.nu, +1, absolute=True) - innov.half_moment(f.nu, -1, absolute=True)


class _CalibrationAccumulator:
    def __init__(self, f, max_lag, kappa, variant, link):
        self.f, self.kappa, self.variant, self.link = f, kappa, variant, link
        self.acc = _LagAccumulator(max_lag)
        self.r_means, self.x_means = [], []
        self.rx, self.xx, self.count = 0.0, 0.0, 0
        self.r_shift = self.x_shift = None

    def __call__(self, k0, eps, sigma2, y):
        s2 = sigma2.ravel()
        v = self.f(y.ravel()) if self.variant == "observation" else self.f(np.sqrt(s2))
        self.acc.add(v)
        r = self.kappa * np.power(s2, self.f.nu / 2.0)
        x = self.link.apply(s2)
        if self.x_shift is None:
            self.r_shift, self.x_shift = float(np.mean(r)), float(np.mean(x))
        xc = x - self.x_shift
        self.r_means.append(float(np.mean(r)))
        self.x_means.append(float(np.mean(x)))
        self.rx += float(np.dot(r - self.r_shift, xc))
        self.xx += float(np.dot(xc, xc))
        self.count += s2.size

    def slope(self) -> float:
        """Least-squares coefficient of r on x over the whole path."""
        dr = np.mean(self.r_means) - self.r_shift
        dx = np.mean(self.x_means) - self.x_shift
        var = self.xx / self.count - dx * dx
        return (self.rx / self.count - dr * dx) / var if var > 0 else 0.0


def lag_window(model: ModelSpec | None = None, decay: DecayFit | None = None, tol: float = LAG_TOL) -> int | None:
    """Lag truncation ``ceil(log tol / log rate)``.

    The rate is taken from ``decay`` when given, otherwise from the
    contraction rate of the model.  ``None`` when no rate below one is
    available.
    """
    if decay is not None:
        rate = decay.rate
    else:
        try:
            rate, _ = contraction_rate(model)
        except NoCertificateError:
            return None
    if not math.isfinite(rate) or rate >= 1.0:
        return None
    if rate <= 0.0:
        return 0
    return max(0, math.ceil(math.log(tol) / math.log(rate)))


def calibrate(
    model: ModelSpec,
    f: Transform,
    size: int = CALIBRATION_SIZE,
    seed=0,
    max_lag: int | None = None,
    variant: str = "observation",
    batches: int = 20,
    depth: int | None = None,
    decay: DecayFit | None = None,
) -> Calibration:
    """Mean and autocovariances of ``f`` from one long independent path.

    The mean uses ``E[f(y_k) | sigma_k] = kappa sigma_k^nu`` and, when
    ``E Lambda(sigma_0^2)`` is known exactly, the recursion state as a
    control variate.  Its standard error comes from the spread of batch
    estimates.
    """
    if variant not in ("observation", "volatility"):
        raise ValueError(f"unknown variant {variant!r}")
    if max_lag is None:
        L = lag_window(model, decay)
        max_lag = L if L is not None else math.ceil(size ** (1.0 / 3.0))
    seed = as_seed(seed).child("calibration")
    M = default_depth(model) if depth is None else int(depth)
    kappa = _conditional_factor(f, model, variant)
    cal = _CalibrationAccumulator(f, int(max_lag), kappa, variant, model.link)
    chunk = -(-int(size) // batches)
    stream_paths(model, chunk * batches, 1, seed.generator(), cal, M, chunk=chunk)
    table = _table(cal.acc)
    r_b, x_b = np.array(cal.r_means), np.array(cal.x_means)
    if variant == "observation" and f.kind == "signed-power" and model.innovation.symmetric:
        mean, se, method = 0.0, 0.0, "analytic"
    else:
        ex = _state_mean(model)
        if ex is not None and cal.xx > 0:
            b = cal.slope()
            est = r_b - b * (x_b - ex)
            method = "control-variate"
        else:
            est = r_b
            method = "conditional"
        mean = float(np.mean(est))
        se = float(np.std(est, ddof=1) / math.sqrt(est.size))
    return Calibration(mean, se, method, table, cal.count, variant)


# ---------------------------------------------------------------------------
# Long-run variance and the finite-n variance curve
# ---------------------------------------------------------------------------


@dataclass
class LongRunVariance:
    """``tau^2 = gamma(0) + 2 sum_{1 <= k <= L} w_k gamma(k)``."""

    tau2: float
    L: int
    gamma: np.ndarray
    method: str
    se: float
    flagged: bool = False
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"tau2": self.tau2, "L": self.L, "method": self.method, "se": self.se, "flagged": self.flagged, "notes": list(self.notes)}


def _bartlett(L: int) -> np.ndarray:
    k = np.arange(L + 1)
    return np.where(k == 0, 1.0, 2.0 * (1.0 - k / (L + 1.0)))


def long_run_variance_from_table(table: AutocovarianceTable, L: int | None = None, method: str = "plug-in") -> LongRunVariance:
    """Truncated plug-in (or Bartlett) long-run variance from an autocovariance table.

    A negative plug-in value falls back to the Bartlett taper and is flagged.
    """
    Lmax = int(table.lags[-1])
    L = Lmax if L is None else int(L)
    if not 0 <= L <= Lmax:
        raise ValueError(f"lag window {L} outside the table (max lag {Lmax})")
    gamma = table.gamma[: L + 1]
    notes, flagged = [], False
    if method == "plug-in":
        w = np.where(np.arange(L + 1) == 0, 1.0, 2.0)
        tau2 = float(w @ gamma)
        if tau2 < 0:
            method, flagged = "bartlett", True
            notes.append("plug-in estimate negative; Bartlett taper used")
    elif method != "bartlett":
        raise ValueError(f"unknown method {method!r}")
    if method == "bartlett":
        w = _bartlett(L)
        tau2 = float(w @ gamma)
    full = np.zeros(Lmax + 1)
    full[: L + 1] = w
    return LongRunVariance(max(tau2, 0.0), L, gamma.copy(), method, table.functional_se(full), flagged, notes)


def long_run_variance(
    model: ModelSpec,
    f: Transform,
    L: int | None = None,
    budget: int = CALIBRATION_SIZE,
    seed=0,
    method: str = "plug-in",
    decay: DecayFit | None = None,
    variant: str = "observation",
) -> LongRunVariance:
    """Long-run variance of ``f(y_k)`` after certifying ``E f(y_0)^2 < inf``.

    Without a lag window from a decay rate, the Bartlett taper with
    ``L = ceil(budget^(1/3))`` is used and flagged.
    """
    gate(check_transform_moment(model, f, 2.0), "long-run variance")
    notes = []
    if L is None:
        L = lag_window(model, decay)
        if L is None:
            L = math.ceil(budget ** (1.0 / 3.0))
            method = "bartlett"
            notes.append("no geometric rate available; Bartlett window from the sample size")
    cal = calibrate(model, f, budget, seed, max_lag=L, variant=variant)
    out = long_run_variance_from_table(cal.table, L, method)
    out.notes = notes + out.notes
    out.flagged = out.flagged or bool(notes)
    return out


@dataclass
class VarianceCurve:
    """``beta_n^2 = gamma(0) + 2 sum_{j=1}^{n-1} (1 - j/n) gamma(j)`` over a grid of n.

    Autocovariances beyond the table's last lag are taken as zero.
    """

    n: np.ndarray
    beta_n2: np.ndarray
    se: np.ndarray
    B_n: np.ndarray
    limit: float
    limit_se: float
    diff_se: np.ndarray

    def within_limit_band(self, k: float = 5.0) -> np.ndarray:
        """``|beta_n^2 - tau^2| <= k`` standard errors of the limit estimate."""
        return np.abs(self.beta_n2 - self.limit) <= k * max(self.limit_se, 1e-300)

    def rows(self):
        return [(int(a), float(b), float(c), float(d)) for a, b, c, d in zip(self.n, self.beta_n2, self.se, self.B_n)]


def _beta_weights(n: int, L: int) -> np.ndarray:
    j = np.arange(L + 1, dtype=float)
    w = np.where(j == 0, 1.0, 2.0 * (1.0 - j / n))
    w[j >= n] = 0.0
    return w


def beta_n_squared(table: AutocovarianceTable, n_grid) -> VarianceCurve:
    """Exact evaluation of the finite-n variance formula for every n in ``n_grid``."""
    n_grid = np.asarray(n_grid, dtype=int)
    if np.any(n_grid < 1):
        raise ValueError("n must be >= 1")
    L = int(table.lags[-1])
    lim_w = np.where(np.arange(L + 1) == 0, 1.0, 2.0)
    vals, ses, dses = [], [], []
    for n in n_grid:
        w = _beta_weights(int(n), L)
        vals.append(float(w @ table.gamma))
        ses.append(table.functional_se(w))
        dses.append(table.functional_se(w - lim_w))
    vals = np.array(vals)
    return VarianceCurve(
        n_grid, vals, np.array(ses), np.sqrt(n_grid * np.maximum(vals, 0.0)),
        float(lim_w @ table.gamma), table.functional_se(lim_w), np.array(dses),
    )


# ---------------------------------------------------------------------------
# Replicate engines
# ---------------------------------------------------------------------------


class _SumTracker:
    """Running centered sums and running maxima at checkpoints."""

    def __init__(self, f, mean, checkpoints, variant, reps):
        self.f, self.mean, self.variant = f, mean, variant
        self.checkpoints = sorted(int(c) for c in checkpoints)
        self.s = np.zeros(reps)
        self.smax = np.zeros(reps)
        self.at = {}

    def __call__(self, k0, eps, sigma2, y):
        raw = y if self.variant == "observation" else np.sqrt(sigma2)
        cs = np.cumsum(self.f(raw) - self.mean, axis=0)
        cs += self.s
        run = np.maximum(np.maximum.accumulate(cs, axis=0), self.smax)
        last = k0 + cs.shape[0] - 1
        for n in self.checkpoints:
            if k0 <= n <= last:
                self.at[n] = (cs[n - k0].copy(), run[n - k0].copy())
        self.s = cs[-1].copy()
        self.smax = run[-1].copy()


def _sum_block(model, f, mean, checkpoints, variant, depth, change, gen, size):
    tr = _SumTracker(f, mean, checkpoints, variant, size)
    stream_paths(model, max(checkpoints), size, gen, tr, depth, change)
    return np.stack([np.stack(tr.at[n]) for n in tr.checkpoints])


def _replicate_sums(model, f, mean, checkpoints, reps, seed, variant, depth, workers, block, purpose):
    checkpoints = sorted(int(c) for c in checkpoints)
    M = default_depth(model) if depth is None else int(depth)
    task = partial(_sum_block, model, f, float(mean), tuple(checkpoints), variant, M, None)
    parts = run_blocks(task, reps, as_seed(seed).child(purpose), block, workers)
    out = np.concatenate(parts, axis=2)  # (checkpoint, sum|max, rep)
    return {n: (out[i, 0] / math.sqrt(n), out[i, 1] / math.sqrt(n)) for i, n in enumerate(checkpoints)}


# ---------------------------------------------------------------------------
# Distributional checks
# ---------------------------------------------------------------------------


@dataclass
class DistributionalTest:
    """One-sample KS comparison of a replicate sample with a reference law."""

    reference: str
    size: int
    statistic: float
    p_value: float
    threshold: float
    n: int
    label: str = "certified"
    parameters: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    kind: str = "ks"

    @property
    def passed(self) -> bool:
        return self.statistic < self.threshold

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "reference": self.reference,
            "size": self.size,
            "n": self.n,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "threshold": self.threshold,
            "verdict": "pass" if self.passed else "fail",
            "label": self.label,
            "parameters": dict(self.parameters),
            "notes": list(self.notes),
        }


def _ks_test(sample, cdf, reference, n, level, slack, **kw) -> DistributionalTest:
    d = ks_statistic(sample, cdf)
    size = int(np.size(sample))
    return DistributionalTest(reference, size, d, ks_pvalue(d, size), ks_critical(size, level) + slack, n, **kw)


def _fclt_inputs(model, f, tau2, mean, calibration, calibration_size, seed, variant):
    if tau2 is not None and not tau2 > 0:
        raise ValueError("tau2 must be positive")
    verdict = gate(check_transform_moment(model, f, 2.0), "functional CLT check")
    if calibration is None and (tau2 is None or mean is None):
        calibration = calibrate(model, f, calibration_size, seed, variant=variant)
    if mean is None:
        mean = calibration.mean
    if tau2 is None:
        tau2 = long_run_variance_from_table(calibration.table).tau2
        if not tau2 > 0:
            raise ValueError("estimated tau2 is not positive")
    return float(tau2), float(mean), verdict


def _fclt_run(model, f, n, reps, tau2, seed, mean, calibration, workers, variant, calibration_size, depth):
    tau2, mean, verdict = _fclt_inputs(model, f, tau2, mean, calibration, calibration_size, seed, variant)
    sums = _replicate_sums(model, f, mean, [n], reps, seed, variant, depth, workers, REP_BLOCK, "clt")
    s1, smax = sums[int(n)]
    tau = math.sqrt(tau2)
    params = {"tau2": tau2, "mean": mean, "precondition": verdict, "variant": variant}
    return s1 / tau, smax / tau, params


def fclt_marginal_check(
    model: ModelSpec,
    f: Transform,
    n: int,
    reps: int,
    tau2: float | None = None,
    seed=0,
    mean: float | None = None,
    calibration: Calibration | None = None,
    workers: int | None = None,
    level: float = KS_LEVEL,
    slack: float = KS_SLACK,
    variant: str = "observation",
    calibration_size: int = CALIBRATION_SIZE,
    depth: int | None = None,
) -> DistributionalTest:
    """KS distance of the replicate sample ``S_n(1) / tau`` to the standard normal.

    Refuses (``PreconditionError``) when ``E f(y_0)^2 < inf`` cannot hold.
    Missing ``tau2`` or ``mean`` come from an independent calibration path.
    """
    z, _, params = _fclt_run(model, f, n, reps, tau2, seed, mean, calibration, workers, variant, calibration_size, depth)
    return _ks_test(z, normal_cdf, "standard normal", n, level, slack, parameters=params)


def fclt_sup_check(
    model: ModelSpec,
    f: Transform,
    n: int,
    reps: int,
    tau2: float | None = None,
    seed=0,
    mean: float | None = None,
    calibration: Calibration | None = None,
    workers: int | None = None,
    level: float = KS_LEVEL,
    slack: float = KS_SLACK,
    variant: str = "observation",
    calibration_size: int = CALIBRATION_SIZE,
    depth: int | None = None,
) -> DistributionalTest:
    """KS distance of ``sup_t S_n(t) / tau`` to the law ``2 Phi(x) - 1`` of sup W."""
    _, z, params = _fclt_run(model, f, n, reps, tau2, seed, mean, calibration, workers, variant, calibration_size, depth)
    return _ks_test(z, sup_w_cdf, "sup of Brownian motion", n, level, slack, parameters=params)


# ---------------------------------------------------------------------------
# beta_n^2 against replicate variances
# ---------------------------------------------------------------------------


@dataclass
class VarianceCheck:
    """``beta_n^2`` from autocovariances against the replicate variance of ``S_n(1)``."""

    n: int
    beta_n2: float
    beta_se: float
    mc_var: float
    mc_se: float
    z: float
    curve: VarianceCurve

    @property
    def combined_se(self) -> float:
        return math.hypot(self.beta_se, self.mc_se)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "beta_n2": self.beta_n2,
            "beta_se": self.beta_se,
            "mc_var": self.mc_var,
            "mc_se": self.mc_se,
            "z": self.z,
            "tau2": self.curve.limit,
            "tau2_se": self.curve.limit_se,
        }


def beta_n_check(
    model: ModelSpec,
    f: Transform,
    n: int,
    reps: int,
    seed=0,
    calibration: Calibration | None = None,
    n_grid=None,
    workers: int | None = None,
    calibration_size: int = CALIBRATION_SIZE,
    depth: int | None = None,
) -> VarianceCheck:
    """Compare ``beta_n^2`` with the variance of ``S_n(1)`` over ``reps`` replicates.

    The replicate variance uses the known centering mean (no degrees of
    freedom lost); its standard error is ``sqrt((m4 - v^2) / reps)``.
    """
    gate(check_transform_moment(model, f, 2.0), "variance check")
    if calibration is None:
        calibration = calibrate(model, f, calibration_size, seed)
    grid = np.unique(np.concatenate([[n], [] if n_grid is None else np.asarray(n_grid)])).astype(int)
    curve = beta_n_squared(calibration.table, grid)
    i = int(np.searchsorted(grid, n))
    sums = _replicate_sums(model, f, calibration.mean, [n], reps, seed, "observation", depth, workers, REP_BLOCK, "variance")
    s = sums[int(n)][0]
    v = float(np.mean(s * s))
    m4 = float(np.mean(s**4))
    mc_se = math.sqrt(max(m4 - v * v, 0.0) / s.size)
    b, bse = float(curve.beta_n2[i]), float(curve.se[i])
    return VarianceCheck(int(n), b, bse, v, mc_se, (b - v) / math.hypot(bse, mc_se), curve)


# ---------------------------------------------------------------------------
# Berry-Esseen curves
# ---------------------------------------------------------------------------


@dataclass
class BerryEsseenCurve:
    """``Delta_n = sup_x |P(S_n < x B_n) - Phi(x)|`` estimated from replicates.

    Bands are ``Delta_n -+ q`` where ``q`` is the 95% exact KS quantile for
    the replicate count, since the empirical CDF is within ``q`` of the true
    one with that probability.
    """

    n: np.ndarray
    delta: np.ndarray
    low: np.ndarray
    high: np.ndarray
    B_n: np.ndarray
    reps: int
    mean: float
    notes: list[str] = field(default_factory=list)

    @property
    def normalized(self) -> np.ndarray:
        n = self.n.astype(float)
        return self.delta * np.sqrt(n) / np.log(n) ** 2

    @property
    def slope(self) -> float:
        """Least-squares slope of log Delta_n against log n."""
        return float(np.polyfit(np.log(self.n.astype(float)), np.log(self.delta), 1)[0])

    @property
    def strictly_decreasing(self) -> bool:
        return bool(np.all(np.diff(self.delta) < 0))

    @property
    def normalized_trend(self) -> float:
        """Spearman correlation of the normalized values with n."""
        return spearman(self.n, self.normalized)

    def rows(self):
        return [(int(a), float(b), float(c), float(d)) for a, b, c, d in zip(self.n, self.delta, self.low, self.high)]

    def to_dict(self) -> dict:
        return {
            "n": self.n.tolist(),
            "delta": self.delta.tolist(),
            "normalized": self.normalized.tolist(),
            "slope": self.slope,
            "strictly_decreasing": self.strictly_decreasing,
            "normalized_spearman": self.normalized_trend,
            "reps": self.reps,
            "notes": list(self.notes),
        }


def berry_esseen_curve(
    model: ModelSpec,
    f: Transform,
    n_grid,
    reps: int,
    seed=0,
    calibration: Calibration | None = None,
    workers: int | None = None,
    calibration_size: int = CALIBRATION_SIZE,
    depth: int | None = None,
) -> BerryEsseenCurve:
    """Berry-Esseen distances over ``n_grid`` after certifying ``E|f(y_0)|^3 < inf``.

    ``B_n^2 = n beta_n^2`` comes from the calibration autocovariances.  All
    n share the same replicate paths (partial sums at checkpoints).
    """
    gate(check_transform_moment(model, f, 3.0), "Berry-Esseen experiment")
    n_grid = np.sort(np.asarray(n_grid, dtype=int))
    if calibration is None:
        calibration = calibrate(model, f, calibration_size, seed)
    curve = beta_n_squared(calibration.table, n_grid)
    if not np.all(curve.beta_n2 > 0):
        raise ValueError("beta_n^2 must be positive")
    sums = _replicate_sums(model, f, calibration.mean, n_grid, reps, seed, "observation", depth, workers, BE_BLOCK, "berry")
    q = ks_critical(reps, 0.05)
    delta = []
    for n, b2 in zip(n_grid, curve.beta_n2):
        delta.append(ks_statistic(sums[int(n)][0] / math.sqrt(b2), normal_cdf))
    delta = np.array(delta)
    return BerryEsseenCurve(
        n_grid, delta, np.maximum(delta - q, 0.0), np.minimum(delta + q, 1.0),
        curve.B_n, int(reps), calibration.mean, [f"centering mean by {calibration.method}"],
    )


# ---------------------------------------------------------------------------
# Marginal distribution function
# ---------------------------------------------------------------------------


@dataclass
class CdfEstimate:
    """Empirical distribution function of a calibration sample.

    Right-continuous between sample points; at a sample value the midpoint
    of the left and right limits is returned.
    """

    sample: np.ndarray
    n_cal: int
    symmetrized: bool = False

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        lo = np.searchsorted(self.sample, x, side="left")
        hi = np.searchsorted(self.sample, x, side="right")
        out = (lo + hi) / (2.0 * self.sample.size)
        return float(out) if out.ndim == 0 else out


@dataclass
class ExactCdf:
    """``F(x) = H(x / sigma)`` for a deterministic volatility ``sigma``."""

    innovation: object
    sigma: float

    def __call__(self, x):
        return self.innovation.cdf(np.asarray(x, dtype=float) / self.sigma)


def exact_cdf(model: ModelSpec) -> ExactCdf:
    """Exact marginal CDF when both coefficients are constant with ``|c| < 1``."""
    c0, g0 = model.c.constant, model.g.constant
    if c0 is None or g0 is None or not abs(c0) < 1:
        raise ValueError("exact marginal CDF needs constant coefficients with |c| < 1")
    sigma2 = float(model.link.invert(np.array(g0 / (1.0 - c0))))
    return ExactCdf(model.innovation, math.sqrt(sigma2))


def estimate_cdf(model: ModelSpec, n_cal: int = CDF_SIZE, seed=0, depth: int | None = None, symmetrize: bool | None = None) -> CdfEstimate:
    """Empirical CDF of ``n_cal`` stationary draws, one per independent path.

    With a symmetric innovation law ``y_0`` is symmetric, and the sample is
    augmented by its reflection (``symmetrize``, default on for symmetric
    laws), which makes ``F(0) = 1/2`` exact.
    """
    draws = stationary_draws(model, int(n_cal), seed=as_seed(seed).child("cdf"), depth=depth)
    y = draws.y
    sym = model.innovation.symmetric if symmetrize is None else bool(symmetrize)
    if sym:
        y = np.concatenate([y, -y])
    return CdfEstimate(np.sort(y), int(n_cal), sym)


# ---------------------------------------------------------------------------
# Sequential empirical process
# ---------------------------------------------------------------------------


@dataclass
class EmpiricalProcessSurface:
    """``R(s, floor(n t)) = sum_{k <= n t} (1{F(y_k) <= s} - s)`` on a grid."""

    s: np.ndarray
    t: np.ndarray
    values: np.ndarray
    n: int

    def rows(self):
        return [(float(a), float(b), float(self.values[i, j])) for i, a in enumerate(self.s) for j, b in enumerate(self.t)]


def empirical_process_surface(source, F, s_grid, t_grid=None) -> EmpiricalProcessSurface:
    """Sequential empirical process of one path (``Path`` or array of y).

    ``F`` must not be estimated from the same path.
    """
    y = source.y if isinstance(source, Path) else np.asarray(source, dtype=float)
    n = y.size
    s = np.asarray(s_grid, dtype=float)
    u = np.asarray(F(y))
    t = np.arange(n + 1) / n if t_grid is None else np.asarray(t_grid, dtype=float)
    k = _index(n, t)
    out = np.empty((s.size, t.size))
    for i, si in enumerate(s):
        R = np.concatenate([[0.0], np.cumsum((u <= si) - si)])
        out[i] = R[k]
    return EmpiricalProcessSurface(s, t, out, n)


@dataclass
class CovarianceKernel:
    """``Gamma(s, s') = sum over all lags of E Y_0(s) Y_k(s')``, truncated at ``K``.

    ``lag_terms[k]`` holds the estimated ``E Y_0(s) Y_k(s')``; ``se`` comes
    from independent-batch estimates of the whole kernel.
    """

    s: np.ndarray
    gamma: np.ndarray
    se: np.ndarray
    K: int
    lag_terms: np.ndarray
    n: int

    def rows(self):
        return [(float(a), float(b), float(self.gamma[i, j])) for i, a in enumerate(self.s) for j, b in enumerate(self.s)]


class _KernelAccumulator:
    """Lagged cross-products of the indicator vectors Y_k(s) over contiguous batches."""

    def __init__(self, F, s, K):
        self.F, self.s, self.K = F, s, K
        S = s.size
        self.cross = np.zeros((K + 1, S, S))
        self.total = np.zeros(S)
        self.n = 0
        self.prev = np.empty((0, S))
        self.batch = []

    def __call__(self, k0, eps, sigma2, y):
        u = np.asarray(self.F(y.ravel()))
        Y = (u[:, None] <= self.s[None, :]) - self.s[None, :]
        K, nb = self.K, Y.shape[0]
        within = np.stack([Y[: nb - k].T @ Y[k:] for k in range(K + 1)])
        ybar = Y.mean(axis=0)
        gb = within / (nb - np.arange(K + 1))[:, None, None] - np.outer(ybar, ybar)[None]
        self.batch.append(_assemble(gb))
        if self.prev.shape[0]:
            joined = np.concatenate([self.prev, Y[:K]])
            t = self.prev.shape[0]
            for k in range(1, K + 1):
                lo = max(0, t - k)
                self.cross[k] += joined[lo:t].T @ joined[lo + k : t + k]
        self.cross += within
        self.total += Y.sum(axis=0)
        self.n += nb
        self.prev = np.concatenate([self.prev, Y])[-K:] if K else np.empty((0, self.s.size))


def _assemble(lag_terms: np.ndarray) -> np.ndarray:
    g = lag_terms[0] + sum((lag_terms[k] + lag_terms[k].T for k in range(1, lag_terms.shape[0])), np.zeros_like(lag_terms[0]))
    return 0.5 * (g + g.T)


def gamma_kernel(
    model: ModelSpec,
    s_grid,
    K: int | None = None,
    budget: int = CALIBRATION_SIZE,
    seed=0,
    F=None,
    batches: int = 20,
    decay: DecayFit | None = None,
    depth: int | None = None,
    cdf_size: int = CDF_SIZE,
) -> CovarianceKernel:
    """Estimate the kernel on ``s_grid`` from one long path.

    ``Gamma = gamma_0 + sum_{k=1}^K (gamma_k + gamma_k^T)``, then
    symmetrized.  ``F`` defaults to an independent :func:`estimate_cdf`.
    """
    s = np.asarray(s_grid, dtype=float)
    if np.any((s < 0) | (s > 1)):
        raise ValueError("s values must lie in [0, 1]")
    seed = as_seed(seed)
    if K is None:
        K = lag_window(model, decay)
        if K is None:
            raise NoCertificateError("no geometric rate for the lag truncation; pass K explicitly")
    if F is None:
        F = estimate_cdf(model, cdf_size, seed, depth)
    acc = _KernelAccumulator(F, s, int(K))
    M = default_depth(model) if depth is None else int(depth)
    chunk = -(-int(budget) // batches)
    stream_paths(model, chunk * batches, 1, seed.child("kernel").generator(), acc, M, chunk=chunk)
    n = acc.n
    ybar = acc.total / n
    lags = np.arange(int(K) + 1)
    terms = acc.cross / (n - lags)[:, None, None] - np.outer(ybar, ybar)[None]
    gamma = _assemble(terms)
    bg = np.array(acc.batch)
    se = np.std(bg, axis=0, ddof=1) / math.sqrt(len(bg))
    return CovarianceKernel(s, gamma, se, int(K), terms, n)


class _PitTracker:
    """Running ``R(s, k)`` for a few s values at checkpoints."""

    def __init__(self, F, s, checkpoints, reps):
        self.F, self.s = F, s
        self.checkpoints = sorted(int(c) for c in checkpoints)
        self.R = np.zeros((reps, s.size))
        self.at = {}

    def __call__(self, k0, eps, sigma2, y):
        u = np.asarray(self.F(y))
        Y = (u[..., None] <= self.s) - self.s
        cs = np.cumsum(Y, axis=0) + self.R
        last = k0 + Y.shape[0] - 1
        for n in self.checkpoints:
            if k0 <= n <= last:
                self.at[n] = cs[n - k0].copy()
        self.R = cs[-1].copy()


def _pit_block(model, F, s, checkpoints, depth, gen, size):
    tr = _PitTracker(F, s, checkpoints, size)
    stream_paths(model, max(checkpoints), size, gen, tr, depth)
    return np.stack([tr.at[n] for n in tr.checkpoints])


def empirical_clt_route(model: ModelSpec, mu: float = CLT_ORDER) -> tuple[str, list[ConditionReport]]:
    """Whether the premises of the empirical-process limit theorem are certified.

    Polynomial links need the log-moment condition at order ``mu``;
    exponential links the moment condition at order ``mu``; a vanishing
    ``c`` makes the observations independent and needs neither.  All need a
    Hoelder-continuous innovation CDF, ``E log+|eps_0|^((mu-2)/2) < inf`` and
    ``E sigma_0^(-theta) < inf``.  Returns ``("certified", reports)`` or
    ``("out-of-certified-regime", reports)``.  Raises when stationarity fails.
    """
    gate([check_stationarity(model)], "empirical-process check")
    innov = model.innovation
    theta = innov.lipschitz_order
    reports = []
    if model.c_is_zero:
        # y_k are i.i.d.: the classical empirical-process CLT applies directly
        reports.append(ConditionReport("c-vanishes", "holds", notes=["observations are independent"]))
    elif model.link.kind == "polynomial":
        reports.append(check_log_moments(model, mu)["EQ20"])
    else:
        reports.append(check_log_moments(model, mu)["EQ21"])
    reports.append(ConditionReport("H-Hoelder", "holds" if theta is not None else "fails", theta=theta))
    # any finite positive moment of |eps| bounds every power of log+|eps|
    reports.append(ConditionReport("log-moment-eps", "holds" if innov.abs_moment_finite(1.0) else "inconclusive", parameter=mu))
    if theta is not None:
        reports.append(check_sigma_inverse_moment(model, theta))
    label = "certified" if all(r.verdict == "holds" for r in reports) else "out-of-certified-regime"
    return label, reports


def empirical_clt_check(
    model: ModelSpec,
    s: float,
    n: int,
    reps: int,
    Gamma: float | None = None,
    F=None,
    seed=0,
    workers: int | None = None,
    level: float = KS_LEVEL,
    slack: float = KS_SLACK,
    gamma_budget: int = CALIBRATION_SIZE,
    cdf_size: int = CDF_SIZE,
    K: int | None = None,
    depth: int | None = None,
) -> DistributionalTest:
    """KS distance of ``n^(-1/2) R(s, n)`` across replicates to ``N(0, Gamma(s, s))``.

    Runs outside the certified regime with a label; refuses only when
    stationarity fails.
    """
    if not 0.0 < s < 1.0:
        raise ValueError("s must lie strictly inside (0, 1); R(0, .) and R(1, .) have zero variance")
    label, reports = empirical_clt_route(model)
    seed = as_seed(seed)
    M = default_depth(model) if depth is None else int(depth)
    if F is None:
        F = estimate_cdf(model, cdf_size, seed, M)
    if Gamma is None:
        Gamma = float(gamma_kernel(model, [s], K, gamma_budget, seed, F, depth=M).gamma[0, 0])
    if not Gamma > 0:
        raise ValueError("Gamma(s, s) must be positive")
    task = partial(_pit_block, model, F, np.array([float(s)]), (int(n),), M)
    parts = run_blocks(task, reps, seed.child("empclt"), REP_BLOCK, workers)
    z = np.concatenate([p[0, :, 0] for p in parts]) / math.sqrt(n)
    sd = math.sqrt(Gamma)
    notes = [f"{r.condition}: {r.verdict}" for r in reports]
    return _ks_test(
        z, lambda x: normal_cdf(np.asarray(x) / sd), f"N(0, {Gamma:.6g})", n, level, slack,
        label=label, parameters={"s": float(s), "Gamma": float(Gamma)}, notes=notes,
    )


# ---------------------------------------------------------------------------
# Change-point statistic
# ---------------------------------------------------------------------------


def _bridge_sup(u: np.ndarray, s: np.ndarray, k: np.ndarray | None = None) -> np.ndarray:
    """sup over s and k of |R(s, k) - (k/n) R(s, n)| / sqrt(n) for columns of ``u``."""
    n = u.shape[0]
    ks = np.arange(1, n + 1) if k is None else k[k > 0]
    t = (ks / n).reshape((-1,) + (1,) * (u.ndim - 1))
    out = np.zeros(u.shape[1:])
    for si in s:
        R = np.cumsum((u <= si) - si, axis=0)
        Rk = R[ks - 1]
        out = np.maximum(out, np.max(np.abs(Rk - t * R[-1]), axis=0))
    return out / math.sqrt(n)


def change_point_statistic(source, F, s_grid, t_grid=None) -> float:
    """``sup_{s,t} n^(-1/2) |R(s, floor(n t)) - t R(s, n)|`` for one path.

    The default t grid is every ``k/n``.  ``F`` must not come from the path.
    """
    y = source.y if isinstance(source, Path) else np.asarray(source, dtype=float)
    u = np.asarray(F(y))
    n = u.size
    s = np.asarray(s_grid, dtype=float)
    if t_grid is None:
        return float(_bridge_sup(u, s))
    t = np.asarray(t_grid, dtype=float)
    k = _index(n, t)
    best = 0.0
    for si in s:
        R = np.concatenate([[0.0], np.cumsum((u <= si) - si)])
        best = max(best, float(np.max(np.abs(R[k] - t * R[n]))))
    return best / math.sqrt(n)


class _PitCollector:
    def __init__(self, F, n, reps):
        self.F = F
        self.u = np.empty((n, reps))

    def __call__(self, k0, eps, sigma2, y):
        self.u[k0 - 1 : k0 - 1 + y.shape[0]] = self.F(y)


def _change_block(model, F, s, n, depth, change, gen, size):
    col = _PitCollector(F, n, size)
    stream_paths(model, n, size, gen, col, depth, change)
    return _bridge_sup(col.u, s)


def change_point_sample(
    model: ModelSpec,
    n: int,
    reps: int,
    F,
    s_grid,
    seed=0,
    change=None,
    workers: int | None = None,
    depth: int | None = None,
    purpose: str = "changepoint",
) -> np.ndarray:
    """Replicate sample of the change-point statistic (optionally under a change)."""
    M = default_depth(model) if depth is None else int(depth)
    task = partial(_change_block, model, F, np.asarray(s_grid, dtype=float), int(n), M, change)
    return np.concatenate(run_blocks(task, reps, as_seed(seed).child(purpose), CP_BLOCK, workers))


@dataclass
class ChangePointPower:
    """Null and alternative samples of the change-point statistic."""

    null: np.ndarray
    alternative: np.ndarray
    null_q99: float
    alt_median: float
    change_index: int

    @property
    def detected(self) -> bool:
        return self.alt_median > self.null_q99

    @property
    def power(self) -> float:
        return float(np.mean(self.alternative > self.null_q99))

    def to_dict(self) -> dict:
        return {
            "null_q99": self.null_q99,
            "alt_median": self.alt_median,
            "power": self.power,
            "detected": self.detected,
            "change_index": self.change_index,
            "reps": int(self.null.size),
        }


def change_point_power(
    model: ModelSpec,
    changed: ModelSpec,
    n: int,
    reps: int,
    seed=0,
    s_grid=(0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9),
    change_index: int | None = None,
    F=None,
    workers: int | None = None,
    cdf_size: int = CDF_SIZE,
    depth: int | None = None,
) -> ChangePointPower:
    """Median statistic under a change at ``change_index`` (default ``n/2``) against the null 99th percentile.

    The null law is obtained by resimulating the unchanged model; ``F`` is
    estimated from the unchanged model on an independent stream.
    """
    seed = as_seed(seed)
    k_star = n // 2 if change_index is None else int(change_index)
    M = default_depth(model) if depth is None else int(depth)
    if F is None:
        F = estimate_cdf(model, cdf_size, seed, M)
    null = change_point_sample(model, n, reps, F, s_grid, seed, None, workers, M, "changepoint/null")
    alt = change_point_sample(model, n, reps, F, s_grid, seed, (k_star, changed), workers, M, "changepoint/alt")
    return ChangePointPower(null, alt, float(np.quantile(null, 0.99)), float(np.median(alt)), k_star)

