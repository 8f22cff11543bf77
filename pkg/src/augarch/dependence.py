"""
Quality of the m-dependent surrogate.

L2 coupling errors and their geometric decay, tail probabilities of the
coupling error with a regime classification, and autocovariances of the
transformed observations with a summability certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial

import numpy as np
from scipy import stats

from augarch.conditions import check_lyapunov_bounds, check_transform_moment, gate, lyapunov_exponent
from augarch.model import ModelSpec, Transform
from augarch.seeding import SeedSpec, as_seed, run_blocks
from augarch.simulate import coupling_draws, default_depth, stream_paths
from augarch.stats import clopper_pearson

__all__ = [
    "AutocovarianceTable",
    "CouplingTailReport",
    "DecayFit",
    "Summability",
    "autocovariance",
    "classify_regime",
    "coupling_tail",
    "default_alpha",
    "eta_difference",
    "fit_geometric_decay",
    "l2_coupling_error",
    "summability_check",
]

BLOCK = 8192
REGIME_TIE = 0.05


def _fsum_rows(parts):
    """Order-independent sum of equally shaped arrays."""
    stacked = np.stack(parts)
    return np.array([math.fsum(col) for col in stacked.reshape(len(parts), -1).T]).reshape(stacked.shape[1:])


# ---------------------------------------------------------------------------
# Geometric decay fits
# ---------------------------------------------------------------------------


@dataclass
class DecayFit:
    """Least-squares fit of ``log error = intercept + m log rate``.

    ``rate_band`` is the 95% interval for the per-unit-m ratio; ``used``
    marks the points above the noise floor that entered the fit.
    """

    m_values: np.ndarray
    errors: np.ndarray
    rate: float
    intercept: float
    r_squared: float
    rate_band: tuple[float, float]
    used: np.ndarray
    degenerate: bool = False
    stderr: np.ndarray | None = None
    norm2: float | None = None
    norm2_se: float | None = None
    precondition: str | None = None

    @property
    def contracting(self) -> bool:
        return self.rate_band[1] < 1.0

    @property
    def scale(self) -> float:
        return math.exp(self.intercept)

    def predict(self, m):
        return self.scale * np.power(self.rate, np.asarray(m, dtype=float))

    def to_dict(self) -> dict:
        return {
            "rate": self.rate,
            "rate_low": self.rate_band[0],
            "rate_high": self.rate_band[1],
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "degenerate": self.degenerate,
            "contracting": self.contracting,
            "points_used": int(np.sum(self.used)),
            "norm2": self.norm2,
            "precondition": self.precondition,
        }


def _linfit(x, y):
    """OLS slope, intercept, r^2 and slope standard error."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = ym - slope * xm
    resid = y - intercept - slope * x
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((y - ym) ** 2))
    r2 = 1.0 if ss_tot == 0 or ss_res <= 1e-28 * max(ss_tot, 1.0) else 1.0 - ss_res / ss_tot
    dof = x.size - 2
    se = math.sqrt(ss_res / dof / sxx) if dof > 0 else math.inf
    return slope, intercept, r2, se


def fit_geometric_decay(
    m_values, errors, stderr=None, floor_factor: float = 10.0, conf: float = 0.95, extra_se: float = 0.0
) -> DecayFit:
    """Fit a geometric rate to coupling errors.

    Points enter the fit when they are positive and, if ``stderr`` is
    given, exceed ``floor_factor`` times their Monte Carlo standard error.
    Fewer than three usable points give a degenerate fit; all-zero errors
    (exact coupling) report rate 0.  ``extra_se`` is an additional standard
    error of the log-rate (e.g. Monte Carlo spread shared by all m),
    combined in quadrature with the regression standard error.
    """
    m = np.asarray(m_values, dtype=float)
    e = np.asarray(errors, dtype=float)
    if m.shape != e.shape:
        raise ValueError("m_values and errors must have the same length")
    used = np.isfinite(e) & (e > 0)
    if stderr is not None:
        used &= e > floor_factor * np.asarray(stderr, dtype=float)
    if used.sum() < 3:
        exact = bool(np.all(e == 0))
        rate = 0.0 if exact else math.nan
        return DecayFit(m, e, rate, -math.inf if exact else math.nan, 1.0 if exact else math.nan, (rate, rate), used, True, stderr)
    slope, intercept, r2, se = _linfit(m[used], np.log(e[used]))
    se = math.hypot(se, extra_se)
    dof = int(used.sum()) - 2
    tq = stats.t.ppf(0.5 + conf / 2, dof) if math.isfinite(se) else math.inf
    band = (math.exp(slope - tq * se), math.exp(slope + tq * se))
    return DecayFit(m, e, math.exp(slope), intercept, r2, band, used, False, stderr)


# ---------------------------------------------------------------------------
# L2 coupling error
# ---------------------------------------------------------------------------


def _surrogate_y(model, x_m, eps):
    s2 = model.link.invert(x_m) if model.link.kind == "polynomial" else np.exp(np.clip(x_m, -700, 700))
    return np.sqrt(s2) * eps


def eta_difference(model: ModelSpec, f: Transform, x_m, diff, eps):
    """f(y_k) - f(y_km) computed from ``diff = Lambda(sigma_k^2) - Lambda(sigma_km^2)``.

    ``diff`` comes from the exact identity ``prod c * X_{k-m}``, so the
    result keeps full relative precision even when it is far below the
    rounding level of ``f(y_k)`` itself.
    """
    scale = f(eps)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if model.link.kind == "exponential":
            half = 0.5 * f.nu
            base = np.exp(np.clip(half * x_m, -700, 700))
            return scale * base * np.expm1(half * diff)
        p = f.nu / (2.0 * model.link.delta)
        ratio = np.where(x_m > 0, diff / x_m, np.inf)
        out = np.power(np.maximum(x_m, 0.0), p) * np.expm1(p * np.log1p(ratio))
        # empty or vanishing surrogate: difference is f(y_k) itself
        direct = np.power(np.maximum(x_m + diff, 0.0), p)
        return scale * np.where(x_m > 0, out, direct)


def _l2_block(model, f, m_values, depth, gen, size):
    d = coupling_draws(model, m_values, size, gen, depth)
    eta = f(_surrogate_y(model, d.x, d.eps))
    diff = eta_difference(model, f, d.x_m, d.prod_c * d.x_lag, d.eps[None, :])
    d2 = diff * diff
    return np.concatenate([d2.sum(axis=1), (d2 * d2).sum(axis=1), [np.sum(eta * eta), np.sum(eta**4), size]])


def _group_slope_se(parts, k, used, m_values, groups: int = 10) -> float:
    """Standard error of the log-rate from the spread across block groups.

    Every m shares the same replicates, so the regression residuals alone
    understate the Monte Carlo uncertainty of the slope.
    """
    g = min(groups, len(parts))
    if g < 4:
        return 0.0
    slopes = []
    x = np.asarray(m_values, dtype=float)[used]
    for idx in np.array_split(np.arange(len(parts)), g):
        tot = _fsum_rows([parts[i] for i in idx])
        q = tot[:k][used] / tot[-1]
        if np.all(q > 0):
            slopes.append(_linfit(x, 0.5 * np.log(q))[0])
    if len(slopes) < 4:
        return 0.0
    return float(np.std(slopes, ddof=1) / math.sqrt(len(slopes)))


def l2_coupling_error(
    model: ModelSpec,
    f: Transform,
    m_values,
    reps: int = 100_000,
    seed=0,
    depth: int | None = None,
    workers: int | None = None,
    block: int = BLOCK,
) -> DecayFit:
    """Root mean squared coupling error ``||f(y_k) - f(y_km)||_2`` per m.

    Estimated across independent replicates at the fixed index ``k = M``.
    The second-moment precondition is checked and recorded on the result
    (``precondition``); the experiment runs regardless.
    """
    m_values = np.asarray(m_values, dtype=int)
    M = max(default_depth(model) if depth is None else int(depth), int(m_values.max()))
    pre = [r.verdict for r in check_transform_moment(model, f, 2.0)]
    precondition = "fails" if "fails" in pre else ("inconclusive" if "inconclusive" in pre else "holds")
    task = partial(_l2_block, model, f, m_values, M)
    parts = run_blocks(task, reps, as_seed(seed).child("l2decay"), block, workers)
    tot = _fsum_rows(parts)
    k = len(m_values)
    n = tot[-1]
    q = tot[:k] / n
    q4 = tot[k : 2 * k] / n
    err = np.sqrt(q)
    with np.errstate(divide="ignore", invalid="ignore"):
        se = np.where(err > 0, np.sqrt(np.maximum(q4 - q * q, 0.0) / n) / (2 * err), 0.0)
    fit = fit_geometric_decay(m_values, err, se)
    if not fit.degenerate:
        fit = fit_geometric_decay(m_values, err, se, extra_se=_group_slope_se(parts, k, fit.used, m_values))
    e2, e4 = tot[2 * k] / n, tot[2 * k + 1] / n
    fit.norm2 = math.sqrt(e2)
    fit.norm2_se = math.sqrt(max(e4 - e2 * e2, 0.0) / n) / (2 * fit.norm2) if e2 > 0 else 0.0
    fit.precondition = precondition
    return fit


# ---------------------------------------------------------------------------
# Coupling tail probabilities
# ---------------------------------------------------------------------------


@dataclass
class CouplingTailReport:
    """Tail probabilities ``P(|difference| > exp(-alpha m))`` with exact bands.

    ``lambda_*`` rows refer to ``Lambda(sigma_k^2) - Lambda(sigma_km^2)``,
    ``eta_*`` rows to ``f(y_k) - f(y_km)``.  ``t_mean``/``t_var`` describe
    ``T_m = sum_{i<=m} (log|c(eps_i)| - E log|c|)``.
    """

    alpha: float
    m_values: np.ndarray
    reps: int
    lambda_counts: np.ndarray
    lambda_p: np.ndarray
    lambda_low: np.ndarray
    lambda_high: np.ndarray
    eta_counts: np.ndarray
    eta_p: np.ndarray
    eta_low: np.ndarray
    eta_high: np.ndarray
    t_mean: np.ndarray
    t_var: np.ndarray
    lyapunov: float
    regime: str
    r2_exponential: float
    r2_polynomial: float
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "reps": self.reps,
            "regime": self.regime,
            "r2_exponential": self.r2_exponential,
            "r2_polynomial": self.r2_polynomial,
            "lyapunov": self.lyapunov,
            "notes": list(self.notes),
        }


def default_alpha(lyapunov: float) -> float:
    """Threshold exponent ``min(|E log|c|| / 4, 0.1)``."""
    return min(0.25 * abs(lyapunov), 0.1)


def classify_regime(m_values, p, tie: float = REGIME_TIE) -> tuple[str, float, float]:
    """r^2 contest between log p ~ m (exponential) and log p ~ log m (polynomial).

    Uses points with ``p > 0`` and ``m > 0``.  Returns ``(regime, r2_exp,
    r2_poly)``; the regime is ``inconclusive`` with fewer than three points,
    a non-decreasing tail, or ``|r2_exp - r2_poly| < tie``.
    """
    m = np.asarray(m_values, dtype=float)
    p = np.asarray(p, dtype=float)
    ok = (p > 0) & (m > 0)
    if ok.sum() < 3:
        return "inconclusive", math.nan, math.nan
    lp = np.log(p[ok])
    s_exp, _, r2_exp, _ = _linfit(m[ok], lp)
    s_pol, _, r2_pol, _ = _linfit(np.log(m[ok]), lp)
    if s_exp >= 0 or s_pol >= 0:
        return "inconclusive", r2_exp, r2_pol
    if abs(r2_exp - r2_pol) < tie:
        return "inconclusive", r2_exp, r2_pol
    return ("exponential" if r2_exp > r2_pol else "polynomial"), r2_exp, r2_pol


def _tail_block(model, f, m_values, depth, alpha, lyap, gen, size):
    d = coupling_draws(model, m_values, size, gen, depth)
    thr = np.exp(-alpha * m_values.astype(float))[:, None]
    diff = d.prod_c * d.x_lag
    lam = np.abs(diff) > thr
    eta = np.abs(eta_difference(model, f, d.x_m, diff, d.eps[None, :])) > thr
    t = d.sum_log_c - m_values[:, None] * lyap
    return np.concatenate([lam.sum(axis=1), eta.sum(axis=1), t.sum(axis=1), (t * t).sum(axis=1), [size]])


def coupling_tail(
    model: ModelSpec,
    m_values,
    reps: int = 100_000,
    seed=0,
    alpha: float | None = None,
    f: Transform | None = None,
    depth: int | None = None,
    workers: int | None = None,
    block: int = BLOCK,
) -> CouplingTailReport:
    """Estimate ``P(|difference| > exp(-alpha m))`` for each m and classify the decay.

    Requires ``-inf < E log|c| < 0``; a vanishing ``c`` couples exactly and
    short-circuits to zero tails.
    """
    m_values = np.asarray(m_values, dtype=int)
    f = f or Transform("power-abs", 1.0)
    k = len(m_values)
    zeros = np.zeros(k)
    if model.c_is_zero:
        a = 0.1 if alpha is None else float(alpha)
        _, hi = clopper_pearson(zeros, reps)
        return CouplingTailReport(
            a, m_values, reps, zeros, zeros, zeros, hi, zeros, zeros, zeros, hi, zeros, zeros,
            -math.inf, "exponential", math.nan, math.nan, ["c vanishes: coupling is exact for m >= 1"],
        )
    gate([check_lyapunov_bounds(model)], "coupling tail experiment")
    lyap = lyapunov_exponent(model).point
    a = default_alpha(lyap) if alpha is None else float(alpha)
    M = max(default_depth(model) if depth is None else int(depth), int(m_values.max()))
    task = partial(_tail_block, model, f, m_values, M, a, lyap)
    parts = run_blocks(task, reps, as_seed(seed).child("tails"), block, workers)
    tot = _fsum_rows(parts)
    n = int(tot[-1])
    lam_c, eta_c = tot[:k], tot[k : 2 * k]
    t_mean = tot[2 * k : 3 * k] / n
    t_var = tot[3 * k : 4 * k] / n - t_mean**2
    lam_lo, lam_hi = clopper_pearson(lam_c, n)
    eta_lo, eta_hi = clopper_pearson(eta_c, n)
    regime, r2e, r2p = classify_regime(m_values, lam_c / n)
    notes = []
    if regime == "inconclusive":
        notes.append("tail not clearly decreasing or r^2 contest tied; alpha may be too large or the m grid too short")
    return CouplingTailReport(
        a, m_values, n, lam_c, lam_c / n, lam_lo, lam_hi, eta_c, eta_c / n, eta_lo, eta_hi,
        t_mean, t_var, lyap, regime, r2e, r2p, notes,
    )


# ---------------------------------------------------------------------------
# Autocovariances
# ---------------------------------------------------------------------------


class _LagAccumulator:
    """Streaming lagged cross-products over contiguous batches of one series.

    Values are shifted by a provisional constant before products are formed
    to limit cancellation.  Each batch also yields its own estimate of
    gamma(0..L) from within-batch pairs, used for standard errors.
    """

    def __init__(self, max_lag: int):
        self.L = max_lag
        self.shift = None
        self.prev_tail = np.empty(0)
        self.total = 0.0
        self.n = 0
        self.head = None
        self.cross = np.zeros(max_lag + 1)
        self.sq_sum = 0.0
        self.q4_sum = 0.0
        self.batch_gamma = []
        self.batch_mean = []

    def add(self, v: np.ndarray):
        L = self.L
        if self.shift is None:
            self.shift = float(np.mean(v))
            self.raw_head = v[:L].copy()
        w = v - self.shift
        if self.head is None:
            self.head = w[:L].copy()
        nb = w.size
        # within-batch products and a batch-level estimate
        within = np.array([np.dot(w[: nb - k], w[k:]) if k < nb else 0.0 for k in range(L + 1)])
        wb = w.mean()
        gb = np.array([
            (within[k] - wb * (np.sum(w[: nb - k]) + np.sum(w[k:])) + (nb - k) * wb * wb) / (nb - k) for k in range(L + 1)
        ])
        self.batch_gamma.append(gb)
        self.batch_mean.append(wb + self.shift)
        # pairs straddling the previous batch boundary
        tail = self.prev_tail
        if tail.size:
            joined = np.concatenate([tail, w[:L]])
            t = tail.size
            for k in range(1, L + 1):
                lo = max(0, t - k)
                self.cross[k] += np.dot(joined[lo:t], joined[lo + k : t + k])
        self.cross += within
        self.total += float(np.sum(w))
        self.n += nb
        self.sq_sum += float(np.dot(v, v))
        self.q4_sum += float(np.sum((v * v) ** 2))
        self.prev_tail = np.concatenate([self.prev_tail, w])[-L:] if L else np.empty(0)

    def gamma(self) -> np.ndarray:
        n, L = self.n, self.L
        wbar = self.total / n
        first = np.concatenate([[0.0], np.cumsum(self.head)])
        last = np.concatenate([[0.0], np.cumsum(self.prev_tail[::-1])])
        out = np.empty(L + 1)
        for k in range(L + 1):
            s_head = self.total - last[k]  # sum of w_1..w_{n-k}
            s_tail = self.total - first[k]  # sum of w_{k+1}..w_n
            out[k] = (self.cross[k] - wbar * (s_head + s_tail) + (n - k) * wbar * wbar) / (n - k)
        return out


@dataclass
class AutocovarianceTable:
    """Estimates of Cov(f(y_0), f(y_k)) for ``k = 0..max_lag``.

    ``batch_gamma`` holds independent-batch estimates (rows) used for the
    standard errors of any linear functional of the autocovariances.
    """

    lags: np.ndarray
    gamma: np.ndarray
    se: np.ndarray
    partial_abs_sums: np.ndarray
    n: int
    mean: float
    second_moment: float
    batch_gamma: np.ndarray

    def functional_se(self, weights) -> float:
        """Standard error of ``sum_k weights[k] * gamma[k]`` from batch spread."""
        vals = self.batch_gamma @ np.asarray(weights, dtype=float)
        return float(np.std(vals, ddof=1) / math.sqrt(len(vals)))

    def rows(self):
        return [(int(k), float(g), float(s)) for k, g, s in zip(self.lags, self.gamma, self.se)]


def _table(acc: _LagAccumulator) -> AutocovarianceTable:
    gamma = acc.gamma()
    bg = np.array(acc.batch_gamma)
    se = np.std(bg, axis=0, ddof=1) / math.sqrt(len(bg))
    lags = np.arange(acc.L + 1)
    partial_abs = np.cumsum(np.abs(gamma[1:]))
    partial_abs = np.concatenate([[0.0], partial_abs])
    return AutocovarianceTable(
        lags, gamma, se, partial_abs, acc.n, acc.shift + acc.total / acc.n, acc.sq_sum / acc.n, bg
    )


def autocovariance(
    source,
    f: Transform | None = None,
    max_lag: int = 20,
    budget: int = 1_000_000,
    seed=0,
    batches: int = 20,
    depth: int | None = None,
) -> AutocovarianceTable:
    """Autocovariances of f(y) from one long path.

    ``source`` is either a :class:`ModelSpec` (a path of length ``budget``
    is simulated and processed in ``batches`` contiguous batches) or an
    array of already transformed values.  Estimates divide by ``n - k``
    (overlapping pairs); standard errors come from the spread of the batch
    estimates.
    """
    if batches < 2:
        raise ValueError("need at least two batches for standard errors")
    acc = _LagAccumulator(int(max_lag))
    if isinstance(source, ModelSpec):
        f = f or Transform("power-abs", 1.0)
        model = source
        M = default_depth(model) if depth is None else int(depth)
        size = -(-int(budget) // batches)
        gen = as_seed(seed).child("acov").generator()
        stream_paths(model, size * batches, 1, gen, lambda k0, e, s2, y: acc.add(f(y.ravel())), M, chunk=size)
    else:
        v = np.asarray(source, dtype=float).ravel()
        if f is not None:
            v = f(v)
        for part in np.array_split(v, batches):
            acc.add(part)
    return _table(acc)


# ---------------------------------------------------------------------------
# Summability
# ---------------------------------------------------------------------------


@dataclass
class Summability:
    certified: bool
    partial_sum: float
    tail_bound: float
    K: int
    rate: float
    reason: str = ""

    def to_dict(self) -> dict:
        return {
            "certified": self.certified,
            "partial_sum": self.partial_sum,
            "tail_bound": self.tail_bound,
            "K": self.K,
            "rate": self.rate,
            "reason": self.reason,
        }


def summability_check(table: AutocovarianceTable, decay: DecayFit, norm2: float | None = None) -> Summability:
    """Certify sum_k |gamma(k)| < inf from the partial sums and a geometric tail.

    With ``||eta_k - eta_{k,k-1}||_2 <= C rate^(k-1)`` the tail beyond lag
    ``K`` is at most ``4 ||eta_0||_2 C rate^K / (1 - rate)``.
    """
    K = int(table.lags[-1])
    partial_sum = float(table.partial_abs_sums[-1])
    rate = decay.rate
    if decay.degenerate and rate == 0.0:
        return Summability(True, partial_sum, 0.0, K, 0.0, "coupling exact")
    if not math.isfinite(rate) or rate >= 1.0:
        return Summability(False, partial_sum, math.inf, K, rate, "fitted rate is not below one")
    norm = decay.norm2 if norm2 is None else norm2
    if norm is None:
        norm = math.sqrt(table.second_moment)
    bound = 4.0 * norm * decay.scale * rate**K / (1.0 - rate)
    return Summability(True, partial_sum, bound, K, rate)
