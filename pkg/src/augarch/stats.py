"""Reference distributions and distance statistics."""

from __future__ import annotations

import math

import numpy as np
from scipy import special, stats

__all__ = [
    "clopper_pearson",
    "ks_critical",
    "ks_pvalue",
    "ks_statistic",
    "ks_two_sample",
    "normal_cdf",
    "spearman",
    "sup_w_cdf",
]


def normal_cdf(x):
    """Standard normal distribution function Phi."""
    out = special.ndtr(np.asarray(x, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def sup_w_cdf(x):
    """P(sup_{0<=t<=1} W(t) <= x) = max(0, 2 Phi(x) - 1)."""
    x = np.asarray(x, dtype=float)
    out = np.where(x > 0, special.erf(np.maximum(x, 0.0) / math.sqrt(2.0)), 0.0)
    return float(out) if out.ndim == 0 else out


def ks_statistic(sample, cdf) -> float:
    """sup_x |F_n(x) - F(x)| for a continuous reference ``cdf``.

    Both one-sided deviations are evaluated at every jump point of the
    empirical distribution function, so the result is exact.
    """
    x = np.sort(np.asarray(sample, dtype=float).ravel())
    n = x.size
    if n == 0:
        raise ValueError("empty sample")
    F = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


def ks_two_sample(a, b) -> tuple[float, float]:
    """Two-sample KS statistic and p-value."""
    res = stats.ks_2samp(np.asarray(a).ravel(), np.asarray(b).ravel())
    return float(res.statistic), float(res.pvalue)


def ks_critical(n: int, level: float = 0.01) -> float:
    """Exact one-sample KS critical value at significance ``level``."""
    return float(stats.kstwo.ppf(1.0 - level, int(n)))


def ks_pvalue(d: float, n: int) -> float:
    return float(stats.kstwo.sf(d, int(n)))


def clopper_pearson(k, n, conf: float = 0.95):
    """Exact binomial confidence interval for ``k`` successes in ``n`` trials."""
    k = np.asarray(k, dtype=float)
    a = (1.0 - conf) / 2.0
    lo = np.where(k > 0, stats.beta.ppf(a, k, n - k + 1), 0.0)
    hi = np.where(k < n, stats.beta.ppf(1 - a, k + 1, n - k), 1.0)
    if lo.ndim == 0:
        return float(lo), float(hi)
    return lo, hi


def spearman(x, y) -> float:
    return float(stats.spearmanr(x, y).statistic)
