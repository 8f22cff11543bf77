"""
Stationary path simulation and the m-dependent coupled surrogate.

The stationary series ``X_k = sum_i g(eps_{k-i}) prod_{j<i} c(eps_{k-j})``
truncated at depth ``M`` equals the recursion started from ``X_{1-M} = 0``,
so a path of length ``n`` costs ``O(n + M)``.  Arrays are laid out so that
row ``j`` of a path holds ``eps_{j+1-M}`` together with the state *before*
that innovation is applied; in particular ``X_k`` and ``eps_k`` share a row.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numba
import numpy as np

from augarch.conditions import contraction_rate
from augarch.exceptions import DomainError, NoCertificateError
from augarch.model import ModelSpec
from augarch.seeding import SeedSpec, as_seed

__all__ = [
    "CouplingDraws",
    "CoupledPath",
    "DEFAULT_DEPTH",
    "Path",
    "StationaryDraws",
    "coupling_draws",
    "default_depth",
    "simulate_coupled",
    "simulate_path",
    "stationary_draws",
    "stream_paths",
    "truncation_depth",
]

DEFAULT_DEPTH = 2048
DEPTH_FLOOR = 64
TIME_CHUNK = 256
EXP_CLAMP = 700.0


def truncation_depth(model: ModelSpec, tol: float = 1e-12, override: int | None = None, floor: int = DEPTH_FLOOR) -> int:
    """Series truncation depth ``M = max(floor, ceil(log tol / log rate))``.

    ``rate`` is the contraction certificate from
    :func:`augarch.conditions.contraction_rate`.  A vanishing ``c`` needs a
    single term.

    Raises
    ------
    NoCertificateError
        If no moment order contracts and no ``override`` is given.
    """
    if override is not None:
        if override < 1:
            raise ValueError("truncation depth must be >= 1")
        return int(override)
    if not 0 < tol < 1:
        raise ValueError("tol must lie in (0, 1)")
    if model.c_is_zero:
        return 1
    rate, _ = contraction_rate(model)
    if rate == 0:
        return 1
    return max(floor, math.ceil(math.log(tol) / math.log(rate)))


def default_depth(model: ModelSpec, tol: float = 1e-12) -> int:
    """:func:`truncation_depth`, falling back to 2048 with a warning."""
    try:
        return truncation_depth(model, tol)
    except NoCertificateError:
        warnings.warn(
            f"no geometric contraction certificate; using truncation depth {DEFAULT_DEPTH}",
            RuntimeWarning,
            stacklevel=2,
        )
        return DEFAULT_DEPTH


@numba.njit(cache=True)
def _advance(cv, gv, x, out):
    """Store the state before each row in ``out`` and advance ``x`` in place."""
    T, B = cv.shape
    for t in range(T):
        for b in range(B):
            out[t, b] = x[b]
            x[b] = cv[t, b] * x[b] + gv[t, b]


def _coefficients(model: ModelSpec, eps: np.ndarray, first_index: int, change):
    """c and g evaluated on rows of ``eps`` whose first row has index ``first_index``."""
    cv = np.asarray(model.c(eps), dtype=float)
    gv = np.asarray(model.g(eps), dtype=float)
    if cv.shape != eps.shape:
        cv = np.broadcast_to(cv, eps.shape)
    if gv.shape != eps.shape:
        gv = np.broadcast_to(gv, eps.shape)
    if change is not None:
        k_star, model2 = change
        start = k_star - first_index
        if start < eps.shape[0]:
            start = max(start, 0)
            cv, gv = np.array(cv), np.array(gv)
            tail = eps[start:]
            cv[start:] = model2.c(tail)
            gv[start:] = model2.g(tail)
    return np.ascontiguousarray(cv, dtype=float), np.ascontiguousarray(gv, dtype=float)


def _to_sigma2(model: ModelSpec, x: np.ndarray):
    """sigma^2 from link values; returns ``(sigma2, overflowed)``."""
    link = model.link
    if link.kind == "exponential":
        clipped = np.clip(x, -EXP_CLAMP, EXP_CLAMP)
        return np.exp(clipped), bool(np.any(clipped != x))
    return np.asarray(link.invert(x), dtype=float), False


def _check_domain(model: ModelSpec, x: np.ndarray, eps_prev: np.ndarray | None, first_index: int):
    if model.link.kind != "polynomial" or not np.any(x < 0):
        return
    pos = np.unravel_index(int(np.argmax(x < 0)), x.shape)
    k = first_index + int(pos[0])
    msg = f"Lambda(sigma_k^2) = {float(x[pos]):.6g} < 0 at k = {k} under a polynomial link"
    if eps_prev is not None:
        e = float(eps_prev[pos])
        msg += f"; eps_(k-1) = {e:.6g}, c = {float(model.c(e)):.6g}, g = {float(model.g(e)):.6g}"
    raise DomainError(msg)


# ---------------------------------------------------------------------------
# Single paths
# ---------------------------------------------------------------------------


@dataclass
class Path:
    """One simulated path ``k = 1..n`` with truncation depth ``M``.

    ``eps`` holds ``eps_{1-M} .. eps_n``; ``state`` holds the matching
    recursion states ``X_{1-M} = 0 .. X_n``.
    """

    model: ModelSpec
    n: int
    depth: int
    eps: np.ndarray
    state: np.ndarray
    lambda_sigma2: np.ndarray
    sigma2: np.ndarray
    y: np.ndarray
    overflow: bool = False

    def row(self, k):
        """Array row of index ``k`` (``k`` may be as small as ``1 - M``)."""
        return np.asarray(k) + self.depth - 1

    @property
    def eps_obs(self) -> np.ndarray:
        """eps_1 .. eps_n."""
        return self.eps[self.depth :]


@dataclass
class CoupledPath:
    """A path and its m-dependent surrogate on the same innovations."""

    base: Path
    m: int
    lambda_sigma2_m: np.ndarray
    sigma2_m: np.ndarray
    y_m: np.ndarray
    residual: np.ndarray

    def identity_terms(self) -> tuple[np.ndarray, np.ndarray]:
        """``prod_{j=1}^m c(eps_{k-j})`` and the state ``X_{k-m}`` for every k.

        The residual equals their product; ``X_{k-m}`` is the state the
        recursion held at index ``k - m`` (the depth-``(M-m)`` series when
        ``k = 1``).
        """
        base, m, n = self.base, self.m, self.base.n
        M = base.depth
        prod = np.ones(n)
        for j in range(1, m + 1):
            prod *= base.model.c(base.eps[M - j : M - j + n])
        lag = base.state[M - m : M - m + n]
        return prod, lag

    def identity_deviation(self) -> float:
        """max_k |residual_k - prod_c * X_{k-m}| / (1 + |residual_k|)."""
        prod, lag = self.identity_terms()
        return float(np.max(np.abs(self.residual - prod * lag) / (1.0 + np.abs(self.residual))))


def _generate_rows(model: ModelSpec, rows: int, seed: SeedSpec) -> np.ndarray:
    return model.innovation.sample(seed.generator(), rows)


def simulate_path(model: ModelSpec, n: int, depth: int | None = None, seed=0, change=None) -> Path:
    """Simulate ``y_1..y_n`` from the depth-``M`` truncated stationary series.

    Parameters
    ----------
    model : ModelSpec
    n : int
        Path length.
    depth : int, optional
        Truncation depth ``M``; defaults to :func:`default_depth`.
    seed : int or SeedSpec
    change : tuple (k_star, ModelSpec), optional
        Use the second model's coefficients for innovations with index
        ``>= k_star`` (so ``X_{k_star + 1}`` is the first changed state).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    M = default_depth(model) if depth is None else int(depth)
    if M < 1:
        raise ValueError("truncation depth must be >= 1")
    seed = as_seed(seed, "path")
    eps = _generate_rows(model, M + n, seed)
    cv, gv = _coefficients(model, eps[:, None], 1 - M, change)
    state = np.empty((M + n, 1))
    _advance(cv, gv, np.zeros(1), state)
    state = state[:, 0]
    x = state[M:]
    _check_domain(model, state[1:], eps[:-1], 2 - M)
    sigma2, overflow = _to_sigma2(model, x)
    y = np.sqrt(sigma2) * eps[M:]
    return Path(model, n, M, eps, state, x, sigma2, y, overflow)


def simulate_coupled(model: ModelSpec, n: int, m: int, depth: int | None = None, seed=0) -> CoupledPath:
    """Path plus the surrogate ``Lambda(sigma_km^2) = sum_{i<=m} g(eps_{k-i}) prod_{j<i} c(eps_{k-j})``.

    The surrogate reuses the innovations of :func:`simulate_path` with the
    same seed, so ``y_km`` depends on ``eps_k, .., eps_{k-m}`` only.  The
    default depth is raised to ``m`` when the truncation depth is shorter.
    """
    if depth is None and m >= 1:
        depth = max(default_depth(model), int(m))
    base = simulate_path(model, n, depth, seed)
    M = base.depth
    if not 1 <= m <= M:
        raise ValueError(f"need 1 <= m <= M = {M}, got m = {m}")
    xm = np.zeros(n)
    for i in range(m, 0, -1):
        e = base.eps[M - i : M - i + n]
        xm = model.c(e) * xm + model.g(e)
    _check_domain(model, xm[None, :], None, 1)
    sigma2_m, _ = _to_sigma2(model, xm)
    y_m = np.sqrt(sigma2_m) * base.eps_obs
    return CoupledPath(base, m, xm, sigma2_m, y_m, base.lambda_sigma2 - xm)


# ---------------------------------------------------------------------------
# Replicate blocks
# ---------------------------------------------------------------------------


def stream_paths(model: ModelSpec, n: int, reps: int, gen: np.random.Generator, consumer, depth: int, change=None, chunk: int = TIME_CHUNK) -> bool:
    """Simulate ``reps`` independent paths chunk by chunk in time.

    ``consumer(k0, eps, sigma2, y)`` receives arrays of shape ``(T, reps)``
    for indices ``k0 .. k0 + T - 1``.  Innovations are drawn time-major in
    fixed chunks, so results depend only on ``gen`` and the arguments.
    Returns the overflow flag.
    """
    # deterministic state when both coefficients are constant
    c0, g0 = model.c.constant, model.g.constant
    fixed = change is None and c0 is not None and g0 is not None
    x = np.zeros(1 if fixed else reps)
    overflow = False

    def step(k, T):
        eps = model.innovation.sample(gen, (T, reps))
        if fixed:
            out = np.empty((T, 1))
            _advance(np.full((T, 1), c0), np.full((T, 1), g0), x, out)
        else:
            cv, gv = _coefficients(model, eps, k, change)
            out = np.empty((T, reps))
            _advance(cv, gv, x, out)
        return eps, out

    # burn-in rows k = 1-M .. 0, then observed rows aligned at k = 1
    for k in range(1 - depth, 1, chunk):
        step(k, min(chunk, 1 - k))
    for k in range(1, n + 1, chunk):
        eps, xs = step(k, min(chunk, n + 1 - k))
        _check_domain(model, xs, None, k)
        sigma2, of = _to_sigma2(model, xs)
        sigma2 = np.broadcast_to(sigma2, eps.shape)
        overflow |= of
        consumer(k, eps, sigma2, np.sqrt(sigma2) * eps)
    return overflow


@dataclass
class StationaryDraws:
    """Independent draws of ``(eps_1, X_1, sigma_1^2, y_1)``, one per replicate path."""

    eps: np.ndarray
    lambda_sigma2: np.ndarray
    sigma2: np.ndarray
    y: np.ndarray
    depth: int


def stationary_draws(model: ModelSpec, size: int, seed=0, depth: int | None = None, block: int = 65536) -> StationaryDraws:
    """``size`` independent stationary draws (the index-1 value of independent paths)."""
    M = default_depth(model) if depth is None else int(depth)
    seed = as_seed(seed, "stationary")
    parts = []
    for i, start in enumerate(range(0, size, block)):
        B = min(block, size - start)
        gen = seed.child(f"block-{i}").generator()
        x = np.zeros(B)
        for t0 in range(0, M, TIME_CHUNK):
            T = min(TIME_CHUNK, M - t0)
            eps = model.innovation.sample(gen, (T, B))
            cv, gv = _coefficients(model, eps, 0, None)
            _advance(cv, gv, x, np.empty((T, B)))
        e1 = model.innovation.sample(gen, B)
        parts.append((e1, x))
    eps = np.concatenate([p[0] for p in parts])
    x = np.concatenate([p[1] for p in parts])
    _check_domain(model, x[None, :], None, 1)
    sigma2, _ = _to_sigma2(model, x)
    return StationaryDraws(eps, x, sigma2, np.sqrt(sigma2) * eps, M)


@dataclass
class CouplingDraws:
    """Replicate draws at one index ``k`` of the exact and surrogate values.

    Rows of the ``(len(m), reps)`` arrays follow ``m_values``.
    """

    m_values: np.ndarray
    eps: np.ndarray
    x: np.ndarray
    x_m: np.ndarray
    prod_c: np.ndarray
    x_lag: np.ndarray
    sum_log_c: np.ndarray


def coupling_draws(model: ModelSpec, m_values, reps: int, gen: np.random.Generator, depth: int, index: int | None = None) -> CouplingDraws:
    """Exact and m-dependent values of ``Lambda(sigma_k^2)`` at ``k = index``.

    ``index`` defaults to ``M``, which gives the exact value a converged
    left context of depth ``2M - 1``.  ``m = 0`` denotes the empty surrogate
    ``Lambda(sigma_k0^2) = 0``.
    """
    m_values = np.asarray(m_values, dtype=int)
    M = int(depth)
    k = M if index is None else int(index)
    if m_values.min() < 0 or m_values.max() > M + k - 1:
        raise ValueError("m values must lie in [0, M + k - 1]")
    rows = M + k - 1
    eps = model.innovation.sample(gen, (rows + 1, reps))
    cv, gv = _coefficients(model, eps[:rows], 1 - M, None)
    states = np.empty((rows, reps))
    x = np.zeros(reps)
    _advance(cv, gv, x, states)
    # backward accumulation over eps_{k-1}, eps_{k-2}, ...
    m_max = int(m_values.max())
    want = {int(m): i for i, m in enumerate(m_values)}
    shape = (len(m_values), reps)
    x_m, prod_c, x_lag, sum_log = (np.empty(shape) for _ in range(4))
    s = np.zeros(reps)
    p = np.ones(reps)
    lsum = np.zeros(reps)
    if 0 in want:
        j = want[0]
        x_m[j], prod_c[j], sum_log[j], x_lag[j] = 0.0, 1.0, 0.0, x
    with np.errstate(divide="ignore"):
        for i in range(1, m_max + 1):
            r = rows - i
            s += p * gv[r]
            p *= cv[r]
            lsum += np.log(np.abs(cv[r]))
            if i in want:
                j = want[i]
                x_m[j], prod_c[j], sum_log[j] = s, p, lsum
                x_lag[j] = states[r]
    return CouplingDraws(m_values, eps[rows], x, x_m, prod_c, x_lag, sum_log)
