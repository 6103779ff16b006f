"""Residual cost of polynomial fits on index intervals.

The segment cost H(y, I) is the squared l2 residual of the best
least-squares fit of a degree <= r polynomial in the design points i/n,
i in I, to the data restricted to I.  Two engines compute it:

* the *moment engine* (`build_moment_table` + `segment_rss`): prefix sums
  of design-point powers and data cross terms, kept in compensated
  double-double form, answer any interval query in O(r^3);
* the *exact engine* (`segment_rss_exact`): an explicit orthogonal
  factorization of the interval's design matrix, O(|I| r^2) per call.

Both re-center every interval at its midpoint and scale the design points
to [-1, 1] before solving; the projection target only depends on the
column space, so the value of H is unchanged while the conditioning
becomes benign.  Intervals are 1-based and half-open: [start, end) covers
data indices start..end-1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._quad import (
    compensated_cumsum,
    dd_add,
    dd_div_ints,
    dd_mul,
    dd_mul_f64,
    dd_sub,
    two_prod,
)
from .errors import ConfigError, InputError

DEGREE_CEILING = 8

# Accuracy contract of the moment engine: agreement with the exact engine
# to 1e-8 relative is only claimed inside this envelope; beyond it,
# `segment_rss` transparently delegates to the exact engine.
MOMENT_CONTRACT_MAX_N = 100_000
MOMENT_CONTRACT_MAX_DEGREE = 3

# Interval length below which segment moments are accumulated directly
# from the stored data instead of differencing global prefix sums.  Short,
# far-from-origin intervals lose too many leading digits in the binomial
# re-centering even at double-double precision; direct accumulation is
# both cheaper and exact-to-eps there.
DIRECT_PATH_MAX = 512


@dataclass(frozen=True)
class Interval:
    """Half-open 1-based index range [start, end)."""

    start: int
    end: int

    def __post_init__(self):
        if not (1 <= self.start < self.end):
            raise InputError(f"invalid interval [{self.start}, {self.end})")

    @property
    def length(self) -> int:
        return self.end - self.start


@dataclass
class MomentTable:
    """Prefix sums enabling O(r^3) interval residual costs.

    ``power_hi/power_lo[p, t]`` hold sum_{i<=t} (i/n)^p for p = 0..2r,
    ``cross_hi/cross_lo[p, t]`` hold sum_{i<=t} (i/n)^p * y_i for p = 0..r
    and ``sq_hi/sq_lo[t]`` holds sum_{i<=t} y_i^2, each as a compensated
    (hi, lo) pair with entry 0 equal to 0.  Immutable after construction
    and safe to share across threads.
    """

    n: int
    degree: int
    power_hi: np.ndarray
    power_lo: np.ndarray
    cross_hi: np.ndarray
    cross_lo: np.ndarray
    sq_hi: np.ndarray
    sq_lo: np.ndarray
    y: np.ndarray = field(repr=False)


def _validate_degree(degree: int) -> None:
    if not (0 <= degree <= DEGREE_CEILING):
        raise ConfigError(
            f"degree {degree} outside the supported range 0..{DEGREE_CEILING}"
        )


def _as_data(y) -> np.ndarray:
    arr = np.ascontiguousarray(y, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise InputError("data must be a nonempty 1-d sequence")
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr))[0]) + 1
        raise InputError(f"non-finite data value at position {bad}")
    return arr


def build_moment_table(y, degree: int) -> MomentTable:
    """Build the prefix-moment table for data ``y`` and a degree ceiling.

    O(n * degree) work and memory.  Per-index terms (i/n)^p are formed in
    double-double arithmetic and accumulated with a compensated running
    sum, so interval differences retain ~2x working precision.
    """
    _validate_degree(degree)
    arr = _as_data(y)
    n = arr.size

    idx = np.arange(1, n + 1, dtype=np.float64)
    x_hi, x_lo = dd_div_ints(idx, float(n))

    n_pow = 2 * degree + 1
    power_hi = np.zeros((n_pow, n + 1))
    power_lo = np.zeros((n_pow, n + 1))
    cross_hi = np.zeros((degree + 1, n + 1))
    cross_lo = np.zeros((degree + 1, n + 1))

    p_hi = np.ones(n)
    p_lo = np.zeros(n)
    for p in range(n_pow):
        if p > 0:
            p_hi, p_lo = dd_mul(p_hi, p_lo, x_hi, x_lo)
        power_hi[p, 1:], power_lo[p, 1:] = compensated_cumsum(p_hi, p_lo)
        if p <= degree:
            t_hi, t_lo = dd_mul_f64(p_hi, p_lo, arr)
            cross_hi[p, 1:], cross_lo[p, 1:] = compensated_cumsum(t_hi, t_lo)

    sq_t_hi, sq_t_lo = two_prod(arr, arr)
    sq_hi = np.zeros(n + 1)
    sq_lo = np.zeros(n + 1)
    sq_hi[1:], sq_lo[1:] = compensated_cumsum(sq_t_hi, sq_t_lo)

    return MomentTable(
        n=n,
        degree=degree,
        power_hi=power_hi,
        power_lo=power_lo,
        cross_hi=cross_hi,
        cross_lo=cross_lo,
        sq_hi=sq_hi,
        sq_lo=sq_lo,
        y=arr,
    )


def _check_interval(interval: Interval, n: int) -> None:
    if interval.end > n + 1:
        raise InputError(
            f"interval [{interval.start}, {interval.end}) exceeds series length {n}"
        )


def _solve_normal(gram: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    # Rank-revealing minimum-norm fallback: the residual is well defined
    # even when the normal matrix is numerically singular.
    try:
        return np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError:
        return np.linalg.lstsq(gram, rhs, rcond=None)[0]


def _centered_scaled_u(start: int, end: int, n: int) -> np.ndarray:
    m = end - start
    center = 0.5 * (start + end - 1)
    half = 0.5 * (m - 1) if m > 1 else 0.5
    return (np.arange(start, end, dtype=np.float64) - center) / half


def _rss_direct(y: np.ndarray, start: int, end: int, degree: int) -> float:
    seg = y[start - 1 : end - 1]
    offset = seg.mean()  # constants are in the fit space; stabilizes sq - fit
    z = seg - offset
    u = _centered_scaled_u(start, end, y.size)
    design = np.vander(u, degree + 1, increasing=True)
    gram = design.T @ design
    rhs = design.T @ z
    beta = _solve_normal(gram, rhs)
    rss = float(z @ z) - float(beta @ rhs)
    return max(rss, 0.0)


def _rss_from_prefix(table: MomentTable, start: int, end: int) -> float:
    r = table.degree
    n = table.n
    m = end - start
    c = (start + end - 1) / (2.0 * n)
    h = (m - 1) / (2.0 * n)

    # Powers of -c in double-double, shared by both re-centerings.
    n_pow = 2 * r + 1
    cpow_hi = np.empty(n_pow)
    cpow_lo = np.empty(n_pow)
    cpow_hi[0], cpow_lo[0] = 1.0, 0.0
    for q in range(1, n_pow):
        cpow_hi[q], cpow_lo[q] = dd_mul_f64(cpow_hi[q - 1], cpow_lo[q - 1], -c)

    raw_hi = np.empty(n_pow)
    raw_lo = np.empty(n_pow)
    for p in range(n_pow):
        raw_hi[p], raw_lo[p] = dd_sub(
            table.power_hi[p, end - 1],
            table.power_lo[p, end - 1],
            table.power_hi[p, start - 1],
            table.power_lo[p, start - 1],
        )
    crs_hi = np.empty(r + 1)
    crs_lo = np.empty(r + 1)
    for p in range(r + 1):
        crs_hi[p], crs_lo[p] = dd_sub(
            table.cross_hi[p, end - 1],
            table.cross_lo[p, end - 1],
            table.cross_hi[p, start - 1],
            table.cross_lo[p, start - 1],
        )

    def centered(p: int, src_hi, src_lo):
        # sum_i (x_i - c)^p by binomial expansion of the raw moments
        acc_hi, acc_lo = 0.0, 0.0
        for q in range(p + 1):
            t_hi, t_lo = dd_mul(src_hi[q], src_lo[q], cpow_hi[p - q], cpow_lo[p - q])
            t_hi, t_lo = dd_mul_f64(t_hi, t_lo, float(math.comb(p, q)))
            acc_hi, acc_lo = dd_add(acc_hi, acc_lo, t_hi, t_lo)
        return acc_hi + acc_lo

    hp = h ** np.arange(n_pow)
    gram = np.empty((r + 1, r + 1))
    mu = np.array([centered(p, raw_hi, raw_lo) for p in range(n_pow)])
    for j in range(r + 1):
        for k in range(j, r + 1):
            gram[j, k] = gram[k, j] = mu[j + k] / hp[j + k]

    rhs = np.array(
        [centered(p, crs_hi, crs_lo) / hp[p] for p in range(r + 1)]
    )

    sq_hi, sq_lo = dd_sub(
        table.sq_hi[end - 1],
        table.sq_lo[end - 1],
        table.sq_hi[start - 1],
        table.sq_lo[start - 1],
    )

    beta = _solve_normal(gram, rhs)
    rss = (sq_hi + sq_lo) - float(beta @ rhs)
    return max(rss, 0.0)


def segment_rss(table: MomentTable, interval: Interval) -> float:
    """H(y, I) from the prefix-moment table.

    Returns exactly 0.0 when |I| <= degree + 1 (the fit space contains the
    interpolant).  Outside the documented accuracy envelope (n <= 1e5,
    degree <= 3) the call transparently delegates to the exact engine.
    """
    _check_interval(interval, table.n)
    m = interval.length
    if m <= table.degree + 1:
        return 0.0
    if table.degree > MOMENT_CONTRACT_MAX_DEGREE or table.n > MOMENT_CONTRACT_MAX_N:
        return segment_rss_exact(table.y, interval, table.degree)
    if m <= DIRECT_PATH_MAX:
        return _rss_direct(table.y, interval.start, interval.end, table.degree)
    return _rss_from_prefix(table, interval.start, interval.end)


def segment_rss_exact(y, interval: Interval, degree: int) -> float:
    """Reference engine: H(y, I) via orthogonal factorization, O(|I| r^2).

    Serves as the accuracy oracle for the moment engine and as the cost
    backend of the ``exact`` solver mode.
    """
    _validate_degree(degree)
    arr = np.asarray(y, dtype=np.float64)
    _check_interval(interval, arr.size)
    m = interval.length
    if m <= degree + 1:
        return 0.0
    seg = arr[interval.start - 1 : interval.end - 1]
    u = _centered_scaled_u(interval.start, interval.end, arr.size)
    design = np.vander(u, degree + 1, increasing=True)
    beta, *_ = np.linalg.lstsq(design, seg, rcond=None)
    resid = seg - design @ beta
    return float(resid @ resid)


def q_gain(cost_fn, left: Interval, right: Interval) -> float:
    """Merge gain Q(v; I, J) = H(v, I u J) - H(v, I) - H(v, J).

    ``cost_fn`` maps an Interval to its residual cost; the two intervals
    must be contiguous.  The gain is nonnegative in exact arithmetic, so
    small negative values inside the noise tolerance are clamped to 0.
    """
    if left.end != right.start:
        raise InputError(
            f"intervals [{left.start},{left.end}) and "
            f"[{right.start},{right.end}) are not contiguous"
        )
    h_union = cost_fn(Interval(left.start, right.end))
    gain = h_union - cost_fn(left) - cost_fn(right)
    tol = 1e-8 * max(h_union, 1.0)
    if -tol < gain < 0.0:
        return 0.0
    return gain


@dataclass
class SegmentFit:
    """Least-squares polynomial fit of one interval.

    Coefficients live in the local basis ((x - center)/half_width)^j with
    x = i/n; ``to_global`` re-expands them into plain powers of x.
    """

    interval: Interval
    coefficients: np.ndarray
    center: float
    half_width: float
    rss: float
    n: int

    def fitted_values(self) -> np.ndarray:
        u = _centered_scaled_u(self.interval.start, self.interval.end, self.n)
        return np.vander(u, self.coefficients.size, increasing=True) @ self.coefficients

    def to_global(self) -> np.ndarray:
        """Equivalent coefficients in the global monomial basis x^l."""
        out = np.zeros(self.coefficients.size)
        for j, beta in enumerate(self.coefficients):
            scale = beta / self.half_width**j
            for q in range(j + 1):
                out[q] += scale * math.comb(j, q) * (-self.center) ** (j - q)
        return out


def fit_coefficients(y, interval: Interval, degree: int) -> SegmentFit:
    """Fit one interval and return coefficients alongside the residual.

    Uses the orthogonal-factorization route; rank-deficient intervals
    (|I| <= degree) get the minimum-norm coefficient vector and rss 0.
    """
    _validate_degree(degree)
    arr = np.asarray(y, dtype=np.float64)
    _check_interval(interval, arr.size)
    m = interval.length
    n = arr.size
    seg = arr[interval.start - 1 : interval.end - 1]
    center = 0.5 * (interval.start + interval.end - 1) / n
    half = 0.5 * (m - 1) / n if m > 1 else 0.5 / n
    u = _centered_scaled_u(interval.start, interval.end, n)
    design = np.vander(u, degree + 1, increasing=True)
    beta, *_ = np.linalg.lstsq(design, seg, rcond=None)
    if m <= degree + 1:
        rss = 0.0
    else:
        resid = seg - design @ beta
        rss = float(resid @ resid)
    return SegmentFit(
        interval=interval,
        coefficients=beta,
        center=center,
        half_width=half,
        rss=rss,
        n=n,
    )
