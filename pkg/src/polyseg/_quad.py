"""Compensated (double-double) float helpers for the prefix-moment tables.

Values are carried as (hi, lo) pairs of float64 arrays with ``hi + lo``
representing the value to roughly twice working precision.  Only the
operations the moment engine needs are provided; everything is elementwise
and vectorizes over numpy arrays.
"""

from __future__ import annotations

import numpy as np

_SPLITTER = 1.0 + 2.0**27


def two_sum(a, b):
    """Exact rounding error of a + b: returns (fl(a+b), err)."""
    x = a + b
    z = x - a
    y = (a - (x - z)) + (b - z)
    return x, y


def _split(a):
    c = _SPLITTER * a
    x = c - (c - a)
    return x, a - x


def two_prod(a, b):
    """Exact rounding error of a * b: returns (fl(a*b), err)."""
    x = a * b
    a1, a2 = _split(a)
    b1, b2 = _split(b)
    y = a2 * b2 - (x - a1 * b1 - a2 * b1 - a1 * b2)
    return x, y


def dd_add(x_hi, x_lo, y_hi, y_lo):
    s, e = two_sum(x_hi, y_hi)
    e = e + x_lo + y_lo
    hi, lo = two_sum(s, e)
    return hi, lo


def dd_sub(x_hi, x_lo, y_hi, y_lo):
    return dd_add(x_hi, x_lo, -y_hi, -y_lo)


def dd_mul(x_hi, x_lo, y_hi, y_lo):
    p, e = two_prod(x_hi, y_hi)
    e = e + x_hi * y_lo + x_lo * y_hi
    hi, lo = two_sum(p, e)
    return hi, lo


def dd_mul_f64(x_hi, x_lo, c):
    """(hi, lo) * c for a plain float64 multiplier."""
    p, e = two_prod(x_hi, c)
    e = e + x_lo * c
    hi, lo = two_sum(p, e)
    return hi, lo


def dd_div_ints(i, n):
    """i / n in double-double, for exact-integer-valued float inputs."""
    q = i / n
    p_hi, p_lo = two_prod(q, n)
    r = (i - p_hi) - p_lo
    return q, r / n


def compensated_cumsum(t_hi, t_lo=None):
    """Running sum of a (hi, lo) term stream, error ~ eps^2 per entry.

    Recovers the exact per-step rounding error of the plain cumulative sum
    (Knuth two-sum applied after the fact), then folds the error stream and
    the ``lo`` inputs through a second compensated pass.
    """
    t_hi = np.asarray(t_hi, dtype=np.float64)
    s = np.cumsum(t_hi)
    prev = np.concatenate(([0.0], s[:-1]))
    z = s - prev
    err = (prev - (s - z)) + (t_hi - z)
    res = err if t_lo is None else err + t_lo

    s2 = np.cumsum(res)
    prev2 = np.concatenate(([0.0], s2[:-1]))
    z2 = s2 - prev2
    err2 = (prev2 - (s2 - z2)) + (res - z2)
    lo = s2 + np.cumsum(err2)
    return s, lo
