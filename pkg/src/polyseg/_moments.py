"""Closed-form power sums over symmetric integer grids.

The scanning cost kernels re-center every candidate segment at its
midpoint, where the design offsets form the symmetric ladder
(2t - (m-1))/(m-1), t = 0..m-1.  Their power sums depend only on the
segment length m, so they are tabulated once per series length from
exact Faulhaber polynomials (generated with rational arithmetic at
import time) instead of being accumulated from data.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb

import numpy as np

_MAX_POWER = 16  # supports degree ceilings up to 8


def _bernoulli_plus(count: int) -> list[Fraction]:
    """B_0..B_count with the B_1 = +1/2 convention."""
    bern = [Fraction(0)] * (count + 1)
    bern[0] = Fraction(1)
    for m in range(1, count + 1):
        acc = Fraction(0)
        for j in range(m):
            acc += comb(m + 1, j) * bern[j]
        bern[m] = -acc / (m + 1)
    if count >= 1:
        bern[1] = Fraction(1, 2)
    return bern


def _faulhaber_coeffs(max_power: int) -> list[np.ndarray]:
    """Coefficient arrays of P_p(M) = sum_{k=1..M} k^p, highest power first."""
    bern = _bernoulli_plus(max_power)
    tables = []
    for p in range(max_power + 1):
        coeffs = [Fraction(comb(p + 1, j)) * bern[j] / (p + 1) for j in range(p + 1)]
        # polynomial in M: sum_j coeffs[j] * M^(p+1-j); constant term is 0
        arr = np.array([float(c) for c in coeffs] + [0.0])
        tables.append(arr)
    return tables


_FAULHABER = _faulhaber_coeffs(_MAX_POWER)

# Direct summation below this length; Faulhaber evaluation above it.
_DIRECT_M = 128


def _power_sum(p: int, m_values: np.ndarray) -> np.ndarray:
    """sum_{k=1..M} k^p for an integer array of M values (M >= 0)."""
    coeffs = _FAULHABER[p]
    out = np.zeros(m_values.shape, dtype=np.float64)
    mf = m_values.astype(np.float64)
    for c in coeffs:
        out = out * mf + c
    return out


def symmetric_power_table(n: int, degree: int) -> np.ndarray:
    """Table S[p, m] = sum_{t=0..m-1} ((2t - (m-1))/(m-1))^p.

    p runs over 0..2*degree, m over 0..n.  Odd p rows vanish by symmetry;
    entries for m <= 1 are set to 0 (queries never solve such segments).
    """
    n_pow = 2 * degree + 1
    table = np.zeros((n_pow, n + 1))
    if n >= 1:
        table[0, 1:] = np.arange(1, n + 1, dtype=np.float64)
    if n < 2 or n_pow == 1:
        return table

    for m in range(2, min(_DIRECT_M, n) + 1):
        u = (2.0 * np.arange(m) - (m - 1)) / (m - 1)
        for p in range(2, n_pow, 2):
            table[p, m] = float(np.sum(u**p))

    if n > _DIRECT_M:
        m_big = np.arange(_DIRECT_M + 1, n + 1)
        half_even = (m_big - 1) // 2  # used when m is odd: offsets are even
        for p in range(2, n_pow, 2):
            # m odd: offsets 0, +-2, ..., +-(m-1): 2 * 2^p * P_p((m-1)/2)
            odd_mask = (m_big % 2) == 1
            vals = np.empty(m_big.shape)
            vals[odd_mask] = 2.0 * (2.0**p) * _power_sum(p, half_even[odd_mask])
            # m even: offsets +-1, +-3, ..., +-(m-1):
            # 2 * (P_p(m-1) - 2^p * P_p((m-2)/2))
            even_mask = ~odd_mask
            me = m_big[even_mask]
            vals[even_mask] = 2.0 * (
                _power_sum(p, me - 1) - (2.0**p) * _power_sum(p, (me - 2) // 2)
            )
            table[p, m_big] = vals / (m_big - 1.0) ** p
    return table


def binomial_table(degree: int) -> np.ndarray:
    out = np.zeros((degree + 1, degree + 1))
    for j in range(degree + 1):
        for q in range(j + 1):
            out[j, q] = comb(j, q)
    return out
