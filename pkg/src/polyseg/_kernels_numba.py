"""Numba implementations of the scanning hot loops.

Both kernels sweep segments [s, t) with a fixed anchor s and growing t,
maintaining Kahan-compensated running moments sum (i-s)^p * z_i.  Each
candidate segment is re-centered at its midpoint, where the design-power
sums are the precomputed symmetric table, and solved by a tiny Cholesky
with dead-pivot handling.  fastmath stays off: the compensation sums and
the exact tie comparisons rely on strict IEEE semantics.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_BIG_COUNT = np.int64(1) << 60


@njit(cache=True, nogil=True, inline="always")
def _fit_energy(cmom, comp, m, degree, sym, binom, b, gram, chol, w):
    """Fitted energy |P_I z|^2 of one segment from anchored moments."""
    rp1 = degree + 1
    d = 0.5 * (m - 1)
    # centered, scaled moment vector: b[j] = sum u^j z with u = (i-s-d)/d
    dj = 1.0
    for j in range(rp1):
        acc = 0.0
        pw = 1.0
        for q in range(j, -1, -1):
            acc += binom[j, q] * pw * (cmom[q] - comp[q])
            pw *= -d
        b[j] = acc / dj
        dj *= d
    for j in range(rp1):
        for k in range(rp1):
            gram[j, k] = sym[j + k, m]
    # Cholesky, zeroing directions with negligible pivots
    tol = 1e-9 * gram[0, 0]
    for k in range(rp1):
        a = gram[k, k]
        for t in range(k):
            a -= chol[k, t] * chol[k, t]
        if a > tol:
            chol[k, k] = np.sqrt(a)
        else:
            chol[k, k] = 0.0
        for i in range(k + 1, rp1):
            v = gram[i, k]
            for t in range(k):
                v -= chol[i, t] * chol[k, t]
            chol[i, k] = v / chol[k, k] if chol[k, k] > 0.0 else 0.0
    energy = 0.0
    for k in range(rp1):
        if chol[k, k] > 0.0:
            v = b[k]
            for t in range(k):
                v -= chol[k, t] * w[t]
            w[k] = v / chol[k, k]
            energy += w[k] * w[k]
        else:
            w[k] = 0.0
    return energy


@njit(cache=True, nogil=True)
def dp_scan(z, degree, lam, min_seg_len, sym, binom):
    """Suffix Bellman recursion for the penalized minimal partition.

    F[s] is the optimal cost of segmenting [s, n+1); ties are broken by
    fewest segments, then by the smallest feasible segment end, which
    yields the lexicographically smallest change-point sequence on
    backtracking.  Returns (F, counts, ptr).
    """
    n = z.shape[0]
    rp1 = degree + 1
    F = np.full(n + 2, np.inf)
    counts = np.full(n + 2, _BIG_COUNT, dtype=np.int64)
    ptr = np.zeros(n + 2, dtype=np.int64)
    F[n + 1] = 0.0
    counts[n + 1] = 0

    cmom = np.zeros(rp1)
    comp = np.zeros(rp1)
    b = np.empty(rp1)
    gram = np.empty((rp1, rp1))
    chol = np.zeros((rp1, rp1))
    w = np.empty(rp1)

    for s in range(n, 0, -1):
        best = np.inf
        best_cnt = _BIG_COUNT
        best_t = 0
        for p in range(rp1):
            cmom[p] = 0.0
            comp[p] = 0.0
        sq = 0.0
        sqc = 0.0
        for t in range(s + 1, n + 2):
            i = t - 1
            zi = z[i - 1]
            jof = np.float64(i - s)
            wgt = 1.0
            for p in range(rp1):
                term = wgt * zi
                yv = term - comp[p]
                tv = cmom[p] + yv
                comp[p] = (tv - cmom[p]) - yv
                cmom[p] = tv
                wgt *= jof
            term = zi * zi
            yv = term - sqc
            tv = sq + yv
            sqc = (tv - sq) - yv
            sq = tv

            m = t - s
            if m < min_seg_len:
                continue
            f_tail = F[t]
            if f_tail == np.inf:
                continue
            if m <= rp1:
                cost = 0.0
            else:
                energy = _fit_energy(cmom, comp, m, degree, sym, binom, b, gram, chol, w)
                cost = (sq - sqc) - energy
                if cost < 0.0:
                    cost = 0.0
            val = cost + lam + f_tail
            cnt = counts[t] + 1
            if val < best or (val == best and cnt < best_cnt):
                best = val
                best_cnt = cnt
                best_t = t
        F[s] = best
        counts[s] = best_cnt
        ptr[s] = best_t
    return F, counts, ptr


@njit(cache=True, nogil=True)
def noise_max(z, degree, sym, binom):
    """max over all intervals |I| >= 2 of the fitted energy |P_I z|^2."""
    n = z.shape[0]
    rp1 = degree + 1
    cmom = np.zeros(rp1)
    comp = np.zeros(rp1)
    b = np.empty(rp1)
    gram = np.empty((rp1, rp1))
    chol = np.zeros((rp1, rp1))
    w = np.empty(rp1)
    best = 0.0
    for s in range(1, n + 1):
        for p in range(rp1):
            cmom[p] = 0.0
            comp[p] = 0.0
        sq = 0.0
        sqc = 0.0
        for t in range(s + 1, n + 2):
            i = t - 1
            zi = z[i - 1]
            jof = np.float64(i - s)
            wgt = 1.0
            for p in range(rp1):
                term = wgt * zi
                yv = term - comp[p]
                tv = cmom[p] + yv
                comp[p] = (tv - cmom[p]) - yv
                cmom[p] = tv
                wgt *= jof
            term = zi * zi
            yv = term - sqc
            tv = sq + yv
            sqc = (tv - sq) - yv
            sq = tv

            m = t - s
            if m < 2:
                continue
            if m <= rp1:
                energy = sq - sqc
            else:
                energy = _fit_energy(cmom, comp, m, degree, sym, binom, b, gram, chol, w)
            if energy > best:
                best = energy
    return best
