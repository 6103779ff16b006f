"""Pure-numpy implementations of the scanning hot loops.

Mirrors `_kernels_numba`: for each anchor s the inner scan over segment
ends is vectorized, with batched normal-equation solves.  Slower than the
jitted path by a large constant but dependency-free; selected with
POLYSEG_DISABLE_NUMBA=1.
"""

from __future__ import annotations

import numpy as np

_BIG_COUNT = np.int64(1) << 60


def _batched_costs(zs, degree, min_seg_len, sym, binom):
    """Segment costs H for [s, s+m), m = 1..len(zs), zero where m <= r+1."""
    rp1 = degree + 1
    big_m = zs.size
    offs = np.arange(big_m, dtype=np.float64)
    cm = np.empty((rp1, big_m))
    pw = np.ones(big_m)
    for p in range(rp1):
        if p:
            pw = pw * offs
        cm[p] = np.cumsum(pw * zs)
    sq = np.cumsum(zs * zs)

    lengths = np.arange(1, big_m + 1)
    cost = np.zeros(big_m)
    sel = (lengths > rp1) & (lengths >= min_seg_len)
    if not sel.any():
        return cost
    mm = lengths[sel].astype(np.float64)
    d = 0.5 * (mm - 1.0)
    rhs = np.empty((mm.size, rp1))
    for j in range(rp1):
        acc = np.zeros(mm.size)
        pwd = np.ones(mm.size)
        for q in range(j, -1, -1):
            acc += binom[j, q] * pwd * cm[q][sel]
            pwd = pwd * (-d)
        rhs[:, j] = acc / d**j
    jk = np.add.outer(np.arange(rp1), np.arange(rp1))
    gram = np.ascontiguousarray(np.moveaxis(sym[:, lengths[sel]][jk], -1, 0))
    try:
        beta = np.linalg.solve(gram, rhs[..., None])[..., 0]
    except np.linalg.LinAlgError:
        beta = np.empty_like(rhs)
        for i in range(rhs.shape[0]):
            beta[i] = np.linalg.lstsq(gram[i], rhs[i], rcond=None)[0]
    energy = np.einsum("ij,ij->i", beta, rhs)
    cost[sel] = np.maximum(sq[sel] - energy, 0.0)
    return cost


def dp_scan(z, degree, lam, min_seg_len, sym, binom):
    """Suffix Bellman recursion; same contract as the numba kernel."""
    n = z.shape[0]
    F = np.full(n + 2, np.inf)
    counts = np.full(n + 2, _BIG_COUNT, dtype=np.int64)
    ptr = np.zeros(n + 2, dtype=np.int64)
    F[n + 1] = 0.0
    counts[n + 1] = 0

    for s in range(n, 0, -1):
        cost = _batched_costs(z[s - 1 :], degree, min_seg_len, sym, binom)
        lengths = np.arange(1, n + 2 - s)
        tails = F[s + 1 : n + 2]
        val = cost + lam + tails
        cnt = counts[s + 1 : n + 2] + 1
        feasible = (lengths >= min_seg_len) & np.isfinite(tails)
        if not feasible.any():
            F[s] = np.inf
            counts[s] = _BIG_COUNT
            ptr[s] = 0
            continue
        val = np.where(feasible, val, np.inf)
        vmin = val.min()
        tie = val == vmin
        cmin = cnt[tie].min()
        pick = int(np.flatnonzero(tie & (cnt == cmin))[0])
        F[s] = vmin
        counts[s] = cmin
        ptr[s] = s + 1 + pick
    return F, counts, ptr


def noise_max(z, degree, sym, binom):
    """max over all intervals |I| >= 2 of the fitted energy |P_I z|^2."""
    n = z.shape[0]
    rp1 = degree + 1
    best = 0.0
    for s in range(1, n + 1):
        zs = z[s - 1 :]
        sq = np.cumsum(zs * zs)
        cost = _batched_costs(zs, degree, 1, sym, binom)
        lengths = np.arange(1, n + 2 - s)
        energy = sq - cost
        # short intervals project onto the full space
        energy[lengths <= rp1] = sq[lengths <= rp1]
        valid = lengths >= 2
        if valid.any():
            cand = float(energy[valid].max())
            if cand > best:
                best = cand
    return best
