"""Local refinement of initial change-point estimators.

Each estimator is rescanned inside a window reaching halfway to its
neighbors: the refined location minimizes the sum of the two one-sided
residual costs over all interior split positions.  Windows overlap by
construction but are processed independently, and the update never
changes the number of estimators.
"""

from __future__ import annotations

import logging

import numpy as np

from .cost import Interval, _validate_degree, segment_rss_exact
from .errors import InputError

logger = logging.getLogger(__name__)


def refinement_windows(initial: list[int], n: int) -> list[tuple[int, int]]:
    """Half-open windows [s_k, e_k) around each initial estimator.

    Midpoints between neighbors (with virtual endpoints 1 and n+1) are
    rounded down; any fixed rounding preserves the separation margins the
    rescan needs, up to one index.
    """
    ext = [1, *initial, n + 1]
    return [
        ((ext[k - 1] + ext[k]) // 2, (ext[k] + ext[k + 1]) // 2)
        for k in range(1, len(ext) - 1)
    ]


def refine_estimators(y, degree: int, initial: list[int]) -> list[int]:
    """Per-window rescan producing the final estimators.

    For each window the split t minimizing H(y, [s,t)) + H(y, [t,e)) is
    taken over t in (s, e), ties to the smallest t; costs use the exact
    engine since windows are local.  An empty input returns an empty list.
    """
    _validate_degree(degree)
    arr = np.asarray(y, dtype=np.float64)
    n = arr.size
    if not initial:
        return []
    if any(not (2 <= t <= n) for t in initial) or any(
        b <= a for a, b in zip(initial[:-1], initial[1:])
    ):
        raise InputError("initial estimators must be strictly increasing within 2..n")

    refined = []
    for (s, e), eta in zip(refinement_windows(initial, n), initial):
        if e - s <= 1:
            logger.warning(
                "degenerate refinement window [%d, %d); keeping estimator %d", s, e, eta
            )
            refined.append(eta)
            continue
        best_t = -1
        best = np.inf
        for t in range(s + 1, e):
            val = segment_rss_exact(arr, Interval(s, t), degree) + segment_rss_exact(
                arr, Interval(t, e), degree
            )
            if val < best:
                best = val
                best_t = t
        refined.append(best_t)

    if any(b <= a for a, b in zip(refined[:-1], refined[1:])):
        logger.warning("refined estimators out of order; sorting: %s", refined)
        refined.sort()
    return refined
