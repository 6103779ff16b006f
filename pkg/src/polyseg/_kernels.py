"""Kernel backend selection.

The hot scanning loops ship in two equivalent implementations: numba
@njit kernels (default) and pure-numpy fallbacks.  Setting the
environment variable POLYSEG_DISABLE_NUMBA=1 before import, or running
where numba is not importable, selects the fallback.  Both backends are
deterministic for fixed inputs.
"""

from __future__ import annotations

import os

import numpy as np

from ._moments import binomial_table, symmetric_power_table

_DISABLED = os.environ.get("POLYSEG_DISABLE_NUMBA", "").strip().lower() in (
    "1",
    "true",
    "yes",
)

if not _DISABLED:
    try:
        from . import _kernels_numba as _impl

        USING_NUMBA = True
    except ImportError:  # pragma: no cover - exercised only without numba
        from . import _kernels_numpy as _impl

        USING_NUMBA = False
else:
    from . import _kernels_numpy as _impl

    USING_NUMBA = False


def dp_scan(z: np.ndarray, degree: int, lam: float, min_seg_len: int):
    """Run the suffix DP over mean-reduced data; returns (F, counts, ptr)."""
    z = np.ascontiguousarray(z, dtype=np.float64)
    sym = symmetric_power_table(z.size, degree)
    binom = binomial_table(degree)
    return _impl.dp_scan(z, degree, float(lam), int(min_seg_len), sym, binom)


def noise_max(z: np.ndarray, degree: int) -> float:
    """max_I |P_I z|^2 over all intervals of length >= 2."""
    z = np.ascontiguousarray(z, dtype=np.float64)
    sym = symmetric_power_table(z.size, degree)
    binom = binomial_table(degree)
    return float(_impl.noise_max(z, degree, sym, binom))


def backend_name() -> str:
    return "numba" if USING_NUMBA else "numpy"
