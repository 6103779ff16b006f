"""Ground-truth piecewise-polynomial mean functions.

A signal stores per-segment global-monomial coefficients in x = i/n plus
the change-point indices (each the first index of its segment).  The
module also provides the per-change-point difficulty quantities (segment
spacing, order-wise jump sizes and signal strengths, the active order
selected by the rate expression) and the paired two-point instances used
to probe localization limits, together with their exact Gaussian
Kullback-Leibler divergence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from .cost import _validate_degree
from .errors import InputError

# Order-wise coefficient gaps below this relative size are treated as
# exact zeros: re-centering two global representations of the same smooth
# piece leaves last-bit residue that must not register as a jump.
ZERO_JUMP_RTOL = 1e-11


@dataclass(frozen=True)
class PiecewiseSignal:
    """Piecewise polynomial mean on the grid i/n, right-continuous pieces."""

    n: int
    degree: int
    change_points: tuple[int, ...]
    coefficients: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        _validate_degree(self.degree)
        if self.n < 1:
            raise InputError("signal length must be >= 1")
        prev = 1
        for cp in self.change_points:
            if not (2 <= cp <= self.n and cp > prev):
                raise InputError(
                    "change points must be strictly increasing within "
                    f"2..{self.n}: got {self.change_points}"
                )
            prev = cp
        if len(self.coefficients) != len(self.change_points) + 1:
            raise InputError(
                f"need {len(self.change_points) + 1} coefficient rows, "
                f"got {len(self.coefficients)}"
            )
        for row in self.coefficients:
            if len(row) != self.degree + 1:
                raise InputError(
                    f"each segment needs {self.degree + 1} coefficients"
                )
            if not all(math.isfinite(c) for c in row):
                raise InputError("non-finite coefficient")
        for k in range(1, len(self.change_points) + 1):
            left, right = reparameterize_at(self, k)
            if not np.any(_snapped_gaps(left, right) > 0):
                raise InputError(
                    f"segments around change point #{k} carry the same "
                    "polynomial; not a change point"
                )

    @property
    def k(self) -> int:
        return len(self.change_points)

    def segment_bounds(self) -> list[tuple[int, int]]:
        edges = [1, *self.change_points, self.n + 1]
        return list(zip(edges[:-1], edges[1:]))


def taylor_shift(coeffs, x0: float) -> np.ndarray:
    """Re-expand a polynomial around x0: powers of x -> powers of (x - x0)."""
    c = np.asarray(coeffs, dtype=np.float64)
    out = np.zeros_like(c)
    for m, cm in enumerate(c):
        for l in range(m + 1):
            out[l] += cm * math.comb(m, l) * x0 ** (m - l)
    return out


def _snapped_gaps(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    gaps = np.abs(left - right)
    scale = np.maximum(1.0, np.maximum(np.abs(left), np.abs(right)))
    gaps[gaps <= ZERO_JUMP_RTOL * scale] = 0.0
    return gaps


def evaluate_mean(signal: PiecewiseSignal) -> np.ndarray:
    """The mean sequence f(i/n), i = 1..n, each index owned by its segment."""
    x = np.arange(1, signal.n + 1, dtype=np.float64) / signal.n
    out = np.empty(signal.n)
    for (start, end), coeffs in zip(signal.segment_bounds(), signal.coefficients):
        out[start - 1 : end - 1] = npoly.polyval(x[start - 1 : end - 1], coeffs)
    return out


def reparameterize_at(signal: PiecewiseSignal, k: int):
    """Both adjacent segments' coefficients re-centered at change point k.

    Returns (left, right) coefficient vectors in powers of (x - eta_k/n);
    evaluating either at the original grid reproduces the segment values.
    """
    if not (1 <= k <= signal.k):
        raise InputError(f"change point index {k} out of range 1..{signal.k}")
    x0 = signal.change_points[k - 1] / signal.n
    left = taylor_shift(signal.coefficients[k - 1], x0)
    right = taylor_shift(signal.coefficients[k], x0)
    return left, right


@dataclass(frozen=True)
class JumpProfile:
    """Difficulty quantities attached to one change point."""

    k: int
    n: int
    delta: int
    left: tuple[float, ...]
    right: tuple[float, ...]
    kappa: tuple[float, ...]
    rho_by_order: tuple[float, ...]
    rho: float
    l_k: int


def jump_profile(signal: PiecewiseSignal, k: int) -> JumpProfile:
    """Spacing, order-wise jumps and signal strengths at change point k.

    delta is the smaller distance to the neighboring change points (with
    virtual endpoints 1 and n+1); the strength at order l is
    kappa_l^2 * delta^(2l+1) / n^(2l), maximized at the leading order l_k.
    """
    edges = [1, *signal.change_points, signal.n + 1]
    eta = edges[k]
    delta = min(eta - edges[k - 1], edges[k + 1] - eta)
    left, right = reparameterize_at(signal, k)
    kappa = _snapped_gaps(left, right)
    orders = np.arange(signal.degree + 1)
    rho = kappa**2 * float(delta) ** (2 * orders + 1) / float(signal.n) ** (2 * orders)
    l_k = int(np.argmax(rho))
    return JumpProfile(
        k=k,
        n=signal.n,
        delta=int(delta),
        left=tuple(left),
        right=tuple(right),
        kappa=tuple(kappa),
        rho_by_order=tuple(rho),
        rho=float(rho.max()),
        l_k=l_k,
    )


@dataclass(frozen=True)
class ActiveOrder:
    """Orders whose strength clears the penalty threshold, and the winner."""

    k: int
    threshold: float
    active: tuple[int, ...]
    r_k: int | None
    kappa_k: float | None


def active_order(
    profile: JumpProfile, lam: float, c_signal: float, sigma: float = 1.0
) -> ActiveOrder:
    """Threshold the order-wise strengths and pick the rate-minimizing order.

    Among active orders l the selector (sigma^2 log n / rho_l)^(1/(2l+1))
    is minimized, ties to the smallest order; an empty active set means
    the signal-strength condition failed at this change point.
    """
    if lam <= 0 or c_signal <= 0:
        raise InputError("lam and c_signal must be positive")
    threshold = c_signal * lam
    active = tuple(
        l for l, r in enumerate(profile.rho_by_order) if r >= threshold
    )
    if not active:
        return ActiveOrder(profile.k, threshold, (), None, None)
    log_n = math.log(profile.n)
    vals = {
        l: (sigma**2 * log_n / profile.rho_by_order[l]) ** (1.0 / (2 * l + 1))
        for l in active
    }
    best = min(vals.values())
    r_k = min(l for l, v in vals.items() if v == best)
    return ActiveOrder(profile.k, threshold, active, r_k, profile.kappa[r_k])


def shifted_power_coeffs(kappa: float, center: float, degree: int) -> tuple[float, ...]:
    """Global-monomial coefficients of kappa * (x - center)^degree."""
    return tuple(
        kappa * math.comb(degree, q) * (-center) ** (degree - q)
        for q in range(degree + 1)
    )


def exact_kl(p0: PiecewiseSignal, p1: PiecewiseSignal, sigma: float) -> float:
    """KL divergence of two equal-variance Gaussian product measures."""
    if sigma <= 0:
        raise InputError("sigma must be positive for the KL computation")
    d = evaluate_mean(p0) - evaluate_mean(p1)
    return float(np.sum(d * d) / (2.0 * sigma**2))


@dataclass(frozen=True)
class LowerBoundInstance:
    """Two-point pair with its exact KL and the audited closed-form bound."""

    kind: str
    p0: PiecewiseSignal
    p1: PiecewiseSignal
    kl: float
    bound: float
    spacing: int
    shift: int


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise InputError(message)


def lower_bound_instance(
    kind: str,
    *,
    kappa: float,
    sigma: float,
    degree: int,
    n: int,
    spacing: int | None = None,
    shift: int | None = None,
    xi: float | None = None,
) -> LowerBoundInstance:
    """Construct a two-point instance family.

    kind "lemma1": one change point at spacing+1 versus the same mean
    started shift indices later; requires spacing <= n/4, 0 <= shift <=
    spacing.  kind "lemma2": change point at spacing+1 versus mirrored at
    n-spacing+1, with spacing derived from the consistency-barrier budget
    xi.  kind "lemma3": like lemma1 but the later mean is the re-centered
    power, so both signals are smooth to order degree-1 at their change
    points; requires degree >= 1.

    The returned KL is the exact Gaussian value sum (mu_i - nu_i)^2 /
    (2 sigma^2); the bound field carries the matching closed-form upper
    bound obtained by integral comparison of the power sums.
    """
    _validate_degree(degree)
    _require(kappa > 0, "kappa must be positive")
    _require(sigma > 0, "sigma must be positive")
    _require(n >= 4, "n must be at least 4")
    zeros = tuple([0.0] * (degree + 1))
    two_r = 2 * degree

    if kind == "lemma1" or kind == "lemma3":
        _require(spacing is not None, f"{kind} requires spacing")
        _require(shift is not None, f"{kind} requires shift")
        _require(1 <= spacing, "spacing must be >= 1")
        _require(spacing <= n // 4, f"constraint violated: spacing <= n/4 (n={n})")
        _require(0 <= shift <= spacing, "constraint violated: 0 <= shift <= spacing")
        if kind == "lemma3":
            _require(degree >= 1, "lemma3 requires degree >= 1")
        # lemma1 anchors the power at the knot spacing/n and reuses the same
        # polynomial for the shifted signal (a full-order jump family);
        # lemma3 anchors each power at its own change point, so both
        # signals match below the top order exactly.
        if kind == "lemma1":
            poly0 = shifted_power_coeffs(kappa, spacing / n, degree)
        else:
            poly0 = shifted_power_coeffs(kappa, (spacing + 1) / n, degree)
        p0 = PiecewiseSignal(n, degree, (spacing + 1,), (zeros, poly0))
        if shift == 0:
            p1 = p0
        elif kind == "lemma1":
            p1 = PiecewiseSignal(n, degree, (spacing + shift + 1,), (zeros, poly0))
        else:
            poly1 = shifted_power_coeffs(kappa, (spacing + shift + 1) / n, degree)
            p1 = PiecewiseSignal(n, degree, (spacing + shift + 1,), (zeros, poly1))
        kl = exact_kl(p0, p1, sigma)
        bound = (
            kappa**2
            * (shift + 1) ** (two_r + 1)
            / (2 * (two_r + 1) * sigma**2 * n**two_r)
        )
        if kind == "lemma3":
            tail = n - spacing - shift + 1
            extra = 0.0
            for l in range(degree):
                extra += (
                    math.comb(degree, l) ** 2
                    * shift ** (2 * degree - 2 * l)
                    * tail ** (2 * l + 1)
                    / (2 * l + 1)
                )
            bound += degree * kappa**2 * extra / (2 * sigma**2 * n**two_r)
        return LowerBoundInstance(kind, p0, p1, kl, bound, spacing, shift)

    if kind == "lemma2":
        _require(xi is not None and xi > 0, "lemma2 requires xi > 0")
        derived = int(
            math.floor((xi * n**two_r * sigma**2 / kappa**2) ** (1.0 / (two_r + 1)))
        )
        spacing = min(derived, n // 3)
        _require(
            spacing >= 1,
            f"constraint violated: derived spacing {derived} < 1 (xi too small)",
        )
        p0 = PiecewiseSignal(
            n,
            degree,
            (spacing + 1,),
            (shifted_power_coeffs(kappa, spacing / n, degree), zeros),
        )
        p1 = PiecewiseSignal(
            n,
            degree,
            (n - spacing + 1,),
            (zeros, shifted_power_coeffs(kappa, (n - spacing) / n, degree)),
        )
        kl = exact_kl(p0, p1, sigma)
        bound = (
            kappa**2
            * (spacing + 1) ** (two_r + 1)
            / ((two_r + 1) * sigma**2 * n**two_r)
        )
        return LowerBoundInstance(kind, p0, p1, kl, bound, spacing, 0)

    raise InputError(f"unknown lower-bound kind {kind!r}")


def _eta_from_position(position: float, n: int) -> int:
    eta = int(round(position * n))
    _require(2 <= eta <= n, f"position {position} maps outside 2..{n}")
    return eta


def make_scenario(template: str, n: int, params: dict) -> PiecewiseSignal:
    """Canned signal families used by the simulation harness.

    Templates: "stepLadder" (piecewise constant ladder), "linearKink"
    (continuous, slope change kappa), "linearJump" (level shift kappa0,
    slope unchanged), "mixedOrder" (chosen smoothness order per change
    point), "lowerBound" (one side of a two-point instance).
    """
    _require(n >= 2, "n must be >= 2")
    params = dict(params)

    if template == "stepLadder":
        k = int(params.pop("K", 1))
        _require(k >= 1, "stepLadder needs K >= 1")
        jump = float(params.pop("jump", 4.0))
        base = float(params.pop("base", 0.0))
        degree = int(params.pop("degree", 0))
        levels = params.pop("levels", None)
        _require(not params, f"unknown stepLadder params: {sorted(params)}")
        if levels is None:
            levels = [base + jump * i for i in range(k + 1)]
        _require(len(levels) == k + 1, "stepLadder needs K+1 levels")
        cps = tuple(i * n // (k + 1) + 1 for i in range(1, k + 1))
        coeffs = tuple(
            (float(lv),) + (0.0,) * degree for lv in levels
        )
        return PiecewiseSignal(n, degree, cps, coeffs)

    if template == "linearKink":
        kappa = float(params.pop("kappa"))
        position = float(params.pop("position", 0.5))
        level = float(params.pop("level", 0.0))
        slope = float(params.pop("slope", 0.0))
        _require(not params, f"unknown linearKink params: {sorted(params)}")
        _require(kappa != 0, "linearKink needs kappa != 0")
        eta = _eta_from_position(position, n)
        x0 = eta / n
        left = (level - slope * x0, slope)
        right = (level - (slope + kappa) * x0, slope + kappa)
        return PiecewiseSignal(n, 1, (eta,), (left, right))

    if template == "linearJump":
        kappa0 = float(params.pop("kappa0"))
        position = float(params.pop("position", 0.5))
        level = float(params.pop("level", 0.0))
        slope = float(params.pop("slope", 0.0))
        _require(not params, f"unknown linearJump params: {sorted(params)}")
        _require(kappa0 != 0, "linearJump needs kappa0 != 0")
        eta = _eta_from_position(position, n)
        left = (level, slope)
        right = (level + kappa0, slope)
        return PiecewiseSignal(n, 1, (eta,), (left, right))

    if template == "mixedOrder":
        degree = int(params.pop("degree"))
        orders = [int(o) for o in params.pop("orders")]
        sizes = params.pop("sizes", None)
        base = float(params.pop("base", 0.0))
        _require(not params, f"unknown mixedOrder params: {sorted(params)}")
        k = len(orders)
        _require(k >= 1, "mixedOrder needs at least one change point")
        _require(all(0 <= d <= degree for d in orders), "orders must lie in 0..degree")
        if sizes is None:
            sizes = [4.0] * k
        _require(len(sizes) == k, "need one size per change point")
        cps = tuple(i * n // (k + 1) + 1 for i in range(1, k + 1))
        coeffs = [np.zeros(degree + 1)]
        coeffs[0][0] = base
        for eta, d, size in zip(cps, orders, sizes):
            nxt = coeffs[-1].copy()
            nxt += np.array(
                list(shifted_power_coeffs(float(size), eta / n, d))
                + [0.0] * (degree - d)
            )
            coeffs.append(nxt)
        return PiecewiseSignal(
            n, degree, cps, tuple(tuple(row) for row in coeffs)
        )

    if template == "lowerBound":
        kind = params.pop("kind")
        which = params.pop("which", "P0")
        _require(which in ("P0", "P1"), "which must be P0 or P1")
        inst = lower_bound_instance(
            kind,
            kappa=float(params.pop("kappa")),
            sigma=float(params.pop("sigma", 1.0)),
            degree=int(params.pop("degree")),
            n=n,
            spacing=params.pop("spacing", None),
            shift=params.pop("shift", None),
            xi=params.pop("xi", None),
        )
        _require(not params, f"unknown lowerBound params: {sorted(params)}")
        return inst.p0 if which == "P0" else inst.p1

    raise InputError(f"unknown scenario template {template!r}")


def signal_to_json(signal: PiecewiseSignal) -> dict:
    """Stable serialization: {n, r, changePoints, segments}."""
    return {
        "n": signal.n,
        "r": signal.degree,
        "changePoints": list(signal.change_points),
        "segments": [list(row) for row in signal.coefficients],
    }


def signal_from_json(doc: dict) -> PiecewiseSignal:
    try:
        return PiecewiseSignal(
            n=int(doc["n"]),
            degree=int(doc["r"]),
            change_points=tuple(int(c) for c in doc["changePoints"]),
            coefficients=tuple(tuple(float(v) for v in row) for row in doc["segments"]),
        )
    except KeyError as exc:
        raise InputError(f"signal document missing field {exc.args[0]!r}") from exc
