"""Monte Carlo harness: noise, trials, rate sweeps and diagnostics.

Trials are fully deterministic given (master seed, n, rep): each derives
its own seed, so reports are identical across runs and thread counts.
Per-trial wall time is only measured on request; deterministic report
files write a zero in the runtime column, in the spirit of reproducible
builds.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import InputError
from .refine import refine_estimators
from .signals import PiecewiseSignal, active_order, evaluate_mean, jump_profile, make_scenario
from .solver import DetectionResult, SolverConfig, detect

NOISE_KINDS = ("gaussian", "rademacher", "uniform")

# Medians are floored at half an index before taking logs: localization
# errors below half a grid step are not resolvable on the index lattice.
MEDIAN_FLOOR = 0.5

TRIAL_CSV_COLUMNS = (
    "n",
    "rep",
    "kHat",
    "kCorrect",
    "maxInitialErr",
    "maxFinalErr",
    "runtimeMs",
)


@dataclass(frozen=True)
class NoiseSpec:
    """Mean-zero sub-Gaussian noise family with scale sigma."""

    kind: str = "gaussian"
    sigma: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise InputError(f"unknown noise kind {self.kind!r}")
        if self.sigma < 0:
            raise InputError("sigma must be >= 0")


def generate_noise(spec: NoiseSpec, n: int) -> np.ndarray:
    """Deterministic noise draw: gaussian N(0, sigma^2), rademacher
    +-sigma, or uniform on (-sigma*sqrt(3), sigma*sqrt(3))."""
    rng = np.random.default_rng(spec.seed)
    if spec.kind == "gaussian":
        return spec.sigma * rng.standard_normal(n)
    if spec.kind == "rademacher":
        return spec.sigma * (2.0 * rng.integers(0, 2, n) - 1.0)
    half = spec.sigma * math.sqrt(3.0)
    return rng.uniform(-half, half, n)


def derive_trial_seed(master_seed: int, n: int, rep: int) -> int:
    """Per-trial seed from (master seed, n, rep); stable across runs."""
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(n), int(rep)))
    return int(ss.generate_state(1, np.uint64)[0])


def match_estimates(truth: Sequence[int], estimates: Sequence[int]) -> list[tuple[int, int]]:
    """Greedy one-to-one nearest matching; returns (truth_idx, est_idx) pairs.

    Candidate pairs are taken in order of (distance, truth index,
    estimate index), so the matching is deterministic; when the counts
    agree and every error is below half the true spacing this reduces to
    the identity assignment.
    """
    pairs = sorted(
        (abs(e - t), ti, ei)
        for ti, t in enumerate(truth)
        for ei, e in enumerate(estimates)
    )
    used_t: set[int] = set()
    used_e: set[int] = set()
    out = []
    for _, ti, ei in pairs:
        if ti in used_t or ei in used_e:
            continue
        used_t.add(ti)
        used_e.add(ei)
        out.append((ti, ei))
    out.sort()
    return out


@dataclass(frozen=True)
class TrialReport:
    """One end-to-end run against a known truth."""

    k_hat: int
    k_correct: bool
    initial_errors: tuple[int, ...]
    final_errors: tuple[int, ...]
    max_initial_error: int | None
    max_final_error: int | None
    runtime_ms: float = 0.0


def _errors(truth: Sequence[int], estimates: Sequence[int]) -> tuple[int, ...]:
    matched = match_estimates(truth, estimates)
    return tuple(abs(estimates[ei] - truth[ti]) for ti, ei in matched)


def run_trial(
    signal: PiecewiseSignal,
    noise_spec: NoiseSpec,
    config: SolverConfig,
    measure_runtime: bool = False,
) -> TrialReport:
    """Simulate y = f(i/n) + eps and run the two-step detection."""
    theta = evaluate_mean(signal)
    eps = generate_noise(noise_spec, signal.n)
    y = theta + eps
    start = time.perf_counter() if measure_runtime else 0.0
    result = detect(y, config)
    elapsed_ms = (time.perf_counter() - start) * 1e3 if measure_runtime else 0.0
    truth = signal.change_points
    initial_errors = _errors(truth, result.initial)
    final_errors = _errors(truth, result.final)
    return TrialReport(
        k_hat=result.k_hat,
        k_correct=result.k_hat == signal.k,
        initial_errors=initial_errors,
        final_errors=final_errors,
        max_initial_error=max(initial_errors) if initial_errors else None,
        max_final_error=max(final_errors) if final_errors else None,
        runtime_ms=elapsed_ms,
    )


@dataclass(frozen=True)
class Scenario:
    """Parsed scenario: signal template, noise, solver and sweep settings.

    Exactly one of `penalty` (explicit) or `c` (penalty = c * sigma^2 *
    log n, with the true sigma) must be set.
    """

    template: str
    params: dict
    noise_kind: str = "gaussian"
    sigma: float = 1.0
    seed: int = 0
    degree: int = 1
    penalty: float | None = None
    c: float | None = None
    min_seg_len: int = 1
    engine: str = "moment"
    n: int | None = None
    n_grid: tuple[int, ...] = ()
    reps: int = 1

    def __post_init__(self):
        if (self.penalty is None) == (self.c is None):
            raise InputError("set exactly one of solver.lambda and solver.c")

    def penalty_for(self, n: int) -> float:
        if self.penalty is not None:
            return float(self.penalty)
        return float(self.c) * self.sigma**2 * math.log(n)

    def solver_config(self, n: int) -> SolverConfig:
        return SolverConfig(
            penalty=self.penalty_for(n),
            degree=self.degree,
            min_seg_len=self.min_seg_len,
            engine=self.engine,
        )


@dataclass(frozen=True)
class TrialRow:
    """One line of the trial CSV (integer-valued, hence byte-stable)."""

    n: int
    rep: int
    k_hat: int
    k_correct: bool
    max_initial_error: int | None
    max_final_error: int | None
    runtime_ms: float

    def as_csv(self) -> str:
        def opt(v):
            return "" if v is None else str(int(v))

        return ",".join(
            (
                str(self.n),
                str(self.rep),
                str(self.k_hat),
                "1" if self.k_correct else "0",
                opt(self.max_initial_error),
                opt(self.max_final_error),
                str(int(round(self.runtime_ms))),
            )
        )


@dataclass
class SweepReport:
    """Per-n medians and the fitted log-log error slope."""

    n_grid: tuple[int, ...]
    median_initial: list[float | None]
    median_final: list[float | None]
    k_correct_fraction: list[float]
    reliable: list[bool]
    slope: float | None
    slope_se: float | None
    theoretical_exponent: float | None
    rows: list[TrialRow] = field(repr=False)

    @property
    def unreliable(self) -> bool:
        return not all(self.reliable)


def _ols_slope(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    xbar = x.mean()
    sxx = float(np.sum((x - xbar) ** 2))
    slope = float(np.sum((x - xbar) * (y - y.mean())) / sxx)
    intercept = float(y.mean() - slope * xbar)
    resid = y - (intercept + slope * x)
    dof = max(x.size - 2, 1)
    se = math.sqrt(float(resid @ resid) / dof / sxx)
    return slope, se


def _theoretical_exponent(scenario: Scenario, n: int) -> float | None:
    try:
        signal = make_scenario(scenario.template, n, scenario.params)
        profile = jump_profile(signal, 1)
        lam = scenario.penalty_for(n)
        order = active_order(profile, lam, 1.0, sigma=max(scenario.sigma, 1e-12))
        r_k = order.r_k if order.r_k is not None else profile.l_k
        return 2.0 * r_k / (2.0 * r_k + 1.0)
    except (InputError, KeyError, TypeError, ValueError):
        return None


def run_sweep(
    scenario: Scenario, threads: int = 1, measure_runtime: bool = False
) -> SweepReport:
    """Monte Carlo sweep over the n grid; median errors over correct trials.

    For each n the scenario signal is re-instantiated, reps independent
    trials run (in parallel when threads > 1; seeds are per-trial, so the
    output is identical for any thread count), and the median of the
    per-trial max final error is taken over trials with the correct
    number of detections.  Cells where fewer than half the trials got the
    count right are flagged unreliable.
    """
    if not scenario.n_grid:
        raise InputError("sweep requires a nonempty n grid")
    if list(scenario.n_grid) != sorted(set(scenario.n_grid)):
        raise InputError("n grid must be strictly increasing")
    if scenario.reps < 1:
        raise InputError("reps must be >= 1")

    tasks = []
    for n in scenario.n_grid:
        signal = make_scenario(scenario.template, n, scenario.params)
        config = scenario.solver_config(n)
        for rep in range(scenario.reps):
            spec = NoiseSpec(
                kind=scenario.noise_kind,
                sigma=scenario.sigma,
                seed=derive_trial_seed(scenario.seed, n, rep),
            )
            tasks.append((n, rep, signal, spec, config))

    def work(task):
        n, rep, signal, spec, config = task
        return (n, rep), run_trial(signal, spec, config, measure_runtime)

    results: dict[tuple[int, int], TrialReport] = {}
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for key, report in pool.map(work, tasks):
                results[key] = report
    else:
        for task in tasks:
            key, report = work(task)
            results[key] = report

    rows = []
    median_initial: list[float | None] = []
    median_final: list[float | None] = []
    fractions: list[float] = []
    reliable: list[bool] = []
    for n in scenario.n_grid:
        good_init, good_fin = [], []
        correct = 0
        for rep in range(scenario.reps):
            rep_report = results[(n, rep)]
            rows.append(
                TrialRow(
                    n=n,
                    rep=rep,
                    k_hat=rep_report.k_hat,
                    k_correct=rep_report.k_correct,
                    max_initial_error=rep_report.max_initial_error,
                    max_final_error=rep_report.max_final_error,
                    runtime_ms=rep_report.runtime_ms,
                )
            )
            if rep_report.k_correct:
                correct += 1
                if rep_report.max_initial_error is not None:
                    good_init.append(rep_report.max_initial_error)
                    good_fin.append(rep_report.max_final_error)
        frac = correct / scenario.reps
        fractions.append(frac)
        reliable.append(frac >= 0.5)
        median_initial.append(float(np.median(good_init)) if good_init else None)
        median_final.append(float(np.median(good_fin)) if good_fin else None)

    usable = [
        i for i, med in enumerate(median_final) if med is not None
    ]
    slope = slope_se = None
    if len(usable) >= 2:
        logn = np.log([scenario.n_grid[i] for i in usable])
        logerr = np.log(
            [max(median_final[i], MEDIAN_FLOOR) for i in usable]
        )
        slope, slope_se = _ols_slope(logn, logerr)

    return SweepReport(
        n_grid=tuple(scenario.n_grid),
        median_initial=median_initial,
        median_final=median_final,
        k_correct_fraction=fractions,
        reliable=reliable,
        slope=slope,
        slope_se=slope_se,
        theoretical_exponent=_theoretical_exponent(scenario, scenario.n_grid[-1]),
        rows=rows,
    )


def run_simulate(
    scenario: Scenario, threads: int = 1, measure_runtime: bool = False
) -> list[TrialRow]:
    """Repeated trials at a single n; returns CSV-ready rows."""
    if scenario.n is None:
        raise InputError("simulate requires signal.params.n")
    single = Scenario(
        template=scenario.template,
        params=scenario.params,
        noise_kind=scenario.noise_kind,
        sigma=scenario.sigma,
        seed=scenario.seed,
        degree=scenario.degree,
        penalty=scenario.penalty,
        c=scenario.c,
        min_seg_len=scenario.min_seg_len,
        engine=scenario.engine,
        n=scenario.n,
        n_grid=(scenario.n,),
        reps=scenario.reps,
    )
    return run_sweep(single, threads=threads, measure_runtime=measure_runtime).rows


def trials_csv_text(rows: Sequence[TrialRow]) -> str:
    lines = [",".join(TRIAL_CSV_COLUMNS)]
    lines.extend(row.as_csv() for row in rows)
    return "\n".join(lines) + "\n"


def sweep_summary_dict(scenario: Scenario, report: SweepReport) -> dict:
    return {
        "schemaVersion": 1,
        "template": scenario.template,
        "nGrid": list(report.n_grid),
        "reps": scenario.reps,
        "medianInitial": report.median_initial,
        "medianFinal": report.median_final,
        "kCorrectFraction": report.k_correct_fraction,
        "reliable": report.reliable,
        "unreliable": report.unreliable,
        "slope": report.slope,
        "slopeSE": report.slope_se,
        "theoreticalExponent": report.theoretical_exponent,
    }


def write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def write_json(path: str, doc: dict) -> None:
    write_text(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def differencing_baseline(y, degree: int, config: SolverConfig) -> DetectionResult:
    """Difference the series `degree` times, then run the constant solver.

    A change detected at index j of the differenced series is mapped back
    to j + ceil(degree/2) in the original indexing (clipped to 2..n); the
    objective and segment fits refer to the differenced series.  Exists
    to contrast direct polynomial detection with the difference-first
    shortcut, whose localization degrades with n.
    """
    arr = np.asarray(y, dtype=np.float64)
    n = arr.size
    if n <= degree:
        raise InputError("series too short to difference `degree` times")
    cfg0 = SolverConfig(
        penalty=config.penalty,
        degree=0,
        min_seg_len=config.min_seg_len,
        engine=config.engine,
    )
    if degree == 0:
        return detect(arr, cfg0)
    diffed = np.diff(arr, n=degree)
    result = detect(diffed, cfg0)
    offset = (degree + 1) // 2
    remap = lambda j: min(max(j + offset, 2), n)  # noqa: E731
    return DetectionResult(
        initial=tuple(remap(j) for j in result.initial),
        final=tuple(remap(j) for j in result.final),
        k_hat=result.k_hat,
        objective=result.objective,
        segment_fits=result.segment_fits,
    )


@dataclass(frozen=True)
class NoiseEventReport:
    """Empirical distribution of max_I |P_I eps|^2 over all intervals."""

    n: int
    degree: int
    sigma: float
    reps: int
    stats: tuple[float, ...]
    quantiles: dict
    ratio_quantiles: dict


NOISE_EVENT_MAX_N = 2000


def noise_event_check(
    noise_spec: NoiseSpec, n: int, degree: int, reps: int
) -> NoiseEventReport:
    """Monte Carlo quantiles of the projected-noise sup over intervals.

    The ratio quantiles divide by sigma^2 log n and calibrate the penalty
    constant empirically; n is capped because each rep scans all O(n^2)
    intervals.
    """
    if n > NOISE_EVENT_MAX_N:
        raise InputError(f"noise_event_check limited to n <= {NOISE_EVENT_MAX_N}")
    if reps < 1:
        raise InputError("reps must be >= 1")
    stats = []
    for rep in range(reps):
        spec = NoiseSpec(
            kind=noise_spec.kind,
            sigma=noise_spec.sigma,
            seed=derive_trial_seed(noise_spec.seed, n, rep),
        )
        eps = generate_noise(spec, n)
        stats.append(_kernels.noise_max(eps, degree))
    arr = np.array(stats)
    qs = (50, 90, 95, 99)
    quantiles = {q: float(np.percentile(arr, q)) for q in qs}
    denom = noise_spec.sigma**2 * math.log(n)
    ratio = {
        q: (quantiles[q] / denom if denom > 0 else 0.0) for q in qs
    }
    return NoiseEventReport(
        n=n,
        degree=degree,
        sigma=noise_spec.sigma,
        reps=reps,
        stats=tuple(stats),
        quantiles=quantiles,
        ratio_quantiles=ratio,
    )
