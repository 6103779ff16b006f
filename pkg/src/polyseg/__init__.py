"""polyseg: change-point localization in piecewise-polynomial signals.

Two-step pipeline: an exact penalized minimal-partitioning solve gives
initial change-point estimators; a per-point local rescan refines them.
Ships with ground-truth signal models, two-point lower-bound instance
generators, and a Monte Carlo harness that measures localization-rate
exponents.
"""

from ._kernels import USING_NUMBA, backend_name
from .cost import (
    DEGREE_CEILING,
    Interval,
    MomentTable,
    SegmentFit,
    build_moment_table,
    fit_coefficients,
    q_gain,
    segment_rss,
    segment_rss_exact,
)
from .errors import ConfigError, InputError, InternalError, PolysegError
from .refine import refine_estimators, refinement_windows
from .signals import (
    ActiveOrder,
    JumpProfile,
    LowerBoundInstance,
    PiecewiseSignal,
    active_order,
    evaluate_mean,
    exact_kl,
    jump_profile,
    lower_bound_instance,
    make_scenario,
    reparameterize_at,
    shifted_power_coeffs,
    signal_from_json,
    signal_to_json,
    taylor_shift,
)
from .simulate import (
    NoiseEventReport,
    NoiseSpec,
    Scenario,
    SweepReport,
    TrialReport,
    TrialRow,
    derive_trial_seed,
    differencing_baseline,
    generate_noise,
    match_estimates,
    noise_event_check,
    run_simulate,
    run_sweep,
    run_trial,
)
from .solver import (
    DetectionResult,
    Partition,
    SolverConfig,
    StructureReport,
    brute_force_min_partition,
    detect,
    diagnose_structure,
    estimate_noise_variance,
    initial_estimators,
    partition_objective,
    penalty_from_rule,
    segment_count_path,
    solve_min_partition,
)

__version__ = "0.1.0"

__all__ = [
    "ActiveOrder",
    "ConfigError",
    "DEGREE_CEILING",
    "DetectionResult",
    "InputError",
    "InternalError",
    "Interval",
    "JumpProfile",
    "LowerBoundInstance",
    "MomentTable",
    "NoiseEventReport",
    "NoiseSpec",
    "Partition",
    "PiecewiseSignal",
    "PolysegError",
    "Scenario",
    "SegmentFit",
    "SolverConfig",
    "StructureReport",
    "SweepReport",
    "TrialReport",
    "TrialRow",
    "USING_NUMBA",
    "active_order",
    "backend_name",
    "brute_force_min_partition",
    "build_moment_table",
    "derive_trial_seed",
    "detect",
    "diagnose_structure",
    "differencing_baseline",
    "estimate_noise_variance",
    "evaluate_mean",
    "exact_kl",
    "fit_coefficients",
    "generate_noise",
    "initial_estimators",
    "jump_profile",
    "lower_bound_instance",
    "make_scenario",
    "match_estimates",
    "noise_event_check",
    "partition_objective",
    "penalty_from_rule",
    "q_gain",
    "refine_estimators",
    "refinement_windows",
    "reparameterize_at",
    "run_simulate",
    "run_sweep",
    "run_trial",
    "segment_count_path",
    "segment_rss",
    "segment_rss_exact",
    "shifted_power_coeffs",
    "signal_from_json",
    "signal_to_json",
    "solve_min_partition",
    "taylor_shift",
]
