"""Command-line front end.

Subcommands: `detect` (run the two-step detector on a numeric file),
`simulate` (repeated trials of a scenario at one n), `sweep` (rate sweep
over an n grid), `lowerbound` (inspect a two-point instance).  Exit
codes: 0 success, 2 usage/input error, 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .errors import ConfigError, InputError, InternalError, PolysegError
from .signals import evaluate_mean, lower_bound_instance
from .simulate import (
    Scenario,
    run_simulate,
    run_sweep,
    sweep_summary_dict,
    trials_csv_text,
    write_json,
    write_text,
)
from .solver import SolverConfig, detect, penalty_from_rule

SCHEMA_VERSION = 1


def read_series(path: str) -> list[float]:
    """Newline-delimited numbers; a single non-numeric first row is a header."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise InputError(f"cannot read input file {path}: {exc}") from exc
    values: list[float] = []
    seen_data = False
    for lineno, raw in enumerate(lines, start=1):
        text = raw.strip().rstrip(",")
        if not text:
            continue
        try:
            values.append(float(text))
            seen_data = True
        except ValueError:
            if not seen_data and not values:
                continue  # header row
            raise InputError(f"non-numeric value at line {lineno} of {path}")
    if not values:
        raise InputError(f"no numeric data in {path}")
    return values


def _section(doc: dict, name: str) -> dict:
    sec = doc.get(name)
    if sec is None:
        raise InputError(f"scenario file missing section {name!r}")
    if not isinstance(sec, dict):
        raise InputError(f"scenario section {name!r} must be a table/object")
    return sec


_REQUIRED = object()


def _get(sec: dict, path: str, typ, default=_REQUIRED):
    name = path.rsplit(".", 1)[-1]
    if name not in sec:
        if default is _REQUIRED:
            raise InputError(f"scenario field {path!r} is required")
        return default
    val = sec[name]
    if typ is float and isinstance(val, (int, float)) and not isinstance(val, bool):
        return float(val)
    if typ is int and isinstance(val, int) and not isinstance(val, bool):
        return int(val)
    if typ is str and isinstance(val, str):
        return val
    if typ is dict and isinstance(val, dict):
        return val
    if typ is list and isinstance(val, list):
        return val
    raise InputError(f"scenario field {path!r} must be of type {typ.__name__}")


def load_scenario_doc(path: str) -> dict:
    try:
        if path.endswith((".toml", ".tml")):
            with open(path, "rb") as fh:
                return tomllib.load(fh)
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read scenario file {path}: {exc}") from exc
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise InputError(f"cannot parse scenario file {path}: {exc}") from exc


def parse_scenario(doc: dict, command: str) -> Scenario:
    version = _get(doc, "schemaVersion", int)
    if version != SCHEMA_VERSION:
        raise InputError(f"unsupported schemaVersion {version}; expected {SCHEMA_VERSION}")
    signal = _section(doc, "signal")
    noise = _section(doc, "noise")
    solver = _section(doc, "solver")

    params = dict(_get(signal, "signal.params", dict, {}))
    n = params.pop("n", None)
    template = _get(signal, "signal.template", str)

    lam = _get(solver, "solver.lambda", float, None)
    c = _get(solver, "solver.c", float, None)

    n_grid: tuple[int, ...] = ()
    reps = 1
    if command == "sweep":
        sweep = _section(doc, "sweep")
        grid = _get(sweep, "sweep.nGrid", list)
        if not all(isinstance(v, int) and not isinstance(v, bool) for v in grid):
            raise InputError("scenario field 'sweep.nGrid' must be a list of integers")
        n_grid = tuple(grid)
        reps = _get(sweep, "sweep.reps", int)
    else:
        if n is None:
            raise InputError("scenario field 'signal.params.n' is required for simulate")
        sim = doc.get("simulate", {})
        if not isinstance(sim, dict):
            raise InputError("scenario section 'simulate' must be a table/object")
        reps = _get(sim, "simulate.reps", int, 1)

    try:
        return Scenario(
            template=template,
            params=params,
            noise_kind=_get(noise, "noise.kind", str, "gaussian"),
            sigma=_get(noise, "noise.sigma", float, 1.0),
            seed=_get(noise, "noise.seed", int, 0),
            degree=_get(solver, "solver.degree", int),
            penalty=lam,
            c=c,
            min_seg_len=_get(solver, "solver.minSegLen", int, 1),
            engine=_get(solver, "solver.engine", str, "moment"),
            n=int(n) if n is not None else None,
            n_grid=n_grid,
            reps=reps,
        )
    except PolysegError:
        raise
    except (TypeError, ValueError) as exc:
        raise InputError(f"invalid scenario: {exc}") from exc


def cmd_detect(args) -> int:
    y = read_series(args.input)
    if args.lam is None and args.lambda_rule is None:
        raise InputError("provide --lambda or --lambda-rule C")
    if args.lam is not None and args.lambda_rule is not None:
        raise InputError("--lambda and --lambda-rule are mutually exclusive")
    sigma_hat2 = None
    if args.lam is not None:
        lam = args.lam
    else:
        lam, sigma_hat2 = penalty_from_rule(y, args.degree, args.lambda_rule)
        print(
            f"estimated sigma^2 = {sigma_hat2:.6g}; implied lambda = {lam:.6g}",
            file=sys.stderr,
        )
    config = SolverConfig(
        penalty=lam,
        degree=args.degree,
        min_seg_len=args.min_seg_len,
        engine=args.engine,
    )
    result = detect(y, config)
    doc = {
        "schemaVersion": SCHEMA_VERSION,
        "n": len(y),
        "r": args.degree,
        "lambda": lam,
        "kHat": result.k_hat,
        "initial": list(result.initial),
        "final": list(result.final),
        "objective": result.objective,
        "segments": [
            {
                "start": fit.interval.start,
                "end": fit.interval.end,
                "coefficients": [float(b) for b in fit.coefficients],
                "center": fit.center,
                "halfWidth": fit.half_width,
                "rss": fit.rss,
            }
            for fit in result.segment_fits
        ],
    }
    if sigma_hat2 is not None:
        doc["sigmaHat2"] = sigma_hat2
    text = json.dumps(doc, indent=2) + "\n"
    if args.output == "-":
        sys.stdout.write(text)
    else:
        write_text(args.output, text)
    return 0


def cmd_simulate(args) -> int:
    scenario = parse_scenario(load_scenario_doc(args.scenario), "simulate")
    rows = run_simulate(scenario, threads=args.threads, measure_runtime=args.timing)
    text = trials_csv_text(rows)
    if args.output == "-":
        sys.stdout.write(text)
    else:
        write_text(args.output, text)
    return 0


def cmd_sweep(args) -> int:
    scenario = parse_scenario(load_scenario_doc(args.scenario), "sweep")
    report = run_sweep(scenario, threads=args.threads, measure_runtime=args.timing)
    write_text(args.output_prefix + ".trials.csv", trials_csv_text(report.rows))
    write_json(args.output_prefix + ".summary.json", sweep_summary_dict(scenario, report))
    if report.unreliable:
        print(
            "warning: fewer than half the trials recovered the true count "
            "in some cells; slope is unreliable",
            file=sys.stderr,
        )
    slope = "n/a" if report.slope is None else f"{report.slope:.4f}"
    print(f"fitted slope: {slope} (theory: {report.theoretical_exponent})")
    return 0


def cmd_lowerbound(args) -> int:
    doc = load_scenario_doc(args.scenario)
    version = _get(doc, "schemaVersion", int)
    if version != SCHEMA_VERSION:
        raise InputError(f"unsupported schemaVersion {version}; expected {SCHEMA_VERSION}")
    sec = _section(doc, "lowerbound")
    inst = lower_bound_instance(
        _get(sec, "lowerbound.kind", str),
        kappa=_get(sec, "lowerbound.kappa", float),
        sigma=_get(sec, "lowerbound.sigma", float, 1.0),
        degree=_get(sec, "lowerbound.degree", int),
        n=_get(sec, "lowerbound.n", int),
        spacing=_get(sec, "lowerbound.spacing", int, None),
        shift=_get(sec, "lowerbound.shift", int, None),
        xi=_get(sec, "lowerbound.xi", float, None),
    )
    mean0 = evaluate_mean(inst.p0)
    mean1 = evaluate_mean(inst.p1)
    lines = ["i,mean0,mean1"]
    lines.extend(
        f"{i},{m0!r},{m1!r}" for i, (m0, m1) in enumerate(zip(mean0, mean1), start=1)
    )
    write_text(args.output_prefix + ".means.csv", "\n".join(lines) + "\n")
    write_json(
        args.output_prefix + ".summary.json",
        {
            "schemaVersion": SCHEMA_VERSION,
            "kind": inst.kind,
            "n": inst.p0.n,
            "degree": inst.p0.degree,
            "spacing": inst.spacing,
            "shift": inst.shift,
            "changePoint0": list(inst.p0.change_points),
            "changePoint1": list(inst.p1.change_points),
            "exactKL": inst.kl,
            "bound": inst.bound,
        },
    )
    print(f"exact KL = {inst.kl!r}; closed-form bound = {inst.bound!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polyseg",
        description="Change-point localization in piecewise-polynomial signals",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_detect = sub.add_parser("detect", help="detect change points in a numeric file")
    p_detect.add_argument("input", help="newline-delimited numbers (optional header)")
    p_detect.add_argument("-r", "--degree", type=int, required=True)
    p_detect.add_argument("--lambda", dest="lam", type=float, default=None)
    p_detect.add_argument(
        "--lambda-rule",
        type=float,
        default=None,
        metavar="C",
        help="lambda = C * sigma_hat^2 * log n with difference-based sigma_hat",
    )
    p_detect.add_argument("--min-seg-len", type=int, default=1)
    p_detect.add_argument("--engine", choices=("moment", "exact"), default="moment")
    p_detect.add_argument("-o", "--output", default="-")
    p_detect.set_defaults(func=cmd_detect)

    p_sim = sub.add_parser("simulate", help="run scenario trials at a single n")
    p_sim.add_argument("scenario", help="scenario file (.json or .toml)")
    p_sim.add_argument("-o", "--output", default="-")
    p_sim.add_argument("--threads", type=int, default=1)
    p_sim.add_argument("--timing", action="store_true", help="record wall time per trial")
    p_sim.set_defaults(func=cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="rate sweep over an n grid")
    p_sweep.add_argument("scenario")
    p_sweep.add_argument("--output-prefix", default="sweep")
    p_sweep.add_argument("--threads", type=int, default=1)
    p_sweep.add_argument("--timing", action="store_true")
    p_sweep.set_defaults(func=cmd_sweep)

    p_lb = sub.add_parser("lowerbound", help="inspect a two-point instance")
    p_lb.add_argument("scenario")
    p_lb.add_argument("--output-prefix", default="lowerbound")
    p_lb.set_defaults(func=cmd_lowerbound)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InternalError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
