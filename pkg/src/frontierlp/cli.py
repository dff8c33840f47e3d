"""Command-line interface.

Subcommands:

* ``estimate``        fit one estimator to a sample CSV, write estimate JSON
                      and optionally a curve CSV
* ``simulate``        run a replication study from a config JSON
* ``rates``           run a rate-of-convergence experiment from a config JSON
* ``validate-kernel`` numeric check of a named kernel

Exit codes: 0 success, 1 usage error, 2 numerical failure (infeasible
program, solver breakdown).
"""

from __future__ import annotations

import argparse
import json
import sys

from .estimators import (
    InfeasibleFitError,
    build_fourier_lp,
    build_kernel_lp,
    estimate_to_dict,
    write_curve,
)
from .frontier import read_sample
from .harness import (
    EstimatorSpec,
    RateExperiment,
    SimulationConfig,
    rate_experiment,
    run_replications,
)
from .kernels import kernel_by_name, validate_kernel
from .lp import PivotLimitError, format_lp

__all__ = ["run_cli", "main"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); the contract is exit 1
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="frontierlp", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="fit an estimator to a sample CSV")
    est.add_argument("--input", required=True, help="sample CSV with header x,y")
    est.add_argument("--estimator", default="kernel",
                     choices=["kernel", "modified", "fourier", "partition"])
    est.add_argument("--kernel", default="epanechnikov")
    est.add_argument("--h", type=float, default=None, help="bandwidth")
    est.add_argument("--C-alpha", dest="mass_cap", type=float, default=None,
                     help="total-mass cap of the modified estimator")
    est.add_argument("--L", dest="budget", type=float, default=None,
                     help="Lipschitz budget of the fourier estimator")
    est.add_argument("--M", dest="harmonics", type=int, default=None,
                     help="harmonic count of the fourier estimator")
    est.add_argument("--slices", type=int, default=None)
    est.add_argument("--output", default=None, help="estimate JSON path (default stdout)")
    est.add_argument("--curve", default=None, help="write fitted curve CSV here")
    est.add_argument("--grid", type=int, default=201, help="curve grid points")
    est.add_argument("--dump-lp", dest="dump_lp", default=None,
                     help="write the fitted linear program to this path")

    simc = sub.add_parser("simulate", help="replication study from a config JSON")
    simc.add_argument("--config", required=True)
    simc.add_argument("--output", default=None, help="report JSON path")
    simc.add_argument("--seed", type=int, default=None, help="override master seed")
    simc.add_argument("--reps", type=int, default=None, help="override replications")

    rat = sub.add_parser("rates", help="rate experiment from a config JSON")
    rat.add_argument("--config", required=True)
    rat.add_argument("--reps", type=int, default=50, help="replications per cell")
    rat.add_argument("--output", default=None, help="result JSON path")

    val = sub.add_parser("validate-kernel", help="numeric kernel check")
    val.add_argument("--kernel", required=True)
    return parser


def _cmd_estimate(args) -> int:
    sample = read_sample(args.input)
    mass_cap = args.mass_cap
    if args.estimator == "modified" and mass_cap is None:
        # fallback when the frontier ceiling is unknown at fit time
        mass_cap = 2.0 * float(sample.y.max())
        print(f"note: --C-alpha not given; using 2*max(y) = {mass_cap:.6g}",
              file=sys.stderr)
    spec = EstimatorSpec(
        kind=args.estimator,
        h=args.h,
        mass_cap=mass_cap,
        budget=args.budget,
        harmonics=args.harmonics,
        slices=args.slices,
    )
    if args.dump_lp:
        if spec.kind == "partition":
            raise _UsageError("the partition estimator has no linear program to dump")
        if spec.kind == "fourier":
            program = build_fourier_lp(sample, spec.harmonics, spec.budget)
        else:
            cap = None if spec.mass_cap is None else spec.mass_cap / sample.n
            program = build_kernel_lp(sample, kernel_by_name(args.kernel), spec.h, cap)
        with open(args.dump_lp, "w", encoding="utf-8") as fh:
            fh.write(format_lp(program))

    from .harness import _fit_for_spec  # single dispatch point for all four kinds

    estimate = _fit_for_spec(spec, sample, args.kernel)
    payload = json.dumps(estimate_to_dict(estimate), indent=2)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(payload + "\n")
    else:
        print(payload)
    if args.curve:
        write_curve(args.curve, estimate, args.grid)
    return 0


def _cmd_simulate(args) -> int:
    with open(args.config, encoding="utf-8") as fh:
        data = json.load(fh)
    if args.seed is not None:
        data["seed"] = args.seed
    if args.reps is not None:
        data["replications"] = args.reps
    cfg = SimulationConfig.from_dict(data)
    report = run_replications(cfg)
    print(report.table())
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=2)
            fh.write("\n")
    return 0


def _cmd_rates(args) -> int:
    with open(args.config, encoding="utf-8") as fh:
        data = json.load(fh)
    experiment = RateExperiment.from_dict(data)
    filled = rate_experiment(experiment, args.reps)
    print(f"{'N':>6}  {'h':>8}  {'schedule':>9}  {'mean error':>11}  {'failures':>8}")
    for n, h, sched, err, fail in zip(filled.n_grid, filled.h_values,
                                      filled.schedule_values, filled.mean_errors,
                                      filled.cell_failures):
        print(f"{n:6d}  {h:8.4f}  {sched:9.4f}  {err:11.5f}  {fail:8d}")
    print(f"log-log slope vs schedule: {filled.slope:.4f}")
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            json.dump(filled.to_dict(), fh, indent=2)
            fh.write("\n")
    return 0


def _cmd_validate_kernel(args) -> int:
    report = validate_kernel(kernel_by_name(args.kernel))
    for line in report.lines():
        print(line)
    print(f"overall: {'pass' if report.passed else 'FAIL'}")
    return 0


def run_cli(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "estimate":
            return _cmd_estimate(args)
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "rates":
            return _cmd_rates(args)
        return _cmd_validate_kernel(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (FileNotFoundError, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (InfeasibleFitError, PivotLimitError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_cli())
