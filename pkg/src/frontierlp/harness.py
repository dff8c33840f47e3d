"""Monte Carlo replication engine and rate-of-convergence experiments.

Replications draw independent samples from a known frontier, fit one of the
estimators, and aggregate the L1 error and the effective-parameter count.
Per-replication seeds are derived from the master seed by index, never by
execution order, so reports are identical at any parallelism level.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .estimators import (
    InfeasibleFitError,
    fit_fourier_estimator,
    fit_kernel_estimator,
    fit_modified_estimator,
    fit_partition_estimator,
)
from .frontier import FrontierFunction, Sample, benchmark_frontier, sample_support
from .kernels import kernel_by_name
from .metrics import DEFAULT_GRID, l1_error

__all__ = [
    "EstimatorSpec",
    "SimulationConfig",
    "SimulationReport",
    "RateExperiment",
    "replication_seed",
    "run_replications",
    "rate_experiment",
]

_KINDS = ("kernel", "modified", "fourier", "partition")
_H_RULES = ("quarter", "third", "fixed")


def replication_seed(master_seed: int, *indices: int) -> int:
    """Derived stream seed: the master seed mixed with replication indices.

    The mixing function is numpy's SeedSequence spawn-key hashing, which is
    documented, stable across platforms, and yields independent streams for
    distinct index tuples.
    """
    ss = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(i) for i in indices))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class EstimatorSpec:
    """Which estimator to fit and with which parameters."""

    kind: str
    h: float | None = None
    mass_cap: float | None = None      # total-mass bound; per-weight cap is mass_cap / n
    budget: float | None = None        # Lipschitz budget of the trigonometric fit
    harmonics: int | None = None
    slices: int | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"estimator kind must be one of {_KINDS}, got {self.kind!r}")
        if self.kind in ("kernel", "modified", "partition"):
            if self.h is None or self.h <= 0:
                raise ValueError(f"{self.kind} estimator needs a positive bandwidth")
        if self.kind == "modified" and (self.mass_cap is None or self.mass_cap <= 0):
            raise ValueError("modified estimator needs a positive mass_cap")
        if self.kind == "fourier":
            if self.harmonics is None or self.harmonics < 1:
                raise ValueError("fourier estimator needs harmonics >= 1")
            if self.budget is None or self.budget < 0:
                raise ValueError("fourier estimator needs a nonnegative budget")
        if self.kind == "partition" and (self.slices is None or self.slices < 1):
            raise ValueError("partition estimator needs slices >= 1")

    def to_dict(self) -> dict:
        out: dict = {"type": self.kind}
        if self.h is not None:
            out["h"] = self.h
        if self.mass_cap is not None:
            out["C_alpha"] = self.mass_cap
        if self.budget is not None:
            out["L"] = self.budget
        if self.harmonics is not None:
            out["M"] = self.harmonics
        if self.slices is not None:
            out["slices"] = self.slices
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "EstimatorSpec":
        return cls(
            kind=data["type"],
            h=data.get("h"),
            mass_cap=data.get("C_alpha"),
            budget=data.get("L"),
            harmonics=data.get("M"),
            slices=data.get("slices"),
        )


def _frontier_to_json(frontier: FrontierFunction):
    bench = benchmark_frontier()
    if (frontier.knot_x.size == bench.knot_x.size
            and np.array_equal(frontier.knot_x, bench.knot_x)
            and np.array_equal(frontier.knot_v, bench.knot_v)):
        return "benchmark"
    return [[float(x), float(v)] for x, v in zip(frontier.knot_x, frontier.knot_v)]


def _frontier_from_json(data) -> FrontierFunction:
    if data in (None, "benchmark"):
        return benchmark_frontier()
    knots = np.asarray(data, dtype=float)
    return FrontierFunction(knot_x=knots[:, 0], knot_v=knots[:, 1])


@dataclass(frozen=True)
class SimulationConfig:
    estimator: EstimatorSpec
    n: int
    replications: int
    kernel: str = "epanechnikov"
    frontier: FrontierFunction = None
    master_seed: int = 0
    grid: int = DEFAULT_GRID

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("sample size must be >= 1")
        if self.replications < 1:
            raise ValueError("need at least one replication")
        if self.frontier is None:
            object.__setattr__(self, "frontier", benchmark_frontier())
        kernel_by_name(self.kernel)  # fail early on unknown names

    def to_dict(self) -> dict:
        return {
            "estimator": self.estimator.to_dict(),
            "N": self.n,
            "replications": self.replications,
            "kernel": self.kernel,
            "frontier": _frontier_to_json(self.frontier),
            "seed": self.master_seed,
            "grid": self.grid,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SimulationConfig":
        return cls(
            estimator=EstimatorSpec.from_dict(data["estimator"]),
            n=int(data["N"]),
            replications=int(data["replications"]),
            kernel=data.get("kernel", "epanechnikov"),
            frontier=_frontier_from_json(data.get("frontier")),
            master_seed=int(data.get("seed", 0)),
            grid=int(data.get("grid", DEFAULT_GRID)),
        )


@dataclass(frozen=True)
class SimulationReport:
    """Moments of the L1 error and the effective-parameter count.

    Standard deviations use divisor R - 1 (0.0 when a single replication
    succeeded).  Failed replications are excluded from the moments and
    counted in ``failures``.
    """

    config: SimulationConfig
    mean_delta: float
    std_delta: float
    mean_np: float
    std_np: float
    failures: int
    replications_used: int

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "mean_delta": self.mean_delta,
            "std_delta": self.std_delta,
            "mean_np": self.mean_np,
            "std_np": self.std_np,
            "failures": self.failures,
            "replications_used": self.replications_used,
        }

    def table(self, header: bool = True) -> str:
        spec = self.config.estimator
        cols = [
            ("estimate", f"{spec.kind:<9}"),
            ("h", f"{spec.h:7.3f}" if spec.h is not None else "      -"),
            ("L", f"{spec.budget:7.3f}" if spec.budget is not None else "      -"),
            ("M", f"{spec.harmonics:5d}" if spec.harmonics is not None else "    -"),
            ("mean(delta_N)", f"{self.mean_delta:13.4f}"),
            ("st-dev(delta_N)", f"{self.std_delta:15.4f}"),
            ("mean(np)", f"{self.mean_np:8.3f}"),
            ("st-dev(np)", f"{self.std_np:10.3f}"),
        ]
        row = "  ".join(v for _, v in cols)
        if not header:
            return row
        names = "  ".join(
            f"{name:<{len(v)}}" if i == 0 else f"{name:>{len(v)}}"
            for i, (name, v) in enumerate(cols)
        )
        return names + "\n" + row


def _fit_for_spec(spec: EstimatorSpec, sample: Sample, kernel_name: str):
    if spec.kind == "kernel":
        return fit_kernel_estimator(sample, kernel_by_name(kernel_name), spec.h)
    if spec.kind == "modified":
        return fit_modified_estimator(
            sample, kernel_by_name(kernel_name), spec.h, spec.mass_cap
        )
    if spec.kind == "fourier":
        return fit_fourier_estimator(sample, spec.harmonics, spec.budget)
    return fit_partition_estimator(
        sample, kernel_by_name(kernel_name), spec.h, spec.slices
    )


def _replicate(args):
    cfg, index = args
    seed = replication_seed(cfg.master_seed, index)
    sample = sample_support(cfg.frontier, cfg.n, seed)
    try:
        estimate = _fit_for_spec(cfg.estimator, sample, cfg.kernel)
    except InfeasibleFitError:
        return index, math.nan, math.nan, True
    delta = l1_error(estimate, cfg.frontier, cfg.grid)
    return index, delta, float(estimate.support_count), False


def _max_workers() -> int:
    raw = os.environ.get("FRONTIER_LP_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def run_replications(cfg: SimulationConfig) -> SimulationReport:
    """Sample -> fit -> measure, replicated; deterministic for a fixed seed."""
    jobs = [(cfg, r) for r in range(cfg.replications)]
    workers = _max_workers()
    if workers > 1 and cfg.replications > 1:
        chunk = max(1, cfg.replications // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_replicate, jobs, chunksize=chunk))
    else:
        results = [_replicate(job) for job in jobs]
    results.sort(key=lambda item: item[0])

    deltas = np.array([d for _, d, _, failed in results if not failed])
    counts = np.array([c for _, _, c, failed in results if not failed])
    failures = sum(1 for *_, failed in results if failed)
    if deltas.size == 0:
        raise RuntimeError(
            f"every replication failed ({failures} infeasible fits); "
            "the estimator parameters cannot cover this sample size"
        )

    def _std(values: np.ndarray) -> float:
        return float(np.std(values, ddof=1)) if values.size > 1 else 0.0

    return SimulationReport(
        config=cfg,
        mean_delta=float(deltas.mean()),
        std_delta=_std(deltas),
        mean_np=float(counts.mean()),
        std_np=_std(counts),
        failures=failures,
        replications_used=int(deltas.size),
    )


# ---------------------------------------------------------------------------
# rate-of-convergence experiments

def _bandwidth_for(rule: str, fixed_h: float | None, n: int) -> float:
    if rule == "quarter":
        return (math.log(n) / n) ** 0.25
    if rule == "third":
        return (math.log(n) / n) ** (1.0 / 3.0)
    return float(fixed_h)


@dataclass(frozen=True)
class RateExperiment:
    """Mean error along a sample-size grid with a bandwidth schedule.

    ``schedule_values`` holds max(h, sqrt(log N / (N h^p))) per cell, the
    theoretical error scale; for the scheduled rules it coincides with h.
    ``slope`` is the log-log regression slope of mean error on the schedule.
    """

    estimator: EstimatorSpec
    n_grid: tuple[int, ...]
    h_rule: str = "third"
    fixed_h: float | None = None
    kernel: str = "epanechnikov"
    frontier: FrontierFunction = None
    master_seed: int = 0
    grid: int = DEFAULT_GRID
    # filled by rate_experiment
    h_values: tuple[float, ...] | None = None
    schedule_values: tuple[float, ...] | None = None
    mean_errors: tuple[float, ...] | None = None
    cell_failures: tuple[int, ...] | None = None
    slope: float | None = None

    def __post_init__(self):
        if self.estimator.kind == "fourier":
            raise ValueError("rate experiments need a bandwidth-based estimator")
        grid = tuple(int(n) for n in self.n_grid)
        if len(grid) < 3 or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("n_grid must be strictly increasing with >= 3 entries")
        object.__setattr__(self, "n_grid", grid)
        if self.h_rule not in _H_RULES:
            raise ValueError(f"h_rule must be one of {_H_RULES}")
        if self.h_rule == "fixed" and (self.fixed_h is None or self.fixed_h <= 0):
            raise ValueError("fixed h_rule needs a positive fixed_h")
        if self.frontier is None:
            object.__setattr__(self, "frontier", benchmark_frontier())

    def to_dict(self) -> dict:
        out = {
            "estimator": self.estimator.to_dict(),
            "N_grid": list(self.n_grid),
            "h_rule": self.h_rule if self.h_rule != "fixed" else {"fixed": self.fixed_h},
            "kernel": self.kernel,
            "frontier": _frontier_to_json(self.frontier),
            "seed": self.master_seed,
            "grid": self.grid,
        }
        if self.mean_errors is not None:
            out.update({
                "h_values": list(self.h_values),
                "schedule_values": list(self.schedule_values),
                "mean_errors": list(self.mean_errors),
                "cell_failures": list(self.cell_failures),
                "slope": self.slope,
            })
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RateExperiment":
        rule = data.get("h_rule", "third")
        fixed_h = None
        if isinstance(rule, dict):
            fixed_h = float(rule["fixed"])
            rule = "fixed"
        return cls(
            estimator=EstimatorSpec.from_dict(data["estimator"]),
            n_grid=tuple(data["N_grid"]),
            h_rule=rule,
            fixed_h=fixed_h,
            kernel=data.get("kernel", "epanechnikov"),
            frontier=_frontier_from_json(data.get("frontier")),
            master_seed=int(data.get("seed", 0)),
            grid=int(data.get("grid", DEFAULT_GRID)),
        )


def rate_experiment(experiment: RateExperiment, reps: int) -> RateExperiment:
    """Fill a rate experiment: per-N mean errors and the log-log slope."""
    if reps < 1:
        raise ValueError("need at least one replication per cell")
    exponent = 1.0 if experiment.estimator.kind == "modified" else 2.0
    h_values = []
    schedules = []
    means = []
    failures = []
    for idx, n in enumerate(experiment.n_grid):
        h = _bandwidth_for(experiment.h_rule, experiment.fixed_h, n)
        h_values.append(h)
        schedules.append(max(h, math.sqrt(math.log(n) / (n * h ** exponent))))
        cfg = SimulationConfig(
            estimator=replace(experiment.estimator, h=h),
            n=n,
            replications=reps,
            kernel=experiment.kernel,
            frontier=experiment.frontier,
            master_seed=replication_seed(experiment.master_seed, idx),
            grid=experiment.grid,
        )
        try:
            report = run_replications(cfg)
        except RuntimeError:
            means.append(math.nan)
            failures.append(reps)
            continue
        means.append(report.mean_delta)
        failures.append(report.failures)

    ok = [i for i, m in enumerate(means) if not math.isnan(m)]
    slope = math.nan
    if len(ok) >= 2:
        logs = np.log([schedules[i] for i in ok])
        loge = np.log([means[i] for i in ok])
        design = np.vstack([np.ones(len(ok)), logs]).T
        coef, *_ = np.linalg.lstsq(design, loge, rcond=None)
        slope = float(coef[1])

    return replace(
        experiment,
        h_values=tuple(h_values),
        schedule_values=tuple(schedules),
        mean_errors=tuple(means),
        cell_failures=tuple(failures),
        slope=slope,
    )
