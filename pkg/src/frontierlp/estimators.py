"""Frontier estimators fitted by linear programming.

Four fits over a sample lying under an unknown boundary:

* kernel expansion covering every point with minimal area (nonnegative
  weights, one per point);
* the same with each weight capped, which trades sparsity for a better
  convergence rate;
* a trigonometric expansion with a Lipschitz budget on the coefficients;
* a slice-maximum baseline that smooths per-slice maxima instead of
  solving a program.

Fitted estimates are immutable and carry their optimality certificates.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .frontier import Sample
from .kernels import Kernel, kernel_by_name
from .lp import LinearProgram, LpSolution, PivotLimitError, duality_gap, solve_lp

__all__ = [
    "InfeasibleFitError",
    "KernelFrontierEstimate",
    "FourierFrontierEstimate",
    "PartitionFrontierEstimate",
    "build_kernel_lp",
    "build_fourier_lp",
    "fit_kernel_estimator",
    "fit_modified_estimator",
    "fit_fourier_estimator",
    "fit_partition_estimator",
    "evaluate_estimate",
    "support_vector_count",
    "log_likelihood",
    "estimate_to_dict",
    "estimate_from_dict",
    "write_curve",
]

_EVAL_CHUNK = 4096
_COUNT_FLOOR = 1e-12
_COUNT_REL = 1e-7


class InfeasibleFitError(RuntimeError):
    """The capped cover program has no admissible solution."""


def _freeze(obj, *names):
    # fitted estimates are shared across threads; keep their arrays inert
    for name in names:
        arr = np.asarray(getattr(obj, name))
        arr.flags.writeable = False
        object.__setattr__(obj, name, arr)


def _count_threshold(values: np.ndarray) -> float:
    if values.size == 0:
        return _COUNT_FLOOR
    return max(_COUNT_FLOOR, _COUNT_REL * float(np.abs(values).max()))


def _expansion_eval(kernel: Kernel, h: float, positions: np.ndarray,
                    weights: np.ndarray, x) -> np.ndarray | float:
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros(arr.size)
    if positions.size:
        for start in range(0, arr.size, _EVAL_CHUNK):
            chunk = arr[start:start + _EVAL_CHUNK]
            out[start:start + _EVAL_CHUNK] = (
                kernel.scaled(chunk[:, None] - positions[None, :], h) @ weights
            )
    if np.isscalar(x) or np.ndim(x) == 0:
        return float(out[0])
    return out


def _expansion_mesh(h: float, radius: float, positions: np.ndarray) -> np.ndarray:
    if not math.isfinite(radius) or positions.size == 0:
        return positions.copy()
    return np.concatenate([positions, positions - h * radius, positions + h * radius])


@dataclass(frozen=True)
class KernelFrontierEstimate:
    """Kernel expansion sum_i w_i K_h(x - x_i) with nonnegative weights.

    Only weights above the sparsity threshold are retained as atoms; the mass
    removed that way is recorded in ``dropped_mass``.  ``cap`` is the
    per-weight upper bound when the capped variant produced the fit.
    """

    kernel: Kernel
    h: float
    atom_x: np.ndarray
    atom_weight: np.ndarray
    cap: float | None
    objective: float
    dual_gap: float
    dropped_mass: float

    def __post_init__(self):
        _freeze(self, "atom_x", "atom_weight")

    @property
    def total_mass(self) -> float:
        return float(self.atom_weight.sum())

    @property
    def support_count(self) -> int:
        threshold = _count_threshold(self.atom_weight)
        return int(np.count_nonzero(self.atom_weight > threshold))

    def evaluate(self, x) -> np.ndarray | float:
        return _expansion_eval(self.kernel, self.h, self.atom_x, self.atom_weight, x)

    def mesh_points(self) -> np.ndarray:
        return _expansion_mesh(self.h, self.kernel.support_radius, self.atom_x)


@dataclass(frozen=True)
class FourierFrontierEstimate:
    """Trigonometric expansion c0 + sum_k a_k cos(2 pi k x) + b_k sin(2 pi k x)."""

    c0: float
    cos_coef: np.ndarray
    sin_coef: np.ndarray
    budget: float
    objective: float
    dual_gap: float

    def __post_init__(self):
        _freeze(self, "cos_coef", "sin_coef")

    @property
    def harmonics(self) -> int:
        return int(self.cos_coef.size)

    @property
    def budget_usage(self) -> float:
        k = np.arange(1, self.harmonics + 1)
        return float(k @ (np.abs(self.cos_coef) + np.abs(self.sin_coef)))

    @property
    def total_mass(self) -> float:
        # harmonics integrate to zero over [0, 1]
        return float(self.c0)

    @property
    def support_count(self) -> int:
        coef = np.concatenate([[self.c0], self.cos_coef, self.sin_coef])
        threshold = _count_threshold(coef)
        return int(np.count_nonzero(np.abs(coef) > threshold))

    def evaluate(self, x) -> np.ndarray | float:
        arr = np.atleast_1d(np.asarray(x, dtype=float))
        k = np.arange(1, self.harmonics + 1)
        phase = 2.0 * math.pi * arr[:, None] * k[None, :]
        out = self.c0 + np.cos(phase) @ self.cos_coef + np.sin(phase) @ self.sin_coef
        if np.isscalar(x) or np.ndim(x) == 0:
            return float(out[0])
        return out

    def mesh_points(self) -> np.ndarray:
        return np.empty(0)


@dataclass(frozen=True)
class PartitionFrontierEstimate:
    """Slice-maximum baseline: smooth width * max-per-slice at slice centers."""

    kernel: Kernel
    h: float
    centers: np.ndarray
    width: float
    peaks: np.ndarray        # max ordinate per slice, 0 where unoccupied
    occupied: np.ndarray     # bool per slice

    def __post_init__(self):
        _freeze(self, "centers", "peaks", "occupied")

    @property
    def slices(self) -> int:
        return int(self.centers.size)

    @property
    def coefficients(self) -> np.ndarray:
        return np.where(self.occupied, self.width * self.peaks, 0.0)

    @property
    def total_mass(self) -> float:
        return float(self.coefficients.sum())

    @property
    def support_count(self) -> int:
        coef = self.coefficients
        threshold = _count_threshold(coef)
        return int(np.count_nonzero(coef > threshold))

    def evaluate(self, x) -> np.ndarray | float:
        return _expansion_eval(
            self.kernel, self.h, self.centers[self.occupied],
            self.coefficients[self.occupied], x,
        )

    def mesh_points(self) -> np.ndarray:
        return _expansion_mesh(self.h, self.kernel.support_radius,
                               self.centers[self.occupied])


def build_kernel_lp(sample: Sample, kernel: Kernel, h: float,
                    cap: float | None = None) -> LinearProgram:
    """Cover program: minimize total weight subject to fit(x_i) >= y_i, w >= 0.

    The constraint matrix entry (i, j) is K_h(x_i - x_j); ``cap`` adds a
    uniform upper bound on every weight.
    """
    if h <= 0:
        raise ValueError("bandwidth must be positive")
    n = sample.n
    rows = kernel.scaled(sample.x[:, None] - sample.x[None, :], h)
    upper = np.full(n, np.inf if cap is None else float(cap))
    return LinearProgram(
        objective=np.ones(n),
        rows=rows,
        senses=(">=",) * n,
        rhs=sample.y.copy(),
        lower=np.zeros(n),
        upper=upper,
    )


def build_fourier_lp(sample: Sample, harmonics: int, budget: float) -> LinearProgram:
    """Program over (c0, a+, a-, b+, b-): minimize c0 under coverage and the
    weighted-coefficient budget; the split parts make |a_k|, |b_k| linear."""
    if harmonics < 1:
        raise ValueError("need at least one harmonic")
    if budget < 0:
        raise ValueError("the Lipschitz budget must be nonnegative")
    n = sample.n
    m_h = harmonics
    k = np.arange(1, m_h + 1, dtype=float)
    phase = 2.0 * math.pi * sample.x[:, None] * k[None, :]
    cosx = np.cos(phase)
    sinx = np.sin(phase)

    nvar = 1 + 4 * m_h
    rows = np.zeros((n + 1, nvar))
    rows[:n, 0] = 1.0
    rows[:n, 1:1 + m_h] = cosx
    rows[:n, 1 + m_h:1 + 2 * m_h] = -cosx
    rows[:n, 1 + 2 * m_h:1 + 3 * m_h] = sinx
    rows[:n, 1 + 3 * m_h:] = -sinx
    rows[n, 1:] = np.tile(k, 4)

    rhs = np.concatenate([sample.y, [budget / (2.0 * math.pi)]])
    senses = (">=",) * n + ("<=",)
    objective = np.zeros(nvar)
    objective[0] = 1.0
    lower = np.zeros(nvar)
    lower[0] = -np.inf
    return LinearProgram(objective=objective, rows=rows, senses=senses,
                         rhs=rhs, lower=lower, upper=np.full(nvar, np.inf))


def _cover_dual_program(rows: np.ndarray, y: np.ndarray,
                        cap: float | None) -> LinearProgram:
    """Dual of the cover program; its feasible origin avoids a phase-1 run.

    Uncapped: maximize y @ lam subject to rows @ lam <= 1, lam >= 0.  A cap
    adds price variables nu >= 0 (one per weight) that relax the rows at cost
    cap each.  The cover weights are recovered from the row multipliers.
    """
    n = y.size
    if cap is None:
        return LinearProgram(
            objective=-y,
            rows=rows,
            senses=("<=",) * n,
            rhs=np.ones(n),
            lower=np.zeros(n),
            upper=np.full(n, np.inf),
        )
    return LinearProgram(
        objective=np.concatenate([-y, np.full(n, cap)]),
        rows=np.hstack([rows, -np.eye(n)]),
        senses=("<=",) * n,
        rhs=np.ones(n),
        lower=np.zeros(2 * n),
        upper=np.full(2 * n, np.inf),
    )


def _solve_cover(program: LinearProgram, cap: float | None):
    """Solve the cover program via its dual, with a direct-solve fallback.

    Returns an optimal solution of ``program`` (weights, row multipliers,
    reduced costs) whichever route produced it.
    """
    n = program.n_variables
    try:
        dual = _cover_dual_program(program.rows, program.rhs, cap)
        dual_solution = solve_lp(dual)
        if dual_solution.status == "unbounded":
            return LpSolution(status="infeasible")
        if dual_solution.status == "optimal":
            weights = np.maximum(-dual_solution.duals, 0.0)
            if cap is not None:
                weights = np.minimum(weights, cap)
            multipliers = dual_solution.x[:n]
            reduced = 1.0 - program.rows.T @ multipliers
            mapped = LpSolution(
                status="optimal",
                x=weights,
                objective=float(weights.sum()),
                duals=multipliers,
                reduced_costs=reduced,
                iterations=dual_solution.iterations,
            )
            if _cover_certificates_ok(program, mapped, cap):
                return mapped
    except PivotLimitError:
        pass
    return solve_lp(program)


def _cover_certificates_ok(program: LinearProgram, solution: LpSolution,
                           cap: float | None) -> bool:
    scale = 1.0 + float(np.abs(program.rhs).max(initial=0.0))
    if np.min(program.rows @ solution.x - program.rhs) < -1e-9 * scale:
        return False
    gap = duality_gap(solution, program)
    return gap <= 1e-9 * (1.0 + abs(solution.objective))


def _fit_cover(sample: Sample, kernel: Kernel, h: float,
               cap: float | None) -> KernelFrontierEstimate:
    program = build_kernel_lp(sample, kernel, h, cap)
    solution = _solve_cover(program, cap)
    if solution.status == "infeasible":
        raise InfeasibleFitError(
            "coefficient cap too tight to cover every point; "
            "increase the cap, the bandwidth, or the sample size"
        )
    if solution.status != "optimal":
        raise RuntimeError(f"cover program ended with status {solution.status}")
    gap = duality_gap(solution, program)
    weights = solution.x
    threshold = _count_threshold(weights)
    keep = weights > threshold
    dropped = float(weights[~keep].sum())
    return KernelFrontierEstimate(
        kernel=kernel,
        h=float(h),
        atom_x=sample.x[keep].copy(),
        atom_weight=weights[keep].copy(),
        cap=cap,
        objective=float(solution.objective),
        dual_gap=float(gap),
        dropped_mass=dropped,
    )


def fit_kernel_estimator(sample: Sample, kernel: Kernel, h: float) -> KernelFrontierEstimate:
    """Smallest-area kernel cover of the sample."""
    return _fit_cover(sample, kernel, h, cap=None)


def fit_modified_estimator(sample: Sample, kernel: Kernel, h: float,
                           mass_cap: float,
                           allow_infinite_support: bool = False) -> KernelFrontierEstimate:
    """Kernel cover with every weight bounded by mass_cap / n.

    The cap forces weights to spread over more points, which improves the
    convergence rate; it requires a finite-support kernel unless explicitly
    overridden.  ``mass_cap`` should exceed the largest frontier value.
    """
    if mass_cap <= 0:
        raise ValueError("mass_cap must be positive")
    if not kernel.finite_support and not allow_infinite_support:
        raise ValueError(
            f"kernel {kernel.name!r} has unbounded support; the capped fit "
            "requires a finite-support kernel (allow_infinite_support=True overrides)"
        )
    return _fit_cover(sample, kernel, h, cap=mass_cap / sample.n)


def fit_fourier_estimator(sample: Sample, harmonics: int,
                          budget: float) -> FourierFrontierEstimate:
    """Smallest-area trigonometric cover with Lipschitz budget ``budget``."""
    program = build_fourier_lp(sample, harmonics, budget)
    solution = solve_lp(program)
    if solution.status != "optimal":
        raise RuntimeError(f"trigonometric program ended with status {solution.status}")
    gap = duality_gap(solution, program)
    m_h = harmonics
    x = solution.x
    cos_coef = x[1:1 + m_h] - x[1 + m_h:1 + 2 * m_h]
    sin_coef = x[1 + 2 * m_h:1 + 3 * m_h] - x[1 + 3 * m_h:]
    return FourierFrontierEstimate(
        c0=float(x[0]),
        cos_coef=cos_coef.copy(),
        sin_coef=sin_coef.copy(),
        budget=float(budget),
        objective=float(solution.objective),
        dual_gap=float(gap),
    )


def fit_partition_estimator(sample: Sample, kernel: Kernel, h: float,
                            slices: int) -> PartitionFrontierEstimate:
    """Per-slice maxima over an equal-width partition of [0, 1], smoothed."""
    if slices < 1:
        raise ValueError("need at least one slice")
    if h <= 0:
        raise ValueError("bandwidth must be positive")
    edges = np.linspace(0.0, 1.0, slices + 1)
    centers = 0.5 * (edges[:-1] + edges[1:])
    idx = np.clip((sample.x * slices).astype(int), 0, slices - 1)
    peaks = np.zeros(slices)
    occupied = np.zeros(slices, dtype=bool)
    np.maximum.at(peaks, idx, sample.y)
    occupied[idx] = True
    peaks[~occupied] = 0.0
    return PartitionFrontierEstimate(
        kernel=kernel,
        h=float(h),
        centers=centers,
        width=1.0 / slices,
        peaks=peaks,
        occupied=occupied,
    )


def evaluate_estimate(estimate, x) -> np.ndarray | float:
    return estimate.evaluate(x)


def support_vector_count(estimate) -> int:
    """Coefficients above the sparsity threshold (relative 1e-7, floor 1e-12)."""
    return estimate.support_count


def log_likelihood(sample: Sample, estimate: KernelFrontierEstimate) -> float:
    """Log density of the sample under the fitted support, -inf if uncovered.

    Covered samples score -n log(total mass), so smaller mass is always more
    likely; minimizing the area is maximum likelihood over the family.
    """
    fitted = estimate.evaluate(sample.x)
    if float(np.max(sample.y - fitted)) > 1e-9:
        return -math.inf
    mass = estimate.total_mass
    if mass <= 0.0:
        return math.inf  # zero-area support covering only y = 0 points
    return -sample.n * math.log(mass)


# ---------------------------------------------------------------------------
# serialization

def estimate_to_dict(estimate) -> dict:
    if isinstance(estimate, KernelFrontierEstimate):
        out = {
            "type": "modified" if estimate.cap is not None else "kernel",
            "kernel": estimate.kernel.name,
            "h": estimate.h,
            "atoms": [
                {"x": float(x), "alpha": float(w)}
                for x, w in zip(estimate.atom_x, estimate.atom_weight)
            ],
        }
        if estimate.cap is not None:
            out["cap"] = estimate.cap
        return out
    if isinstance(estimate, FourierFrontierEstimate):
        return {
            "type": "fourier",
            "c0": estimate.c0,
            "a": [float(v) for v in estimate.cos_coef],
            "b": [float(v) for v in estimate.sin_coef],
            "M": estimate.harmonics,
            "L": estimate.budget,
        }
    if isinstance(estimate, PartitionFrontierEstimate):
        return {
            "type": "partition",
            "kernel": estimate.kernel.name,
            "h": estimate.h,
            "slices": estimate.slices,
            "atoms": [
                {"x": float(x), "alpha": float(w)}
                for x, w, occ in zip(estimate.centers, estimate.coefficients,
                                     estimate.occupied)
                if occ
            ],
        }
    raise TypeError(f"cannot serialize {type(estimate).__name__}")


def estimate_from_dict(data: dict):
    kind = data.get("type")
    if kind in ("kernel", "modified"):
        atoms = data.get("atoms", [])
        return KernelFrontierEstimate(
            kernel=kernel_by_name(data["kernel"]),
            h=float(data["h"]),
            atom_x=np.array([a["x"] for a in atoms], dtype=float),
            atom_weight=np.array([a["alpha"] for a in atoms], dtype=float),
            cap=float(data["cap"]) if data.get("cap") is not None else None,
            objective=float(sum(a["alpha"] for a in atoms)),
            dual_gap=0.0,
            dropped_mass=0.0,
        )
    if kind == "fourier":
        return FourierFrontierEstimate(
            c0=float(data["c0"]),
            cos_coef=np.asarray(data["a"], dtype=float),
            sin_coef=np.asarray(data["b"], dtype=float),
            budget=float(data["L"]),
            objective=float(data["c0"]),
            dual_gap=0.0,
        )
    if kind == "partition":
        slices = int(data["slices"])
        edges = np.linspace(0.0, 1.0, slices + 1)
        centers = 0.5 * (edges[:-1] + edges[1:])
        peaks = np.zeros(slices)
        occupied = np.zeros(slices, dtype=bool)
        width = 1.0 / slices
        for atom in data.get("atoms", []):
            r = int(np.clip(round(atom["x"] * slices - 0.5), 0, slices - 1))
            peaks[r] = atom["alpha"] / width
            occupied[r] = True
        return PartitionFrontierEstimate(
            kernel=kernel_by_name(data["kernel"]),
            h=float(data["h"]),
            centers=centers,
            width=width,
            peaks=peaks,
            occupied=occupied,
        )
    raise ValueError(f"unknown estimate type {kind!r}")


def write_curve(path: str | Path, estimate, points: int = 201) -> None:
    """Export the fitted curve as CSV ``x,value`` on a uniform grid."""
    xs = np.linspace(0.0, 1.0, points)
    values = estimate.evaluate(xs)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "value"])
        for x, v in zip(xs, values):
            writer.writerow([repr(float(x)), repr(float(v))])
