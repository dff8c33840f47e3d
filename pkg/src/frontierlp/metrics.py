"""Error functionals and constraint audits against the true frontier."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frontier import FrontierFunction, Sample

__all__ = ["ErrorReport", "l1_error", "coverage_check", "error_report"]

DEFAULT_GRID = 20_001


def _quadrature_nodes(estimate, frontier: FrontierFunction, grid: int) -> np.ndarray:
    """Uniform grid plus every kink of the integrand as mandatory nodes.

    The integrand is piecewise smooth with kinks at the frontier knots and at
    the edges of each atom's kernel support; inserting those restores the
    trapezoid rule's quadratic accuracy.
    """
    nodes = [np.linspace(0.0, 1.0, grid), frontier.knot_x]
    mesh = np.asarray(estimate.mesh_points(), dtype=float)
    if mesh.size:
        inside = mesh[(mesh > 0.0) & (mesh < 1.0)]
        nodes.append(inside)
    return np.unique(np.concatenate(nodes))


def l1_error(estimate, frontier: FrontierFunction, grid: int = DEFAULT_GRID) -> float:
    """Integral of |estimate - frontier| over [0, 1] by composite trapezoid."""
    if grid < 1000:
        raise ValueError("grid must have at least 1000 nodes")
    xs = _quadrature_nodes(estimate, frontier, grid)
    diff = np.abs(np.asarray(estimate.evaluate(xs)) - frontier.evaluate(xs))
    return float(np.trapezoid(diff, xs))


def coverage_check(estimate, sample: Sample) -> float:
    """Largest amount by which a sample point sticks out above the estimate.

    Nonpositive means every point is covered; LP-optimal fits stay below 1e-7.
    """
    fitted = np.asarray(estimate.evaluate(sample.x))
    return float(np.max(sample.y - fitted))


@dataclass(frozen=True)
class ErrorReport:
    """L1 error and constraint audit of one fit against the truth."""

    l1: float
    grid_size: int
    max_coverage_violation: float
    support_count: int

    def to_dict(self) -> dict:
        return {
            "l1": self.l1,
            "grid_size": self.grid_size,
            "max_coverage_violation": self.max_coverage_violation,
            "support_count": self.support_count,
        }


def error_report(estimate, frontier: FrontierFunction, sample: Sample,
                 grid: int = DEFAULT_GRID) -> ErrorReport:
    return ErrorReport(
        l1=l1_error(estimate, frontier, grid),
        grid_size=grid,
        max_coverage_violation=max(0.0, coverage_check(estimate, sample)),
        support_count=estimate.support_count,
    )
