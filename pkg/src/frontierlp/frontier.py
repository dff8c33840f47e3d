"""Piecewise-linear frontier functions and uniform sampling of the region below them.

A frontier is a positive, piecewise-linear function on [0, 1] given by its
knots; by convention it is zero outside [0, 1].  Data are pairs (x, y) drawn
uniformly from the region between the x-axis and the frontier.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "FrontierFunction",
    "Sample",
    "benchmark_frontier",
    "sample_support",
    "read_frontier",
    "write_frontier",
    "read_sample",
    "write_sample",
]


@dataclass(frozen=True, eq=False)
class FrontierFunction:
    """Positive piecewise-linear function on [0, 1], zero outside.

    Parameters
    ----------
    knot_x : array-like
        Strictly increasing abscissas with knot_x[0] == 0 and knot_x[-1] == 1.
    knot_v : array-like
        Positive frontier values at the knots.  Evaluation interpolates
        linearly between knots.
    """

    knot_x: np.ndarray
    knot_v: np.ndarray

    def __eq__(self, other):
        return (
            isinstance(other, FrontierFunction)
            and np.array_equal(self.knot_x, other.knot_x)
            and np.array_equal(self.knot_v, other.knot_v)
        )

    def __hash__(self):
        return hash((self.knot_x.tobytes(), self.knot_v.tobytes()))

    def __post_init__(self):
        kx = np.asarray(self.knot_x, dtype=float)
        kv = np.asarray(self.knot_v, dtype=float)
        if kx.ndim != 1 or kx.shape != kv.shape or kx.size < 2:
            raise ValueError("knots must be two equally sized 1-D sequences with >= 2 entries")
        if not np.all(np.diff(kx) > 0):
            raise ValueError("knot abscissas must be strictly increasing")
        if kx[0] != 0.0 or kx[-1] != 1.0:
            raise ValueError("knot abscissas must start at 0 and end at 1")
        if not np.all(kv > 0):
            raise ValueError("knot values must be positive")
        kx.flags.writeable = False
        kv.flags.writeable = False
        object.__setattr__(self, "knot_x", kx)
        object.__setattr__(self, "knot_v", kv)

    @property
    def f_min(self) -> float:
        return float(self.knot_v.min())

    @property
    def f_max(self) -> float:
        return float(self.knot_v.max())

    @property
    def lipschitz(self) -> float:
        """Largest absolute slope between consecutive knots."""
        slopes = np.diff(self.knot_v) / np.diff(self.knot_x)
        return float(np.abs(slopes).max())

    @property
    def integral(self) -> float:
        """Exact area under the frontier (trapezoid rule is exact here)."""
        widths = np.diff(self.knot_x)
        heights = 0.5 * (self.knot_v[:-1] + self.knot_v[1:])
        return float(widths @ heights)

    def evaluate(self, x) -> np.ndarray | float:
        """Frontier value at x: linear interpolation on [0, 1], zero outside."""
        arr = np.asarray(x, dtype=float)
        out = np.interp(arr, self.knot_x, self.knot_v)
        out = np.where((arr < 0.0) | (arr > 1.0), 0.0, out)
        if np.isscalar(x) or arr.ndim == 0:
            return float(out)
        return out

    def mesh_points(self) -> np.ndarray:
        """Kink abscissas, for quadratures that want exact nodes there."""
        return self.knot_x.copy()


@dataclass(frozen=True, eq=False)
class Sample:
    """Immutable set of observations (x_i, y_i), i = 1..n."""

    x: np.ndarray
    y: np.ndarray

    def __eq__(self, other):
        return (
            isinstance(other, Sample)
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.y, other.y)
        )

    def __hash__(self):
        return hash((self.x.tobytes(), self.y.tobytes()))

    def __post_init__(self):
        xs = np.asarray(self.x, dtype=float)
        ys = np.asarray(self.y, dtype=float)
        if xs.ndim != 1 or xs.shape != ys.shape or xs.size == 0:
            raise ValueError("a sample needs two equally sized, non-empty coordinate arrays")
        xs.flags.writeable = False
        ys.flags.writeable = False
        object.__setattr__(self, "x", xs)
        object.__setattr__(self, "y", ys)

    @property
    def n(self) -> int:
        return int(self.x.size)


def benchmark_frontier() -> FrontierFunction:
    """Piecewise-linear test frontier used throughout the simulation benchmarks.

    Satisfies f(0) == f(1), stays well away from zero, and has maximum
    absolute slope 8.
    """
    return FrontierFunction(
        knot_x=np.array([0.0, 0.1, 0.2, 0.5, 0.8, 0.9, 1.0]),
        knot_v=np.array([0.1, 0.1, 0.6, 0.6, 0.9, 0.1, 0.1]),
    )


def sample_support(frontier: FrontierFunction, n: int, seed: int) -> Sample:
    """Draw n points uniformly from {(x, y): 0 <= x <= 1, 0 <= y <= f(x)}.

    Rejection sampling from the bounding box [0, 1] x [0, f_max]: exact (no
    discretization bias) and deterministic for a fixed seed.  The acceptance
    rate is integral / f_max.
    """
    if n < 1:
        raise ValueError("sample size must be >= 1")
    rng = np.random.default_rng(seed)
    # Fixed batch size keeps the draw pattern a function of the seed alone.
    accept = frontier.integral / frontier.f_max
    batch = max(256, int(np.ceil(1.25 * n / accept)))
    xs_out = np.empty(0)
    ys_out = np.empty(0)
    while xs_out.size < n:
        xs = rng.uniform(0.0, 1.0, batch)
        ys = rng.uniform(0.0, frontier.f_max, batch)
        keep = ys <= frontier.evaluate(xs)
        xs_out = np.concatenate([xs_out, xs[keep]])
        ys_out = np.concatenate([ys_out, ys[keep]])
    return Sample(x=xs_out[:n], y=ys_out[:n])


def write_frontier(path: str | Path, frontier: FrontierFunction) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["knot_x", "knot_v"])
        for kx, kv in zip(frontier.knot_x, frontier.knot_v):
            writer.writerow([repr(float(kx)), repr(float(kv))])


def read_frontier(path: str | Path) -> FrontierFunction:
    kx, kv = _read_two_columns(path, ("knot_x", "knot_v"))
    return FrontierFunction(knot_x=kx, knot_v=kv)


def write_sample(path: str | Path, sample: Sample) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y"])
        for x, y in zip(sample.x, sample.y):
            writer.writerow([repr(float(x)), repr(float(y))])


def read_sample(path: str | Path) -> Sample:
    xs, ys = _read_two_columns(path, ("x", "y"))
    return Sample(x=xs, y=ys)


def _read_two_columns(path: str | Path, expected_header: tuple[str, str]):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != list(expected_header):
            raise ValueError(f"{path}: expected CSV header {','.join(expected_header)}")
        first, second = [], []
        for row in reader:
            if not row:
                continue
            first.append(float(row[0]))
            second.append(float(row[1]))
    return np.array(first), np.array(second)
