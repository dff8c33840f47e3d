"""Smoothing kernels with analytic constants and numeric self-validation.

Every kernel is even, nonnegative, integrates to one, is Lipschitz, and has
finite square and second moments.  The constants are stored analytically;
``validate_kernel`` re-derives them by quadrature so a misdeclared kernel is
caught at test time rather than deep inside a fit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import simpson

__all__ = [
    "Kernel",
    "KernelValidation",
    "KERNELS",
    "kernel_by_name",
    "eval_kernel",
    "kernel_constants",
    "validate_kernel",
]

# Quadrature cut-off for unbounded-support kernels.  For the gaussian the
# neglected tail mass is erfc(10/sqrt(2)) < 1e-20.
_UNBOUNDED_QUAD_RADIUS = 10.0


def _epanechnikov(t: np.ndarray) -> np.ndarray:
    return np.where(np.abs(t) <= 1.0, 0.75 * (1.0 - t * t), 0.0)


def _triangular(t: np.ndarray) -> np.ndarray:
    return np.maximum(1.0 - np.abs(t), 0.0)


def _biweight(t: np.ndarray) -> np.ndarray:
    u = 1.0 - t * t
    return np.where(np.abs(t) <= 1.0, (15.0 / 16.0) * u * u, 0.0)


def _gaussian(t: np.ndarray) -> np.ndarray:
    return np.exp(-0.5 * t * t) / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class Kernel:
    """Even nonnegative kernel with its analytic constants.

    ``square_integral`` is the integral of K^2 and ``second_moment`` the
    integral of t^2 K(t); both must be finite.  ``support_radius`` is
    ``math.inf`` for kernels positive on the whole line.
    """

    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    support_radius: float
    k_max: float
    lipschitz: float
    square_integral: float
    second_moment: float

    def __call__(self, t) -> np.ndarray | float:
        out = self.fn(np.asarray(t, dtype=float))
        if np.isscalar(t) or np.ndim(t) == 0:
            return float(out)
        return out

    def scaled(self, t, h: float) -> np.ndarray | float:
        """Bandwidth-rescaled kernel K_h(t) = K(t / h) / h."""
        return self(np.asarray(t, dtype=float) / h) / h

    @property
    def finite_support(self) -> bool:
        return math.isfinite(self.support_radius)

    @property
    def quad_radius(self) -> float:
        return self.support_radius if self.finite_support else _UNBOUNDED_QUAD_RADIUS


KERNELS: dict[str, Kernel] = {
    "epanechnikov": Kernel(
        name="epanechnikov",
        fn=_epanechnikov,
        support_radius=1.0,
        k_max=0.75,
        lipschitz=1.5,
        square_integral=0.6,
        second_moment=0.2,
    ),
    "triangular": Kernel(
        name="triangular",
        fn=_triangular,
        support_radius=1.0,
        k_max=1.0,
        lipschitz=1.0,
        square_integral=2.0 / 3.0,
        second_moment=1.0 / 6.0,
    ),
    "biweight": Kernel(
        name="biweight",
        fn=_biweight,
        support_radius=1.0,
        k_max=15.0 / 16.0,
        lipschitz=5.0 * math.sqrt(3.0) / 6.0,
        square_integral=5.0 / 7.0,
        second_moment=1.0 / 7.0,
    ),
    "gaussian": Kernel(
        name="gaussian",
        fn=_gaussian,
        support_radius=math.inf,
        k_max=1.0 / math.sqrt(2.0 * math.pi),
        lipschitz=math.exp(-0.5) / math.sqrt(2.0 * math.pi),
        square_integral=0.5 / math.sqrt(math.pi),
        second_moment=1.0,
    ),
}


def kernel_by_name(name: str) -> Kernel:
    try:
        return KERNELS[name.lower()]
    except KeyError:
        raise ValueError(
            f"unknown kernel {name!r}; expected one of: {', '.join(sorted(KERNELS))}"
        ) from None


def eval_kernel(kernel: Kernel, t) -> np.ndarray | float:
    return kernel(t)


def kernel_constants(kernel: Kernel) -> dict[str, float]:
    """Analytic constants of the kernel as a plain dict."""
    return {
        "k_max": kernel.k_max,
        "lipschitz": kernel.lipschitz,
        "square_integral": kernel.square_integral,
        "second_moment": kernel.second_moment,
        "support_radius": kernel.support_radius,
    }


@dataclass(frozen=True)
class KernelValidation:
    """Numeric check of the kernel contract, one record per requirement."""

    kernel: str
    symmetric_nonnegative: bool
    max_asymmetry: float
    normalized: bool
    integral: float
    lipschitz_ok: bool
    max_slope: float
    declared_lipschitz: float
    moments_ok: bool
    square_integral: float
    second_moment: float
    finite_support: bool

    @property
    def passed(self) -> bool:
        return (
            self.symmetric_nonnegative
            and self.normalized
            and self.lipschitz_ok
            and self.moments_ok
        )

    def lines(self) -> list[str]:
        def mark(ok: bool) -> str:
            return "pass" if ok else "FAIL"

        return [
            f"kernel: {self.kernel}",
            f"  symmetry / nonnegativity: {mark(self.symmetric_nonnegative)}"
            f" (max asymmetry {self.max_asymmetry:.3e})",
            f"  normalization:            {mark(self.normalized)}"
            f" (integral {self.integral:.10f})",
            f"  lipschitz bound:          {mark(self.lipschitz_ok)}"
            f" (max slope {self.max_slope:.6f} vs declared {self.declared_lipschitz:.6f})",
            f"  square/second moments:    {mark(self.moments_ok)}"
            f" (K^2 -> {self.square_integral:.6f}, t^2 K -> {self.second_moment:.6f})",
            f"  finite support:           {self.finite_support}",
        ]


def validate_kernel(kernel: Kernel, nodes: int = 10_001) -> KernelValidation:
    """Probe symmetry, normalization, Lipschitz continuity and moments.

    Quadrature is composite Simpson on ``nodes`` points over the (possibly
    truncated) support.  The report carries measured values so a failure is
    diagnosable.
    """
    radius = kernel.quad_radius
    grid = np.linspace(-radius, radius, nodes)
    values = kernel.fn(grid)

    asym = float(np.max(np.abs(values - values[::-1])))
    symmetric_nonnegative = asym <= 1e-12 and bool(np.all(values >= 0.0))

    integral = float(simpson(values, x=grid))
    normalized = abs(integral - 1.0) <= 1e-6

    slopes = np.abs(np.diff(values) / np.diff(grid))
    max_slope = float(slopes.max())
    lipschitz_ok = max_slope <= kernel.lipschitz * (1.0 + 1e-9) + 1e-9

    sq = float(simpson(values * values, x=grid))
    second = float(simpson(grid * grid * values, x=grid))
    moments_ok = (
        math.isfinite(sq)
        and math.isfinite(second)
        and abs(sq - kernel.square_integral) <= 1e-4 * (1.0 + abs(kernel.square_integral))
        and abs(second - kernel.second_moment) <= 1e-4 * (1.0 + abs(kernel.second_moment))
    )

    return KernelValidation(
        kernel=kernel.name,
        symmetric_nonnegative=symmetric_nonnegative,
        max_asymmetry=asym,
        normalized=normalized,
        integral=integral,
        lipschitz_ok=lipschitz_ok,
        max_slope=max_slope,
        declared_lipschitz=kernel.lipschitz,
        moments_ok=moments_ok,
        square_integral=sq,
        second_moment=second,
        finite_support=kernel.finite_support,
    )
