import math

import numpy as np
import pytest
from scipy.integrate import simpson

from frontierlp import (
    KERNELS,
    Kernel,
    eval_kernel,
    kernel_by_name,
    kernel_constants,
    validate_kernel,
)


def test_epanechnikov_values():
    k = kernel_by_name("epanechnikov")
    assert eval_kernel(k, 0.0) == pytest.approx(0.75)   # forced by unit mass on [-1, 1]
    assert eval_kernel(k, 2.0) == 0.0
    assert eval_kernel(k, 1.0) == 0.0


def test_symmetry_everywhere():
    ts = np.linspace(0.0, 3.0, 301)
    for k in KERNELS.values():
        assert np.allclose(k(ts), k(-ts))
        assert np.all(k(ts) >= 0.0)


def test_epanechnikov_constants():
    consts = kernel_constants(kernel_by_name("epanechnikov"))
    assert consts["square_integral"] == pytest.approx(0.6)
    assert consts["second_moment"] == pytest.approx(0.2)
    assert consts["k_max"] == pytest.approx(0.75)
    assert consts["lipschitz"] == pytest.approx(1.5)
    assert consts["support_radius"] == 1.0


@pytest.mark.parametrize("name", sorted(KERNELS))
def test_declared_constants_match_quadrature(name):
    # quadrature is the independent check on the closed forms
    k = kernel_by_name(name)
    grid = np.linspace(-k.quad_radius, k.quad_radius, 40_001)
    vals = k.fn(grid)
    assert simpson(vals, x=grid) == pytest.approx(1.0, abs=1e-8)
    assert simpson(vals * vals, x=grid) == pytest.approx(k.square_integral, abs=1e-6)
    assert simpson(grid * grid * vals, x=grid) == pytest.approx(k.second_moment, abs=1e-6)
    assert vals.max() == pytest.approx(k.k_max, abs=1e-9)


@pytest.mark.parametrize("name", sorted(KERNELS))
def test_lipschitz_bound_on_probe_grid(name):
    k = kernel_by_name(name)
    grid = np.linspace(-k.quad_radius, k.quad_radius, 10_001)
    slopes = np.abs(np.diff(k.fn(grid)) / np.diff(grid))
    assert slopes.max() <= k.lipschitz * (1.0 + 1e-9) + 1e-9


@pytest.mark.parametrize("name", sorted(KERNELS))
def test_rescaled_kernel_mass_and_peak(name):
    k = kernel_by_name(name)
    for h in (0.05, 0.14, 0.5, 2.0):
        grid = np.linspace(-h * k.quad_radius, h * k.quad_radius, 20_001)
        assert simpson(k.scaled(grid, h), x=grid) == pytest.approx(1.0, abs=1e-6)
        assert k.scaled(0.0, h) == pytest.approx(k(0.0) / h)


@pytest.mark.parametrize("name", sorted(KERNELS))
def test_validation_passes(name):
    report = validate_kernel(kernel_by_name(name))
    assert report.passed, report.lines()
    assert report.finite_support == (name != "gaussian")


def test_validation_catches_unnormalized_kernel():
    base = kernel_by_name("epanechnikov")
    doubled = Kernel(
        name="epanechnikov_x2",
        fn=lambda t: 2.0 * base.fn(t),
        support_radius=1.0,
        k_max=1.5,
        lipschitz=3.0,
        square_integral=2.4,
        second_moment=0.4,
    )
    report = validate_kernel(doubled)
    assert not report.normalized
    assert report.integral == pytest.approx(2.0, abs=1e-6)
    assert not report.passed
    assert report.symmetric_nonnegative
    assert report.lipschitz_ok


def test_unknown_name_lists_choices():
    with pytest.raises(ValueError, match="epanechnikov"):
        kernel_by_name("box")


def test_triangular_and_biweight_closed_forms():
    tri = kernel_by_name("triangular")
    assert tri.square_integral == pytest.approx(2.0 / 3.0)
    assert tri.second_moment == pytest.approx(1.0 / 6.0)
    biw = kernel_by_name("biweight")
    assert biw.square_integral == pytest.approx(5.0 / 7.0)
    assert biw.second_moment == pytest.approx(1.0 / 7.0)
    assert biw.lipschitz == pytest.approx(5.0 * math.sqrt(3.0) / 6.0)


def test_gaussian_truncation_tail_is_negligible():
    k = kernel_by_name("gaussian")
    assert k.quad_radius == 10.0
    tail = math.erfc(10.0 / math.sqrt(2.0))
    assert tail < 1e-20
