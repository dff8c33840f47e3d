import numpy as np
import pytest

from frontierlp import (
    LinearProgram,
    brute_force_lp,
    complementarity_residual,
    duality_gap,
    format_lp,
    solve_lp,
)


def make_random_program(rng):
    n = int(rng.integers(1, 7))
    m = int(rng.integers(1, 7))
    rows = rng.uniform(-1, 1, (m, n))
    if m >= 2 and rng.random() < 0.3:
        rows[m - 1] = rows[0]  # duplicated row: forced degeneracy
    senses = tuple(str(rng.choice([">=", "<=", "="], p=[0.5, 0.35, 0.15])) for _ in range(m))
    rhs = rng.uniform(-1, 1, m)
    c = rng.uniform(-1, 1, n)
    lower = np.zeros(n)
    upper = np.full(n, np.inf)
    for j in range(n):
        kind = rng.random()
        if kind < 0.15:
            lower[j] = -np.inf
        elif kind < 0.35:
            upper[j] = lower[j] + rng.uniform(0.1, 2.0)
        elif kind < 0.45:
            lower[j] = rng.uniform(-1, 0)
    return LinearProgram(objective=c, rows=rows, senses=senses, rhs=rhs,
                         lower=lower, upper=upper)


def test_single_tight_constraint():
    p = LinearProgram(objective=[1.0], rows=[[5.0]], senses=(">=",), rhs=[2.0])
    s = solve_lp(p)
    assert s.status == "optimal"
    assert s.x[0] == pytest.approx(0.4)
    assert s.objective == pytest.approx(0.4)
    assert duality_gap(s, p) <= 1e-12


def test_zero_row_infeasible():
    p = LinearProgram(objective=[1.0], rows=[[0.0]], senses=(">=",), rhs=[1.0])
    assert solve_lp(p).status == "infeasible"
    assert brute_force_lp(p).status == "infeasible"


def test_unbounded_below():
    p = LinearProgram(objective=[-1.0], rows=[[1.0]], senses=(">=",), rhs=[0.0])
    assert solve_lp(p).status == "unbounded"
    assert brute_force_lp(p).status == "unbounded"


def test_redundant_zero_row_is_dropped():
    p = LinearProgram(objective=[1.0], rows=[[0.0], [3.0]], senses=(">=", ">="),
                      rhs=[-1.0, 6.0])
    s = solve_lp(p)
    assert s.status == "optimal"
    assert s.objective == pytest.approx(2.0)
    assert s.duals[0] == 0.0
    assert s.duals.size == 2


def test_no_rows_minimizes_over_box():
    p = LinearProgram(objective=[1.0, -2.0, 0.0], rows=np.empty((0, 3)), senses=(),
                      rhs=[], lower=[1.0, 0.0, -1.0], upper=[np.inf, 4.0, 1.0])
    s = solve_lp(p)
    assert s.status == "optimal"
    assert s.objective == pytest.approx(1.0 - 8.0)
    assert np.allclose(s.x, [1.0, 4.0, -1.0])


def test_dimension_mismatch_rejected():
    with pytest.raises(ValueError):
        LinearProgram(objective=[1.0, 2.0], rows=[[1.0]], senses=(">=",), rhs=[1.0])
    with pytest.raises(ValueError):
        LinearProgram(objective=[1.0], rows=[[1.0]], senses=(">=", "<="), rhs=[1.0])
    with pytest.raises(ValueError):
        LinearProgram(objective=[1.0], rows=[[1.0]], senses=(">=",), rhs=[1.0],
                      lower=[2.0], upper=[1.0])
    with pytest.raises(ValueError):
        LinearProgram(objective=[1.0], rows=[[1.0]], senses=("??",), rhs=[1.0])


def test_equality_and_free_variables():
    # x free, y >= 0: min x + y with x + y = 3, x - y <= 1
    p = LinearProgram(
        objective=[1.0, 1.0],
        rows=[[1.0, 1.0], [1.0, -1.0]],
        senses=("=", "<="),
        rhs=[3.0, 1.0],
        lower=[-np.inf, 0.0],
        upper=[np.inf, np.inf],
    )
    s = solve_lp(p)
    assert s.status == "optimal"
    assert s.objective == pytest.approx(3.0)
    b = brute_force_lp(p)
    assert b.status == "optimal"
    assert b.objective == pytest.approx(3.0)


def test_upper_bounds_activate():
    # min -x1 - x2 with x1 + x2 <= 3, x <= (1, 1.5)
    p = LinearProgram(objective=[-1.0, -1.0], rows=[[1.0, 1.0]], senses=("<=",),
                      rhs=[3.0], lower=[0.0, 0.0], upper=[1.0, 1.5])
    s = solve_lp(p)
    assert s.status == "optimal"
    assert s.objective == pytest.approx(-2.5)
    assert np.allclose(s.x, [1.0, 1.5])
    assert duality_gap(s, p) <= 1e-10


def test_brute_force_size_limit():
    p = LinearProgram(objective=np.ones(10), rows=np.eye(10)[:5], senses=(">=",) * 5,
                      rhs=np.zeros(5))
    with pytest.raises(ValueError):
        brute_force_lp(p)


def test_oracle_agreement_on_random_programs():
    rng = np.random.default_rng(202)
    optimal = 0
    for _ in range(120):
        p = make_random_program(rng)
        s = solve_lp(p)
        b = brute_force_lp(p)
        assert s.status == b.status
        if s.status == "optimal":
            optimal += 1
            assert s.objective == pytest.approx(b.objective, abs=1e-8, rel=1e-8)
    assert optimal >= 20  # the mix must actually exercise the optimal path


def test_every_optimal_solve_is_certified():
    rng = np.random.default_rng(710)
    checked = 0
    while checked < 40:
        p = make_random_program(rng)
        s = solve_lp(p)
        if s.status != "optimal":
            continue
        checked += 1
        scale = 1.0 + abs(s.objective)
        assert duality_gap(s, p) <= 1e-8 * scale
        assert complementarity_residual(s, p) <= 1e-8 * scale


def test_relative_gap_survives_scaling():
    rng = np.random.default_rng(88)
    while True:
        p = make_random_program(rng)
        s = solve_lp(p)
        if s.status == "optimal" and abs(s.objective) > 1e-3:
            break
    scaled = LinearProgram(objective=10.0 * p.objective, rows=p.rows, senses=p.senses,
                           rhs=10.0 * p.rhs, lower=10.0 * p.lower, upper=10.0 * p.upper)
    t = solve_lp(scaled)
    assert t.status == "optimal"
    assert t.objective == pytest.approx(100.0 * s.objective, rel=1e-9)
    assert duality_gap(t, scaled) <= 1e-8 * (1.0 + abs(t.objective))


def test_determinism():
    rng = np.random.default_rng(31)
    p = make_random_program(rng)
    first = solve_lp(p)
    second = solve_lp(p)
    assert first.status == second.status
    if first.status == "optimal":
        assert first.objective == second.objective
        assert np.array_equal(first.x, second.x)


def test_gap_requires_optimal():
    p = LinearProgram(objective=[1.0], rows=[[0.0]], senses=(">=",), rhs=[1.0])
    s = solve_lp(p)
    with pytest.raises(ValueError):
        duality_gap(s, p)
    with pytest.raises(ValueError):
        complementarity_residual(s, p)


def test_degenerate_duplicate_rows():
    row = [0.3, -0.7, 0.2]
    p = LinearProgram(
        objective=[1.0, 1.0, 1.0],
        rows=[row, row, row, [1.0, 1.0, 1.0]],
        senses=(">=",) * 4,
        rhs=[0.1, 0.1, 0.1, 0.5],
    )
    s = solve_lp(p)
    b = brute_force_lp(p)
    assert s.status == b.status == "optimal"
    assert s.objective == pytest.approx(b.objective, abs=1e-9)


def test_format_lp_layout():
    p = LinearProgram(objective=[1.0, 0.5], rows=[[2.0, -1.0]], senses=("<=",),
                      rhs=[3.0], lower=[0.0, -np.inf], upper=[np.inf, 2.0])
    text = format_lp(p)
    lines = text.splitlines()
    assert lines[0] == "minimize"
    assert lines[1].split() == ["1", "0.5"]
    assert lines[2] == "subject to"
    assert lines[3].split() == ["2", "-1", "<=", "3"]
    assert lines[4] == "bounds"
    assert lines[5].split() == ["0", "inf"]
    assert lines[6].split() == ["-inf", "2"]
