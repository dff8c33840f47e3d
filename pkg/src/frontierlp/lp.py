"""Dense linear programs with certified solutions.

The solver is a bounded-variable primal simplex on the revised (inverse-basis)
form, run in two phases with explicit artificial variables.  Nonbasic
variables may rest on either bound, so upper-bounded and free variables are
handled natively rather than by splitting.  Entering selection uses Dantzig
pricing until a degeneracy stall and then switches to Bland's rule, which
cannot cycle.  Final primal/dual certificates are recomputed from a fresh
factorization of the optimal basis and validated before they are returned.

``brute_force_lp`` is an independent vertex-enumeration oracle for small
instances, used by the test suite to cross-check the simplex.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

__all__ = [
    "LinearProgram",
    "LpSolution",
    "PivotLimitError",
    "solve_lp",
    "brute_force_lp",
    "duality_gap",
    "complementarity_residual",
    "format_lp",
]

PIVOT_TOL = 1e-10  # matrix entries below this magnitude are treated as zero
FEAS_TOL = 1e-9    # absolute tolerance on constraint residuals
GAP_TOL = 1e-8     # relative tolerance on the primal/dual objective gap

_SENSES = (">=", "<=", "=")

# nonbasic/basic state codes
_AT_LOWER, _AT_UPPER, _FREE, _BASIC = 0, 1, 2, 3


class PivotLimitError(RuntimeError):
    """The cycling safeguard was exhausted; indicates a solver defect."""


@dataclass(frozen=True)
class LinearProgram:
    """Minimize ``objective @ x`` subject to rows ``a @ x (sense) b`` and bounds.

    ``lower``/``upper`` default to [0, +inf) per variable; use ``-np.inf`` /
    ``np.inf`` for unbounded sides.
    """

    objective: np.ndarray
    rows: np.ndarray
    senses: tuple[str, ...]
    rhs: np.ndarray
    lower: np.ndarray = None
    upper: np.ndarray = None

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.objective, dtype=float))
        rows = np.asarray(self.rows, dtype=float)
        if rows.size == 0:
            rows = rows.reshape(0, c.size)
        rows = np.atleast_2d(rows)
        rhs = np.atleast_1d(np.asarray(self.rhs, dtype=float))
        senses = tuple(self.senses)
        if rows.shape[1] != c.size:
            raise ValueError(
                f"constraint rows have {rows.shape[1]} coefficients, objective has {c.size}"
            )
        if len(senses) != rows.shape[0] or rhs.size != rows.shape[0]:
            raise ValueError("rows, senses and rhs must have matching lengths")
        for s in senses:
            if s not in _SENSES:
                raise ValueError(f"unknown constraint sense {s!r}")
        lower = self.lower
        upper = self.upper
        lower = np.zeros(c.size) if lower is None else np.atleast_1d(np.asarray(lower, float))
        upper = np.full(c.size, np.inf) if upper is None else np.atleast_1d(np.asarray(upper, float))
        if lower.size != c.size or upper.size != c.size:
            raise ValueError("bounds must have one (lower, upper) pair per variable")
        if np.any(lower > upper):
            raise ValueError("every lower bound must be <= the matching upper bound")
        for name, arr in (("objective", c), ("rows", rows), ("rhs", rhs),
                          ("lower", lower), ("upper", upper)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "senses", senses)

    @property
    def n_variables(self) -> int:
        return self.objective.size

    @property
    def n_rows(self) -> int:
        return self.rows.shape[0]


@dataclass(frozen=True)
class LpSolution:
    """Solver output; primal/dual certificates are present when optimal."""

    status: str                     # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None = None
    objective: float | None = None
    duals: np.ndarray | None = None
    reduced_costs: np.ndarray | None = None
    iterations: int = 0


def format_lp(program: LinearProgram) -> str:
    """Plain-text dump: objective row, constraint rows ``a.. sense b``, bounds."""

    def fmt(v: float) -> str:
        return f"{v:.12g}"

    lines = ["minimize", " ".join(fmt(v) for v in program.objective), "subject to"]
    for row, sense, b in zip(program.rows, program.senses, program.rhs):
        lines.append(" ".join(fmt(v) for v in row) + f" {sense} {fmt(b)}")
    lines.append("bounds")
    for lo, hi in zip(program.lower, program.upper):
        lines.append(f"{fmt(lo)} {fmt(hi)}")
    return "\n".join(lines) + "\n"


class _BoundedSimplex:
    """Revised bounded-variable primal simplex over an explicit column set.

    Columns are laid out as [structural | slack identity | artificials], so
    pricing and column extraction can take unit-column shortcuts.
    ``unit_signs[j]`` holds the +-1 coefficient and row of column ``j`` when it
    is a unit column, else -1 rows.
    """

    def __init__(self, columns: np.ndarray, rhs: np.ndarray,
                 lower: np.ndarray, upper: np.ndarray, n_struct: int,
                 unit_rows: np.ndarray, unit_signs: np.ndarray):
        self.A = columns
        self.b = rhs
        self.lo = lower
        self.hi = upper
        self.m, self.ncols = columns.shape
        self.n_struct = n_struct
        self.unit_rows = unit_rows      # row index of each non-structural column
        self.unit_signs = unit_signs    # its +-1 coefficient
        self.state = np.full(self.ncols, _AT_LOWER, dtype=np.int8)
        self.value = np.zeros(self.ncols)
        self.basis = np.full(self.m, -1, dtype=int)
        self.binv = np.eye(self.m)
        self.xb = np.zeros(self.m)
        self.iterations = 0
        self.bland = False
        self._stall = 0
        self._cost = None
        self._d = None
        self._ger_buf = np.empty((self.m, self.m))

    # -- state helpers ---------------------------------------------------

    def full_values(self) -> np.ndarray:
        val = self.value.copy()
        val[self.basis] = self.xb
        return val

    def objective_value(self, cost: np.ndarray) -> float:
        return float(cost @ self.full_values())

    def refresh(self, cost: np.ndarray) -> None:
        """Recompute the inverse basis, basic values and reduced costs."""
        B = self.A[:, self.basis]
        try:
            self.binv = np.linalg.inv(B)
        except np.linalg.LinAlgError as exc:
            raise PivotLimitError("basis matrix became singular") from exc
        nonbasic = np.ones(self.ncols, dtype=bool)
        nonbasic[self.basis] = False
        rhs_eff = self.b - self.A[:, nonbasic] @ self.value[nonbasic]
        self.xb = self.binv @ rhs_eff
        self._price(cost)

    def _price(self, cost: np.ndarray) -> None:
        y = self.binv.T @ cost[self.basis]
        n = self.n_struct
        d = np.empty(self.ncols)
        d[:n] = cost[:n] - y @ self.A[:, :n]
        d[n:] = cost[n:] - self.unit_signs * y[self.unit_rows]
        self._d = d
        self._cost = cost

    def _column(self, q: int) -> np.ndarray:
        if q < self.n_struct:
            return self.binv @ self.A[:, q]
        sign = self.unit_signs[q - self.n_struct]
        col = self.binv[:, self.unit_rows[q - self.n_struct]]
        return sign * col

    # -- simplex iterations ----------------------------------------------

    def run(self, cost: np.ndarray, max_iterations: int) -> str:
        dtol = 1e-9 * (1.0 + float(np.abs(cost).max(initial=0.0)))
        stall_limit = 2 * self.m + 20
        refactor_every = 2000
        self._price(cost)
        fixed = self.lo == self.hi
        while True:
            d = self._d
            cand_low = (self.state == _AT_LOWER) & ~fixed & (d < -dtol)
            cand_up = (self.state == _AT_UPPER) & ~fixed & (d > dtol)
            cand_free = (self.state == _FREE) & (np.abs(d) > dtol)
            eligible = cand_low | cand_up | cand_free
            if not eligible.any():
                return "optimal"
            if self.bland:
                q = int(np.flatnonzero(eligible)[0])
            else:
                q = int(np.argmax(np.where(eligible, np.abs(d), 0.0)))
            direction = 1 if (cand_low[q] or (cand_free[q] and d[q] < 0.0)) else -1

            self.iterations += 1
            if self.iterations > max_iterations:
                raise PivotLimitError(
                    f"simplex exceeded {max_iterations} iterations "
                    f"({self.m} rows, {self.ncols} columns)"
                )

            z = self._column(q)
            step = self._ratio_and_step(q, direction, z)
            if step is None:
                return "unbounded"
            pivoted, t = step
            if pivoted:
                self._price(cost)
                if t <= 1e-11:
                    self._stall += 1
                    if self._stall > stall_limit:
                        self.bland = True
                else:
                    self._stall = 0
                if self.iterations % refactor_every == 0:
                    self.refresh(cost)

    def _ratio_and_step(self, q: int, direction: int, z: np.ndarray):
        s = direction * z
        lob = self.lo[self.basis]
        hib = self.hi[self.basis]
        t = np.full(self.m, np.inf)
        dec = s > PIVOT_TOL
        inc = s < -PIVOT_TOL
        t[dec] = (self.xb[dec] - lob[dec]) / s[dec]
        t[inc] = (self.xb[inc] - hib[inc]) / s[inc]
        np.maximum(t, 0.0, out=t)

        t_rows = float(t.min(initial=np.inf))
        t_own = self.hi[q] - self.lo[q]
        if not np.isfinite(t_rows) and not np.isfinite(t_own):
            return None

        if t_own <= t_rows:
            # bound flip: the entering variable crosses to its other bound
            self.xb -= direction * t_own * z
            if self.state[q] == _AT_LOWER:
                self.state[q] = _AT_UPPER
                self.value[q] = self.hi[q]
            else:
                self.state[q] = _AT_LOWER
                self.value[q] = self.lo[q]
            return False, t_own

        ties = np.flatnonzero(t <= t_rows + 1e-9 * (1.0 + t_rows))
        if self.bland:
            r = int(ties[np.argmin(self.basis[ties])])
        else:
            r = int(ties[np.argmax(np.abs(z[ties]))])
        t_star = float(t[r])

        self.xb -= direction * t_star * z
        enter_value = self.value[q] + direction * t_star
        leaving = self.basis[r]
        if s[r] > 0:
            self.state[leaving] = _AT_LOWER
            self.value[leaving] = self.lo[leaving]
        else:
            self.state[leaving] = _AT_UPPER
            self.value[leaving] = self.hi[leaving]
        self.basis[r] = q
        self.state[q] = _BASIC
        self.xb[r] = enter_value

        pivot_row = self.binv[r] / z[r]
        adj = z.copy()
        adj[r] = 0.0
        np.multiply.outer(adj, pivot_row, out=self._ger_buf)
        np.subtract(self.binv, self._ger_buf, out=self.binv)
        self.binv[r] = pivot_row
        return True, t_star


def _zero_row_presolve(program: LinearProgram):
    """Drop all-zero rows; detect rows no x can satisfy.  Returns kept indices."""
    zero = ~np.any(program.rows != 0.0, axis=1)
    if not zero.any():
        return np.arange(program.n_rows), True
    for i in np.flatnonzero(zero):
        b = program.rhs[i]
        sense = program.senses[i]
        ok = (sense == ">=" and b <= FEAS_TOL) or \
             (sense == "<=" and b >= -FEAS_TOL) or \
             (sense == "=" and abs(b) <= FEAS_TOL)
        if not ok:
            return np.flatnonzero(~zero), False
    return np.flatnonzero(~zero), True


def _solve_without_rows(program: LinearProgram) -> LpSolution:
    c, lo, hi = program.objective, program.lower, program.upper
    if np.any((c > 0) & np.isneginf(lo)) or np.any((c < 0) & np.isposinf(hi)):
        return LpSolution(status="unbounded")
    rest = np.where(np.isfinite(lo), lo, np.where(np.isfinite(hi), hi, 0.0))
    x = np.where(c > 0, lo, np.where(c < 0, hi, rest))
    return LpSolution(
        status="optimal",
        x=x,
        objective=float(c @ x),
        duals=np.zeros(program.n_rows),
        reduced_costs=c.copy(),
    )


def solve_lp(program: LinearProgram, max_iterations: int | None = None) -> LpSolution:
    """Solve the program, returning certified primal and dual values.

    Raises
    ------
    PivotLimitError
        If the anti-cycling safeguard is exhausted (must not happen).
    """
    kept, consistent = _zero_row_presolve(program)
    if not consistent:
        return LpSolution(status="infeasible")
    if kept.size == 0:
        sol = _solve_without_rows(program)
        return sol

    n = program.n_variables
    A = program.rows[kept]
    b = program.rhs[kept]
    senses = [program.senses[i] for i in kept]
    m = kept.size

    slack_lo = np.empty(m)
    slack_hi = np.empty(m)
    for i, sense in enumerate(senses):
        if sense == "<=":
            slack_lo[i], slack_hi[i] = 0.0, np.inf
        elif sense == ">=":
            slack_lo[i], slack_hi[i] = -np.inf, 0.0
        else:
            slack_lo[i], slack_hi[i] = 0.0, 0.0

    lo = program.lower
    hi = program.upper
    v_struct = np.where(np.isfinite(lo), lo, np.where(np.isfinite(hi), hi, 0.0))
    state_struct = np.where(
        np.isfinite(lo), _AT_LOWER, np.where(np.isfinite(hi), _AT_UPPER, _FREE)
    ).astype(np.int8)

    residual = b - A @ v_struct
    art_rows: list[int] = []
    art_signs: list[float] = []
    slack_basic = np.zeros(m, dtype=bool)
    slack_value = np.zeros(m)
    for i in range(m):
        if slack_lo[i] - FEAS_TOL <= residual[i] <= slack_hi[i] + FEAS_TOL:
            slack_basic[i] = True
            slack_value[i] = residual[i]
        else:
            slack_value[i] = min(max(residual[i], slack_lo[i]), slack_hi[i])
            deficit = residual[i] - slack_value[i]
            art_rows.append(i)
            art_signs.append(1.0 if deficit > 0 else -1.0)

    n_art = len(art_rows)
    ncols = n + m + n_art
    columns = np.zeros((m, ncols))
    columns[:, :n] = A
    columns[np.arange(m), n + np.arange(m)] = 1.0
    for k, (i, sign) in enumerate(zip(art_rows, art_signs)):
        columns[i, n + m + k] = sign

    lo_ext = np.concatenate([lo, slack_lo, np.zeros(n_art)])
    hi_ext = np.concatenate([hi, slack_hi, np.full(n_art, np.inf)])
    unit_rows = np.concatenate([np.arange(m), np.array(art_rows, dtype=int)]).astype(int)
    unit_signs = np.concatenate([np.ones(m), np.array(art_signs)])

    sim = _BoundedSimplex(columns, b, lo_ext, hi_ext, n, unit_rows, unit_signs)
    sim.value[:n] = v_struct
    sim.state[:n] = state_struct
    sim.value[n:n + m] = slack_value
    sim.state[n:n + m] = np.where(
        np.abs(slack_value - slack_lo) <= np.abs(slack_value - slack_hi),
        _AT_LOWER, _AT_UPPER,
    )
    for i in range(m):
        if slack_basic[i]:
            sim.basis[i] = n + i
            sim.state[n + i] = _BASIC
            sim.xb[i] = slack_value[i]
    for k, (i, sign) in enumerate(zip(art_rows, art_signs)):
        col = n + m + k
        sim.basis[i] = col
        sim.state[col] = _BASIC
        sim.xb[i] = abs(residual[i] - slack_value[i])
        sim.binv[i, i] = sign

    if max_iterations is None:
        max_iterations = 2000 + 15 * (m + ncols)

    if n_art:
        cost1 = np.zeros(ncols)
        cost1[n + m:] = 1.0
        status = sim.run(cost1, max_iterations)
        if status != "optimal":
            raise PivotLimitError("phase 1 reported an unbounded objective")
        if sim.objective_value(cost1) > 1e-8 * (1.0 + float(np.abs(b).sum())):
            return LpSolution(status="infeasible", iterations=sim.iterations)
        # artificials are done: freeze them at zero for phase 2
        sim.lo[n + m:] = 0.0
        sim.hi[n + m:] = 0.0
        sim.value[n + m:] = 0.0

    cost2 = np.zeros(ncols)
    cost2[:n] = program.objective
    status = sim.run(cost2, max_iterations)
    if status == "unbounded":
        return LpSolution(status="unbounded", iterations=sim.iterations)

    return _extract(sim, cost2, program, kept, max_iterations)


def _extract(sim: _BoundedSimplex, cost: np.ndarray, program: LinearProgram,
             kept: np.ndarray, max_iterations: int) -> LpSolution:
    """Fresh factorization of the final basis; validate, else resume pivoting."""
    n = program.n_variables
    for attempt in range(4):
        B = sim.A[:, sim.basis]
        nonbasic = np.ones(sim.ncols, dtype=bool)
        nonbasic[sim.basis] = False
        rhs_eff = sim.b - sim.A[:, nonbasic] @ sim.value[nonbasic]
        try:
            xb = np.linalg.solve(B, rhs_eff)
            y = np.linalg.solve(B.T, cost[sim.basis])
        except np.linalg.LinAlgError as exc:
            raise PivotLimitError("optimal basis matrix is singular") from exc
        values = sim.value.copy()
        values[sim.basis] = xb

        x = values[:n]
        duals = np.zeros(program.n_rows)
        duals[kept] = y
        reduced = program.objective - program.rows.T @ duals

        if _certificates_ok(program, x, duals, reduced):
            return LpSolution(
                status="optimal",
                x=x,
                objective=float(program.objective @ x),
                duals=duals,
                reduced_costs=reduced,
                iterations=sim.iterations,
            )
        if attempt == 3:
            raise PivotLimitError("optimal basis failed certificate validation")
        # numerical drift misled the iteration: refresh state and resume
        sim.refresh(cost)
        status = sim.run(cost, max_iterations)
        if status == "unbounded":
            raise PivotLimitError("post-validation resume reported unbounded")
    raise PivotLimitError("unreachable")  # pragma: no cover


def _certificates_ok(program: LinearProgram, x: np.ndarray,
                     duals: np.ndarray, reduced: np.ndarray) -> bool:
    scale = 1.0 + float(np.abs(program.rhs).max(initial=0.0))
    resid = program.rows @ x - program.rhs
    for i, sense in enumerate(program.senses):
        if sense == ">=" and resid[i] < -FEAS_TOL * scale:
            return False
        if sense == "<=" and resid[i] > FEAS_TOL * scale:
            return False
        if sense == "=" and abs(resid[i]) > FEAS_TOL * scale:
            return False
    bscale = 1.0 + float(np.abs(x).max(initial=0.0))
    lo, hi = program.lower, program.upper
    if np.any(x < lo - FEAS_TOL * bscale) or np.any(x > hi + FEAS_TOL * bscale):
        return False
    # dual feasibility on structural variables
    dtol = 1e-8 * (1.0 + float(np.abs(program.objective).max(initial=0.0)))
    at_lo = np.isfinite(lo) & (x <= lo + FEAS_TOL * bscale)
    at_hi = np.isfinite(hi) & (x >= hi - FEAS_TOL * bscale)
    interior = ~(at_lo | at_hi)
    if np.any(np.abs(reduced[interior]) > dtol):
        return False
    if np.any(reduced[at_lo & ~at_hi] < -dtol):
        return False
    if np.any(reduced[at_hi & ~at_lo] > dtol):
        return False
    # dual sign per row sense
    for i, sense in enumerate(program.senses):
        if sense == ">=" and duals[i] < -dtol:
            return False
        if sense == "<=" and duals[i] > dtol:
            return False
    return True


def duality_gap(solution: LpSolution, program: LinearProgram) -> float:
    """|primal objective - dual objective|, the dual assembled from the
    row multipliers, the rhs, and the bound multipliers (reduced costs)."""
    if solution.status != "optimal":
        raise ValueError("duality gap is defined for optimal solutions only")
    d = solution.reduced_costs
    dual_obj = float(solution.duals @ program.rhs)
    mlo = np.isfinite(program.lower)
    mhi = np.isfinite(program.upper)
    dual_obj += float(np.maximum(d[mlo], 0.0) @ program.lower[mlo])
    dual_obj += float(np.minimum(d[mhi], 0.0) @ program.upper[mhi])
    return abs(solution.objective - dual_obj)


def complementarity_residual(solution: LpSolution, program: LinearProgram) -> float:
    """Largest complementary-slackness violation over rows and variable bounds."""
    if solution.status != "optimal":
        raise ValueError("complementarity is defined for optimal solutions only")
    slack = program.rows @ solution.x - program.rhs
    worst = float(np.abs(solution.duals * slack).max(initial=0.0))
    d = solution.reduced_costs
    x = solution.x
    mlo = np.isfinite(program.lower)
    if mlo.any():
        worst = max(worst, float(np.abs(
            np.maximum(d[mlo], 0.0) * (x[mlo] - program.lower[mlo])
        ).max(initial=0.0)))
    mhi = np.isfinite(program.upper)
    if mhi.any():
        worst = max(worst, float(np.abs(
            np.minimum(d[mhi], 0.0) * (program.upper[mhi] - x[mhi])
        ).max(initial=0.0)))
    return worst


# ---------------------------------------------------------------------------
# brute-force oracle

_BRUTE_LIMIT = 14
_BRUTE_BOX = 1e6
_BRUTE_FEAS = 1e-7


def brute_force_lp(program: LinearProgram) -> LpSolution:
    """Enumerate basic points (intersections of n active planes) and keep the best.

    A verification oracle for tests: infinite bounds are replaced by a huge
    box; an optimum that moves when the box is doubled flags the program as
    unbounded.  Sized for ``variables + constraints <= 14``.
    """
    n, m = program.n_variables, program.n_rows
    if n + m > _BRUTE_LIMIT:
        raise ValueError(
            f"brute force is limited to variables + constraints <= {_BRUTE_LIMIT}"
        )
    best = _enumerate_vertices(program, _BRUTE_BOX)
    if best is None:
        return LpSolution(status="infeasible")
    obj, x, boxed = best
    if boxed:
        wider = _enumerate_vertices(program, 2.0 * _BRUTE_BOX)
        if wider is not None and wider[0] < obj - 1e-6 * (1.0 + abs(obj)):
            return LpSolution(status="unbounded")
    return LpSolution(status="optimal", x=x, objective=obj)


def _enumerate_vertices(program: LinearProgram, box: float):
    n = program.n_variables
    lo = np.maximum(program.lower, -box)
    hi = np.minimum(program.upper, box)
    inf_lo = ~np.isfinite(program.lower)
    inf_hi = ~np.isfinite(program.upper)

    planes: list[np.ndarray] = []
    plane_rhs: list[float] = []
    for row, b in zip(program.rows, program.rhs):
        planes.append(row)
        plane_rhs.append(b)
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        planes.append(e)
        plane_rhs.append(lo[j])
        if hi[j] > lo[j]:
            planes.append(e)
            plane_rhs.append(hi[j])
    planes_arr = np.array(planes)
    rhs_arr = np.array(plane_rhs)

    combos = np.array(list(itertools.combinations(range(len(planes)), n)))
    mats = planes_arr[combos]                       # (K, n, n)
    rhss = rhs_arr[combos]                          # (K, n)
    dets = np.linalg.det(mats)
    good = np.abs(dets) > 1e-10
    if not good.any():
        return None
    xs = np.linalg.solve(mats[good], rhss[good][..., None])[..., 0]

    ftol = _BRUTE_FEAS * (1.0 + np.abs(program.rhs).max(initial=0.0))
    ax = xs @ program.rows.T
    feasible = np.ones(xs.shape[0], dtype=bool)
    for i, sense in enumerate(program.senses):
        if sense == ">=":
            feasible &= ax[:, i] >= program.rhs[i] - ftol
        elif sense == "<=":
            feasible &= ax[:, i] <= program.rhs[i] + ftol
        else:
            feasible &= np.abs(ax[:, i] - program.rhs[i]) <= ftol
    feasible &= np.all(xs >= lo - _BRUTE_FEAS, axis=1)
    feasible &= np.all(xs <= hi + _BRUTE_FEAS, axis=1)
    if not feasible.any():
        return None

    xs = xs[feasible]
    objs = xs @ program.objective
    best_obj = objs.min()
    near = objs <= best_obj + 1e-9 * (1.0 + abs(best_obj))
    candidates = xs[near]
    boxed_flags = np.any(
        ((candidates >= box * (1 - 1e-9)) & inf_hi)
        | ((candidates <= -box * (1 - 1e-9)) & inf_lo),
        axis=1,
    )
    order = np.argsort(boxed_flags.astype(int), kind="stable")
    pick = order[0]
    return float(objs[near][pick]), candidates[pick], bool(boxed_flags[pick])
