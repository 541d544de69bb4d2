"""Dense-tableau two-phase simplex for small covering-style LPs.

Problems have the form::

    minimize    c . x
    subject to  a_r . x >= b_r      for every stored constraint r
                x >= lower

Pivoting follows Bland's rule (lowest-index entering column, lowest-index
leaving basic variable on ratio ties), so results are deterministic and the
method cannot cycle.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

DEFAULT_EPS_FEAS = 1e-7
DEFAULT_MAX_ITERATIONS = 100_000

_PIVOT_TOL = 1e-9


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration-limit"


@dataclass(frozen=True)
class LinearProgram:
    num_vars: int
    objective: np.ndarray
    constraints: tuple[tuple[np.ndarray, float], ...] = ()
    var_lower_bounds: np.ndarray | None = None

    def __post_init__(self):
        obj = np.asarray(self.objective, dtype=float)
        if obj.shape != (self.num_vars,):
            raise ValueError(f"objective has shape {obj.shape}, expected ({self.num_vars},)")
        lower = (
            np.zeros(self.num_vars)
            if self.var_lower_bounds is None
            else np.asarray(self.var_lower_bounds, dtype=float)
        )
        if lower.shape != (self.num_vars,):
            raise ValueError(f"lower bounds have shape {lower.shape}, expected ({self.num_vars},)")
        if not (np.all(np.isfinite(obj)) and np.all(np.isfinite(lower))):
            raise ValueError("objective and lower bounds must be finite")
        object.__setattr__(self, "objective", obj)
        object.__setattr__(self, "var_lower_bounds", lower)
        cons = tuple(_check_row(self.num_vars, row, bound) for row, bound in self.constraints)
        object.__setattr__(self, "constraints", cons)


@dataclass
class LpResult:
    status: LpStatus
    values: np.ndarray = field(default_factory=lambda: np.zeros(0))
    objective_value: float = float("nan")
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


def _check_row(n: int, row, bound) -> tuple[np.ndarray, float]:
    r = np.asarray(row, dtype=float)
    if r.shape != (n,):
        raise ValueError(f"constraint row has shape {r.shape}, expected ({n},)")
    b = float(bound)
    if not (np.all(np.isfinite(r)) and np.isfinite(b)):
        raise ValueError("constraint coefficients and bound must be finite")
    return r, b


def add_constraint(lp: LinearProgram, row, bound) -> LinearProgram:
    """Return a copy of ``lp`` with ``row . x >= bound`` appended."""
    r, b = _check_row(lp.num_vars, row, bound)
    return LinearProgram(
        lp.num_vars, lp.objective, lp.constraints + ((r, b),), lp.var_lower_bounds
    )


def _pivot(T: np.ndarray, basis: list[int], r: int, c: int) -> None:
    T[r] /= T[r, c]
    col = T[:, c].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])
    T[:, c] = 0.0
    T[r, c] = 1.0
    basis[r] = c


def _bland(T: np.ndarray, basis: list[int], ncols: int, budget: int) -> tuple[str, int]:
    """Run simplex iterations on tableau ``T`` (last row holds reduced costs).

    Returns ("optimal" | "unbounded" | "limit", iterations used).
    """
    it = 0
    m = T.shape[0] - 1
    while True:
        neg = np.flatnonzero(T[-1, :ncols] < -_PIVOT_TOL)
        if neg.size == 0:
            return "optimal", it
        if it >= budget:
            return "limit", it
        c = int(neg[0])
        col = T[:m, c]
        rows = np.flatnonzero(col > _PIVOT_TOL)
        if rows.size == 0:
            return "unbounded", it
        ratios = T[rows, -1] / col[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12 * (1.0 + abs(best))]
        r = int(min(ties, key=lambda i: basis[i]))
        _pivot(T, basis, r, c)
        it += 1


def solve(
    lp: LinearProgram,
    eps_feas: float = DEFAULT_EPS_FEAS,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
) -> LpResult:
    n = lp.num_vars
    c = lp.objective
    lower = lp.var_lower_bounds
    if not lp.constraints:
        if np.any(c < 0):
            return LpResult(LpStatus.UNBOUNDED)
        return LpResult(LpStatus.OPTIMAL, lower.copy(), float(c @ lower))

    A = np.array([row for row, _ in lp.constraints])
    b = np.array([bound for _, bound in lp.constraints])
    m = len(b)
    # shift x = y + lower so every variable is non-negative
    beta = b - A @ lower

    # a.y - s = beta; rows with beta <= 0 are negated so the surplus is basic
    flip = beta <= 0
    sign = np.where(flip, -1.0, 1.0)
    A_eq = np.hstack([A, -np.eye(m)]) * sign[:, None]
    rhs = beta * sign
    art_rows = np.flatnonzero(~flip)
    na = len(art_rows)
    ncols = n + m + na

    T = np.zeros((m + 1, ncols + 1))
    T[:m, : n + m] = A_eq
    T[:m, -1] = rhs
    basis = [0] * m
    for r in np.flatnonzero(flip):
        basis[r] = n + r
    for a, r in enumerate(art_rows):
        T[r, n + m + a] = 1.0
        basis[r] = n + m + a

    iterations = 0
    if na:
        # phase 1: minimize the sum of artificials
        T[-1, : n + m] = -T[art_rows, : n + m].sum(axis=0)
        T[-1, -1] = -T[art_rows, -1].sum()
        outcome, used = _bland(T, basis, ncols, max_iterations)
        iterations += used
        if outcome == "limit":
            return LpResult(LpStatus.ITERATION_LIMIT, iterations=iterations)
        if -T[-1, -1] > eps_feas * (1.0 + np.abs(rhs).max()):
            return LpResult(LpStatus.INFEASIBLE, iterations=iterations)
        # drive artificials out of the basis; drop rows that are redundant
        keep = []
        for r in range(m):
            if basis[r] >= n + m:
                nz = np.flatnonzero(np.abs(T[r, : n + m]) > _PIVOT_TOL)
                if nz.size == 0:
                    continue
                _pivot(T, basis, r, int(nz[0]))
            keep.append(r)
        T = np.vstack([T[keep], T[-1:]])
        T = np.hstack([T[:, : n + m], T[:, -1:]])
        basis = [basis[r] for r in keep]
        ncols = n + m

    # phase 2 reduced costs
    cost = np.concatenate([c, np.zeros(m)])
    T[-1, :] = 0.0
    T[-1, :ncols] = cost
    for r, j in enumerate(basis):
        if cost[j] != 0.0:
            T[-1] -= cost[j] * T[r]
    outcome, used = _bland(T, basis, ncols, max_iterations - iterations)
    iterations += used
    if outcome == "limit":
        return LpResult(LpStatus.ITERATION_LIMIT, iterations=iterations)
    if outcome == "unbounded":
        return LpResult(LpStatus.UNBOUNDED, iterations=iterations)

    y = _basic_solution(A_eq[:, :ncols], rhs, basis, T, ncols)
    x = y[:n] + lower
    slack = A @ x - b
    if slack.size and slack.min() < -eps_feas:
        # refinement drifted; fall back to the tableau values
        y = np.zeros(ncols)
        y[basis] = T[: len(basis), -1]
        x = np.maximum(y[:n], 0.0) + lower
    return LpResult(LpStatus.OPTIMAL, x, float(c @ x), iterations)


def _basic_solution(A_eq, rhs, basis, T, ncols) -> np.ndarray:
    """Recompute basic values from the original data to shed pivot round-off."""
    y = np.zeros(ncols)
    B = A_eq[:, basis]
    try:
        if B.shape[0] == B.shape[1]:
            yb = np.linalg.solve(B, rhs)
        else:
            yb = np.linalg.lstsq(B, rhs, rcond=None)[0]
    except np.linalg.LinAlgError:
        yb = T[: len(basis), -1]
    y[basis] = np.maximum(yb, 0.0)
    return y
