import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from coflowsched.lp import LinearProgram, LpStatus, add_constraint, solve


def test_single_bound():
    res = solve(LinearProgram(1, [1.0], (([1.0], 3.0),)))
    assert res.status is LpStatus.OPTIMAL
    assert res.values[0] == pytest.approx(3.0)
    assert res.objective_value == pytest.approx(3.0)


def test_sum_constraint():
    res = solve(LinearProgram(2, [1.0, 1.0], (([1.0, 1.0], 2.0),)))
    assert res.objective_value == pytest.approx(2.0)


def _vertex_oracle():
    # vertices of {a + b >= 4, a >= 1, b >= 0}: (1, 3) and (4, 0)
    return min((2 * a + b, (a, b)) for a, b in [(1, 3), (4, 0)])


def test_two_vertex_program():
    best, (a, b) = _vertex_oracle()
    res = solve(LinearProgram(2, [2.0, 1.0], (([1.0, 1.0], 4.0),), [1.0, 0.0]))
    assert res.objective_value == pytest.approx(best)
    assert res.values == pytest.approx([a, b])


def test_infeasible_and_unbounded():
    infeasible = LinearProgram(1, [1.0], (([-1.0], -1.0), ([1.0], 2.0)))
    assert solve(infeasible).status is LpStatus.INFEASIBLE
    unbounded = LinearProgram(2, [-1.0, 0.0], (([1.0, 1.0], 4.0),))
    assert solve(unbounded).status is LpStatus.UNBOUNDED


def test_iteration_limit():
    lp = LinearProgram(2, [2.0, 1.0], (([1.0, 1.0], 4.0), ([1.0, 2.0], 5.0)), [1.0, 0.0])
    assert solve(lp, max_iterations=0).status is LpStatus.ITERATION_LIMIT


def test_add_constraint():
    lp = LinearProgram(2, [1.0, 1.0])
    grown = add_constraint(lp, [1.0, 0.0], 1.0)
    assert len(lp.constraints) == 0
    assert len(grown.constraints) == 1
    with pytest.raises(ValueError):
        add_constraint(lp, [1.0], 1.0)


def test_redundant_constraint_keeps_optimum():
    lp = LinearProgram(2, [2.0, 1.0], (([1.0, 1.0], 4.0),), [1.0, 0.0])
    again = add_constraint(lp, [1.0, 1.0], 4.0)
    assert solve(again).objective_value == pytest.approx(solve(lp).objective_value)


def test_degenerate_program_terminates():
    # many constraints through the same vertex
    rows = tuple(([1.0, float(k)], float(k)) for k in range(8))
    res = solve(LinearProgram(2, [1.0, 1.0], rows))
    assert res.optimal
    assert res.objective_value == pytest.approx(1.0)


covering = st.integers(1, 4).flatmap(
    lambda n: st.tuples(
        st.just(n),
        st.lists(st.integers(0, 5), min_size=n, max_size=n),
        st.lists(
            st.tuples(st.lists(st.integers(0, 4), min_size=n, max_size=n), st.integers(-3, 12)),
            min_size=1,
            max_size=6,
        ),
        st.lists(st.integers(0, 3), min_size=n, max_size=n),
    )
)


@settings(max_examples=150, deadline=None)
@given(covering)
def test_matches_reference_solver(data):
    n, c, rows, lower = data
    lp = LinearProgram(n, c, tuple((r, b) for r, b in rows), lower)
    res = solve(lp)
    ref = linprog(
        c,
        A_ub=-np.array([r for r, _ in rows], dtype=float),
        b_ub=-np.array([b for _, b in rows], dtype=float),
        bounds=[(lb, None) for lb in lower],
        method="highs",
    )
    if ref.status == 2:
        assert res.status is LpStatus.INFEASIBLE
        return
    assert ref.status == 0
    assert res.optimal
    assert res.objective_value == pytest.approx(ref.fun, abs=1e-7)
    A = np.array([r for r, _ in rows], dtype=float)
    assert np.all(A @ res.values >= np.array([b for _, b in rows]) - 1e-7)
    assert np.all(res.values >= np.array(lower) - 1e-7)


@settings(max_examples=80, deadline=None)
@given(covering, st.lists(st.integers(0, 4), min_size=4, max_size=4), st.integers(0, 15))
def test_added_cut_never_lowers_objective(data, extra, bound):
    n, c, rows, lower = data
    lp = LinearProgram(n, c, tuple((r, b) for r, b in rows), lower)
    base = solve(lp)
    if not base.optimal:
        return
    cut = add_constraint(lp, extra[:n], bound)
    res = solve(cut)
    if res.optimal:
        assert res.objective_value >= base.objective_value - 1e-9


def test_deterministic():
    rows = tuple(([float(a), float(b)], float(a + b)) for a, b in itertools.product(range(3), repeat=2))
    lp = LinearProgram(2, [1.0, 2.0], rows)
    a, b = solve(lp), solve(lp)
    assert a.status == b.status
    assert np.array_equal(a.values, b.values)
