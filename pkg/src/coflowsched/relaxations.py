"""LP relaxations for divisible and indivisible coflows, solved by cutting planes.

Both relaxations carry one exponential family per port::

    sum_{l in S} d_l C_l >= (d(S)^2 + d2(S)) / (2m)      for every subset S

where ``d(S)`` is the total size in S and ``d2(S)`` the sum of squared sizes.
Items are flows (divisible) or per-port coflow loads (indivisible).  A most
violated member of the family is always a prefix of the items sorted by
candidate completion time, so separation is a sort plus one linear scan.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np

from . import lp as lpe
from .model import CoflowInstance, FlowKey, compute_port_loads

DEFAULT_EPS_SEP = 1e-6
DEFAULT_MAX_ROUNDS = 200

# (item id, size, candidate completion time)
PortItem = tuple[Hashable, float, float]
# ("in", i) or ("out", j)
Port = tuple[str, int]


class RoundLimitError(RuntimeError):
    """Raised when cuts are still violated after ``max_rounds`` LP solves.

    ``partial`` holds the last (uncertified) solution.
    """

    def __init__(self, partial):
        super().__init__(f"cutting-plane round limit reached after {partial.rounds} rounds")
        self.partial = partial


class LpSolveError(RuntimeError):
    pass


@dataclass(frozen=True)
class ViolatedCut:
    port: Port | None
    member_set: tuple[Hashable, ...]
    violation: float


@dataclass
class DivisibleLpSolution:
    flow_completion: dict[FlowKey, float]
    coflow_completion: dict[int, float]
    objective: float
    rounds: int
    converged: bool = True
    objective_history: list[float] = field(default_factory=list)
    num_cuts: int = 0


@dataclass
class IndivisibleLpSolution:
    coflow_completion: dict[int, float]
    objective: float
    rounds: int
    converged: bool = True
    objective_history: list[float] = field(default_factory=list)
    num_cuts: int = 0


def subset_rhs(sizes, m: int) -> float:
    d = float(sum(sizes))
    d2 = float(sum(x * x for x in sizes))
    return (d * d + d2) / (2 * m)


def max_prefix_violation(
    port_items: Sequence[PortItem], m: int
) -> tuple[float, tuple[Hashable, ...]]:
    """Largest violation over prefixes in (C, id) order, with its prefix.

    A violation is the amount by which the right-hand side exceeds the left,
    so it is never negative: when every prefix is satisfied the result is
    ``(0.0, ())``.  Otherwise the shortest maximizing prefix is returned.
    Over the subsets of a port, any maximizer with positive violation is a
    prefix, which is what makes this scan exact.
    """
    if not port_items:
        return 0.0, ()
    items = sorted(port_items, key=lambda it: (it[2], it[0]))
    d = np.array([it[1] for it in items], dtype=float)
    C = np.array([it[2] for it in items], dtype=float)
    cum_d = np.cumsum(d)
    rhs = (cum_d**2 + np.cumsum(d * d)) / (2 * m)
    lhs = np.cumsum(d * C)
    viol = rhs - lhs
    k = int(np.argmax(viol))
    if viol[k] <= 0:
        return 0.0, ()
    return float(viol[k]), tuple(it[0] for it in items[: k + 1])


def separate_prefix(
    port_items: Sequence[PortItem],
    m: int,
    eps_sep: float = DEFAULT_EPS_SEP,
    port: Port | None = None,
) -> ViolatedCut | None:
    viol, members = max_prefix_violation(port_items, m)
    if viol > eps_sep:
        return ViolatedCut(port, members, viol)
    return None


def _cutting_planes(program, ports, m, eps_sep, max_rounds, eps_feas):
    """Solve, separate on every port, add the most violated cut per port, repeat.

    ``ports`` maps a port to a list of (variable index, size).  Returns
    (values, objective, rounds, converged, history, cuts added).
    """
    history: list[float] = []
    cuts = 0
    rounds = 0
    while True:
        res = lpe.solve(program, eps_feas=eps_feas)
        rounds += 1
        if not res.optimal:
            raise LpSolveError(f"LP solve failed with status {res.status.value}")
        history.append(res.objective_value)
        x = res.values
        found = []
        for port in sorted(ports):
            items = [(v, size, x[v]) for v, size in ports[port]]
            cut = separate_prefix(items, m, eps_sep, port)
            if cut is not None:
                found.append(cut)
        if not found:
            return x, res.objective_value, rounds, True, history, cuts
        if rounds >= max_rounds:
            return x, res.objective_value, rounds, False, history, cuts
        for cut in found:
            sizes = dict(ports[cut.port])
            row = np.zeros(program.num_vars)
            for v in cut.member_set:
                row[v] = sizes[v]
            program = lpe.add_constraint(
                program, row, subset_rhs([sizes[v] for v in cut.member_set], m)
            )
            cuts += 1


def solve_divisible_lp(
    instance: CoflowInstance,
    eps_sep: float = DEFAULT_EPS_SEP,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
    eps_feas: float = lpe.DEFAULT_EPS_FEAS,
) -> DivisibleLpSolution:
    """Flow-level relaxation: one variable per flow, then one per coflow.

    Flow release-plus-size bounds are variable lower bounds; the coflow
    variables dominate their flows through explicit rows.
    """
    flows = instance.flows
    coflows = sorted(instance.coflows, key=lambda c: c.id)
    nf = len(flows)
    cvar = {c.id: nf + t for t, c in enumerate(coflows)}
    release = {c.id: c.release for c in coflows}
    n = nf + len(coflows)

    objective = np.zeros(n)
    lower = np.zeros(n)
    for c in coflows:
        objective[cvar[c.id]] = float(c.weight)
    rows = []
    ports: dict[Port, list[tuple[int, int]]] = defaultdict(list)
    for v, f in enumerate(flows):
        lower[v] = release[f.coflow_id] + f.size
        row = np.zeros(n)
        row[cvar[f.coflow_id]] = 1.0
        row[v] = -1.0
        rows.append((row, 0.0))
        ports[("in", f.input)].append((v, f.size))
        ports[("out", f.output)].append((v, f.size))
    for c in coflows:
        lower[cvar[c.id]] = c.release + max(f.size for f in c.flows)

    program = lpe.LinearProgram(n, objective, tuple(rows), lower)
    x, obj, rounds, ok, hist, ncuts = _cutting_planes(
        program, ports, instance.network.cores, eps_sep, max_rounds, eps_feas
    )
    sol = DivisibleLpSolution(
        flow_completion={f.key: float(x[v]) for v, f in enumerate(flows)},
        coflow_completion={c.id: float(x[cvar[c.id]]) for c in coflows},
        objective=obj,
        rounds=rounds,
        converged=ok,
        objective_history=hist,
        num_cuts=ncuts,
    )
    if not ok:
        raise RoundLimitError(sol)
    return sol


def solve_indivisible_lp(
    instance: CoflowInstance,
    eps_sep: float = DEFAULT_EPS_SEP,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
    eps_feas: float = lpe.DEFAULT_EPS_FEAS,
) -> IndivisibleLpSolution:
    coflows = sorted(instance.coflows, key=lambda c: c.id)
    loads = compute_port_loads(instance)
    n = len(coflows)
    objective = np.array([float(c.weight) for c in coflows])
    lower = np.zeros(n)
    ports: dict[Port, list[tuple[int, int]]] = defaultdict(list)
    for v, c in enumerate(coflows):
        lower[v] = c.release + max(
            max(loads.input_load[(c.id, f.input)] for f in c.flows),
            max(loads.output_load[(c.id, f.output)] for f in c.flows),
        )
    for (k, i), load in sorted(loads.input_load.items()):
        ports[("in", i)].append((_index(coflows, k), load))
    for (k, j), load in sorted(loads.output_load.items()):
        ports[("out", j)].append((_index(coflows, k), load))

    program = lpe.LinearProgram(n, objective, (), lower)
    x, obj, rounds, ok, hist, ncuts = _cutting_planes(
        program, ports, instance.network.cores, eps_sep, max_rounds, eps_feas
    )
    sol = IndivisibleLpSolution(
        coflow_completion={c.id: float(x[v]) for v, c in enumerate(coflows)},
        objective=obj,
        rounds=rounds,
        converged=ok,
        objective_history=hist,
        num_cuts=ncuts,
    )
    if not ok:
        raise RoundLimitError(sol)
    return sol


def _index(coflows, k) -> int:
    for v, c in enumerate(coflows):
        if c.id == k:
            return v
    raise KeyError(k)


def port_items_divisible(instance: CoflowInstance, sol: DivisibleLpSolution) -> dict[Port, list[PortItem]]:
    """Per-port item lists (flow key, size, C) at an LP solution."""
    out: dict[Port, list[PortItem]] = defaultdict(list)
    for f in instance.flows:
        c = sol.flow_completion[f.key]
        out[("in", f.input)].append((f.key, f.size, c))
        out[("out", f.output)].append((f.key, f.size, c))
    return dict(out)


def port_items_indivisible(instance: CoflowInstance, sol: IndivisibleLpSolution) -> dict[Port, list[PortItem]]:
    loads = compute_port_loads(instance)
    out: dict[Port, list[PortItem]] = defaultdict(list)
    for (k, i), load in sorted(loads.input_load.items()):
        out[("in", i)].append((k, load, sol.coflow_completion[k]))
    for (k, j), load in sorted(loads.output_load.items()):
        out[("out", j)].append((k, load, sol.coflow_completion[k]))
    return dict(out)


def prefix_bound_gaps(items: Sequence[PortItem], m: int) -> list[float]:
    """For each prefix S in C order, ``C_last(S) - d(S) / (2m)``.

    Every entry is non-negative (up to solver tolerance) at any point that
    satisfies the port's subset family.
    """
    ordered = sorted(items, key=lambda it: (it[2], it[0]))
    gaps = []
    total = 0.0
    for _, d, c in ordered:
        total += d
        gaps.append(c - total / (2 * m))
    return gaps
