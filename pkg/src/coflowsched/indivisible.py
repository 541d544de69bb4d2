"""Coflow-driven list scheduling for indivisible coflows, plus ordering baselines.

Coflows are placed whole, in non-decreasing order of their LP completion
times, on the core minimizing ``max_{i,j} (load_I(i,h) + L_ik + load_O(j,h) + L_jk)``.
Since the expression separates in i and j, the max is the sum of the two
per-side maxima over all N ports (ports the coflow does not touch included).
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .divisible import ORDER_DIGITS
from .model import CoflowInstance, compute_port_loads
from .relaxations import IndivisibleLpSolution
from .simulator import ScheduleTrace, merge_traces, sim_flows, simulate_core

BASELINE_POLICIES = ("random", "weighted-total-size", "release-order")


@dataclass
class CoflowAssignment:
    core_of_coflow: dict[int, int]
    priority: dict[int, int]
    input_load: dict[tuple[int, int], int]  # (port, core) -> load
    output_load: dict[tuple[int, int], int]

    def coflows_on(self, core: int) -> list[int]:
        ks = [k for k, h in self.core_of_coflow.items() if h == core]
        return sorted(ks, key=self.priority.__getitem__)


def coflow_order(instance: CoflowInstance, lp: IndivisibleLpSolution) -> list[int]:
    missing = [c.id for c in instance.coflows if c.id not in lp.coflow_completion]
    if missing:
        raise KeyError(f"LP solution has no value for coflows {missing}")
    return sorted(
        (c.id for c in instance.coflows),
        key=lambda k: (round(lp.coflow_completion[k], ORDER_DIGITS), k),
    )


def placement_cost(instance, loads, load_in, load_out, k: int, h: int) -> int:
    """Line-6 objective of placing coflow ``k`` on core ``h``."""
    ports = range(1, instance.network.ports + 1)
    worst_in = max(load_in.get((i, h), 0) + loads.input(k, i) for i in ports)
    worst_out = max(load_out.get((j, h), 0) + loads.output(k, j) for j in ports)
    return worst_in + worst_out


def assign_coflows(instance: CoflowInstance, lp: IndivisibleLpSolution) -> CoflowAssignment:
    return assign_coflows_in_order(instance, coflow_order(instance, lp))


def assign_coflows_in_order(instance: CoflowInstance, order: list[int]) -> CoflowAssignment:
    m = instance.network.cores
    loads = compute_port_loads(instance)
    load_in: dict[tuple[int, int], int] = {}
    load_out: dict[tuple[int, int], int] = {}
    core_of: dict[int, int] = {}
    for k in order:
        best = min(
            range(1, m + 1),
            key=lambda h: (placement_cost(instance, loads, load_in, load_out, k, h), h),
        )
        core_of[k] = best
        for (kk, i), load in loads.input_load.items():
            if kk == k:
                load_in[(i, best)] = load_in.get((i, best), 0) + load
        for (kk, j), load in loads.output_load.items():
            if kk == k:
                load_out[(j, best)] = load_out.get((j, best), 0) + load
    priority = {k: r for r, k in enumerate(order, start=1)}
    return CoflowAssignment(core_of, priority, load_in, load_out)


def run_assignment(instance: CoflowInstance, assignment: CoflowAssignment) -> ScheduleTrace:
    partials = []
    for h in range(1, instance.network.cores + 1):
        keys = [
            f.key
            for k in assignment.coflows_on(h)
            for f in sorted(instance.coflow(k).flows, key=lambda f: (f.input, f.output))
        ]
        partials.append(simulate_core(h, sim_flows(instance, keys)))
    return merge_traces(partials, instance)


def schedule_indivisible(instance: CoflowInstance, lp: IndivisibleLpSolution) -> ScheduleTrace:
    return run_assignment(instance, assign_coflows(instance, lp))


def baseline_order(instance: CoflowInstance, policy: str, seed: int = 0) -> list[int]:
    ids = sorted(c.id for c in instance.coflows)
    if policy == "random":
        random.Random(seed).shuffle(ids)
        return ids
    if policy == "weighted-total-size":
        # Smith's rule on total coflow size: largest weight per unit first
        return sorted(ids, key=lambda k: (-instance.coflow(k).weight / instance.coflow(k).total_size, k))
    if policy == "release-order":
        return sorted(ids, key=lambda k: (instance.coflow(k).release, k))
    raise ValueError(f"unknown ordering policy {policy!r}; expected one of {BASELINE_POLICIES}")


def schedule_baseline(instance: CoflowInstance, policy: str, seed: int = 0) -> ScheduleTrace:
    order = baseline_order(instance, policy, seed)
    return run_assignment(instance, assign_coflows_in_order(instance, order))
