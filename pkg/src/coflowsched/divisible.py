"""Flow-driven list scheduling for divisible coflows.

Flows are taken in non-decreasing order of their LP completion times and each
one goes to the core whose input-plus-output load on the flow's link is
smallest.  Every core then runs its flows in that same order.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import CoflowInstance, FlowKey
from .relaxations import DivisibleLpSolution
from .simulator import ScheduleTrace, merge_traces, sim_flows, simulate_core

# LP values closer than this are treated as ties
ORDER_DIGITS = 9


@dataclass
class FlowAssignment:
    core_of_flow: dict[FlowKey, int]
    priority: dict[FlowKey, int]
    input_load: dict[tuple[int, int], int]  # (port, core) -> load
    output_load: dict[tuple[int, int], int]

    def flows_on(self, core: int) -> list[FlowKey]:
        keys = [k for k, h in self.core_of_flow.items() if h == core]
        return sorted(keys, key=self.priority.__getitem__)


def flow_order(instance: CoflowInstance, lp: DivisibleLpSolution) -> list[FlowKey]:
    missing = [f.key for f in instance.flows if f.key not in lp.flow_completion]
    if missing:
        raise KeyError(f"LP solution has no value for flows {missing}")
    return sorted(
        (f.key for f in instance.flows),
        key=lambda k: (round(lp.flow_completion[k], ORDER_DIGITS), k),
    )


def assign_flows(instance: CoflowInstance, lp: DivisibleLpSolution) -> FlowAssignment:
    return assign_flows_in_order(instance, flow_order(instance, lp))


def assign_flows_in_order(instance: CoflowInstance, order: list[FlowKey]) -> FlowAssignment:
    m = instance.network.cores
    size = {f.key: f.size for f in instance.flows}
    load_in: dict[tuple[int, int], int] = {}
    load_out: dict[tuple[int, int], int] = {}
    core_of: dict[FlowKey, int] = {}
    for key in order:
        _, i, j = key
        best = min(
            range(1, m + 1),
            key=lambda h: (load_in.get((i, h), 0) + load_out.get((j, h), 0), h),
        )
        core_of[key] = best
        load_in[(i, best)] = load_in.get((i, best), 0) + size[key]
        load_out[(j, best)] = load_out.get((j, best), 0) + size[key]
    priority = {k: r for r, k in enumerate(order, start=1)}
    return FlowAssignment(core_of, priority, load_in, load_out)


def run_assignment(instance: CoflowInstance, assignment: FlowAssignment) -> ScheduleTrace:
    partials = [
        simulate_core(h, sim_flows(instance, assignment.flows_on(h)))
        for h in range(1, instance.network.cores + 1)
    ]
    return merge_traces(partials, instance)


def schedule_divisible(instance: CoflowInstance, lp: DivisibleLpSolution) -> ScheduleTrace:
    return run_assignment(instance, assign_flows(instance, lp))
