"""Event-driven execution of priority lists on N x N non-blocking switches.

At every event (a completion or a release) the released, incomplete flows of a
core are scanned in priority order and each one is scheduled iff both of its
ports are still unclaimed.  Scheduled flows transmit at rate 1 until the next
event.  A lower-priority flow can therefore be preempted by a newly released
higher-priority one; its remaining size carries over.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .model import CoflowInstance, FlowKey


class TraceError(ValueError):
    pass


@dataclass(frozen=True)
class SimFlow:
    key: FlowKey
    input: int
    output: int
    size: int
    release: int


@dataclass(frozen=True, order=True)
class TransmissionInterval:
    core: int
    start: int
    end: int
    flow: FlowKey

    @property
    def amount(self) -> int:
        return self.end - self.start


@dataclass
class ScheduleTrace:
    intervals: list[TransmissionInterval] = field(default_factory=list)
    flow_completion: dict[FlowKey, int] = field(default_factory=dict)
    coflow_completion: dict[int, int] = field(default_factory=dict)
    objective: Fraction = Fraction(0)

    def core_of(self, key: FlowKey) -> set[int]:
        return {iv.core for iv in self.intervals if iv.flow == key}


@dataclass
class PartialTrace:
    core: int
    intervals: list[TransmissionInterval]
    flow_completion: dict[FlowKey, int]


@dataclass
class FeasibilityReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def sim_flows(instance: CoflowInstance, keys: Iterable[FlowKey]) -> list[SimFlow]:
    """SimFlows for ``keys`` in the given order."""
    release = {c.id: c.release for c in instance.coflows}
    by_key = {f.key: f for f in instance.flows}
    return [
        SimFlow(k, by_key[k].input, by_key[k].output, by_key[k].size, release[k[0]])
        for k in keys
    ]


def simulate_core(core: int, flows: Sequence[SimFlow]) -> PartialTrace:
    """Run one core's priority list (highest priority first) to completion."""
    remaining = [f.size for f in flows]
    open_iv: dict[int, list[int]] = {}  # flow position -> [start, end]
    done: list[tuple[int, int, int]] = []  # (position, start, end)
    completion: dict[FlowKey, int] = {}
    if not flows:
        return PartialTrace(core, [], {})

    t = min(f.release for f in flows)
    left = len(flows)
    while left:
        busy_in: set[int] = set()
        busy_out: set[int] = set()
        active = []
        next_release = None
        for p, f in enumerate(flows):
            if remaining[p] == 0:
                continue
            if f.release > t:
                if next_release is None or f.release < next_release:
                    next_release = f.release
                continue
            if f.input in busy_in or f.output in busy_out:
                continue
            busy_in.add(f.input)
            busy_out.add(f.output)
            active.append(p)

        # close intervals of flows that were preempted at t
        for p in list(open_iv):
            if p not in active:
                s, e = open_iv.pop(p)
                done.append((p, s, e))

        if not active:
            t = next_release
            continue
        dt = min(remaining[p] for p in active)
        if next_release is not None:
            dt = min(dt, next_release - t)
        for p in active:
            if p in open_iv:
                open_iv[p][1] = t + dt
            else:
                open_iv[p] = [t, t + dt]
            remaining[p] -= dt
            if remaining[p] == 0:
                s, e = open_iv.pop(p)
                done.append((p, s, e))
                completion[flows[p].key] = t + dt
                left -= 1
        t += dt

    intervals = sorted(TransmissionInterval(core, s, e, flows[p].key) for p, s, e in done)
    return PartialTrace(core, intervals, completion)


def merge_traces(partials: Iterable[PartialTrace], instance: CoflowInstance) -> ScheduleTrace:
    intervals: list[TransmissionInterval] = []
    flow_completion: dict[FlowKey, int] = {}
    owner: dict[FlowKey, int] = {}
    for part in partials:
        for key, c in part.flow_completion.items():
            if key in owner and owner[key] != part.core:
                raise TraceError(f"flow {key} appears on cores {owner[key]} and {part.core}")
            owner[key] = part.core
            flow_completion[key] = c
        intervals.extend(part.intervals)
    intervals.sort()

    coflow_completion: dict[int, int] = {}
    for key, c in flow_completion.items():
        k = key[0]
        coflow_completion[k] = max(coflow_completion.get(k, 0), c)
    weight = {c.id: c.weight for c in instance.coflows}
    objective = sum((weight[k] * c for k, c in coflow_completion.items()), Fraction(0))
    return ScheduleTrace(
        intervals,
        dict(sorted(flow_completion.items())),
        dict(sorted(coflow_completion.items())),
        objective,
    )


def trace_from_intervals(intervals: Iterable[TransmissionInterval], instance: CoflowInstance) -> ScheduleTrace:
    """Rebuild completions and objective from raw intervals (e.g. a trace file)."""
    intervals = sorted(intervals)
    flow_completion: dict[FlowKey, int] = {}
    for iv in intervals:
        flow_completion[iv.flow] = max(flow_completion.get(iv.flow, 0), iv.end)
    coflow_completion: dict[int, int] = {}
    for key, c in flow_completion.items():
        coflow_completion[key[0]] = max(coflow_completion.get(key[0], 0), c)
    weight = {c.id: c.weight for c in instance.coflows}
    objective = sum(
        (weight[k] * c for k, c in coflow_completion.items() if k in weight), Fraction(0)
    )
    return ScheduleTrace(
        intervals,
        dict(sorted(flow_completion.items())),
        dict(sorted(coflow_completion.items())),
        objective,
    )


def verify_trace(
    trace: ScheduleTrace, instance: CoflowInstance, indivisible: bool = False
) -> FeasibilityReport:
    """Check a trace against the switch model of ``instance``."""
    rep = FeasibilityReport()
    v = rep.violations
    flows = {f.key: f for f in instance.flows}
    release = {c.id: c.release for c in instance.coflows}
    m = instance.network.cores

    per_flow: dict[FlowKey, list[TransmissionInterval]] = defaultdict(list)
    by_in: dict[tuple[int, int], list[TransmissionInterval]] = defaultdict(list)
    by_out: dict[tuple[int, int], list[TransmissionInterval]] = defaultdict(list)
    for iv in trace.intervals:
        f = flows.get(iv.flow)
        if f is None:
            v.append(f"unknown flow {iv.flow}")
            continue
        if not 1 <= iv.core <= m:
            v.append(f"flow {iv.flow}: core {iv.core} out of range")
        if iv.start >= iv.end:
            v.append(f"flow {iv.flow}: empty or inverted interval [{iv.start}, {iv.end})")
        if iv.start < release[iv.flow[0]]:
            v.append(f"flow {iv.flow}: release violation (starts {iv.start} < {release[iv.flow[0]]})")
        per_flow[iv.flow].append(iv)
        by_in[(iv.core, f.input)].append(iv)
        by_out[(iv.core, f.output)].append(iv)

    for label, groups in (("input", by_in), ("output", by_out)):
        for (core, port), ivs in sorted(groups.items()):
            ivs = sorted(ivs, key=lambda x: (x.start, x.end))
            for a, b in zip(ivs, ivs[1:]):
                if b.start < a.end:
                    v.append(
                        f"{label} port conflict on core {core} port {port}: "
                        f"{a.flow} [{a.start},{a.end}) overlaps {b.flow} [{b.start},{b.end})"
                    )

    for key, f in sorted(flows.items()):
        ivs = per_flow.get(key, [])
        sent = sum(iv.amount for iv in ivs)
        if sent != f.size:
            v.append(f"size conservation: flow {key} sent {sent} of {f.size}")
        cores = {iv.core for iv in ivs}
        if len(cores) > 1:
            v.append(f"flow {key} split across cores {sorted(cores)}")
        if ivs:
            end = max(iv.end for iv in ivs)
            if trace.flow_completion.get(key) != end:
                v.append(f"completion mismatch: flow {key} ends at {end}, trace says {trace.flow_completion.get(key)}")

    for c in instance.coflows:
        ends = [trace.flow_completion.get(f.key) for f in c.flows]
        if all(e is not None for e in ends) and trace.coflow_completion.get(c.id) != max(ends):
            v.append(f"completion mismatch: coflow {c.id}")
        if indivisible:
            cores = {iv.core for f in c.flows for iv in per_flow.get(f.key, [])}
            if len(cores) > 1:
                v.append(f"coflow {c.id} split across cores {sorted(cores)}")

    expected = sum(
        (c.weight * trace.coflow_completion.get(c.id, 0) for c in instance.coflows), Fraction(0)
    )
    if expected != trace.objective:
        v.append(f"objective mismatch: {trace.objective} != {expected}")
    return rep
