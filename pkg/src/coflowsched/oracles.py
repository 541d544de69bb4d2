"""Independent reference computations used to check the fast paths."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Sequence

import numpy as np

from .model import CoflowInstance, FlowKey
from .relaxations import DivisibleLpSolution, IndivisibleLpSolution, PortItem
from .simulator import ScheduleTrace, TransmissionInterval, trace_from_intervals

BRUTE_FORCE_CAP = 20
RATIO_SLACK = 1e-9


class OracleCapError(ValueError):
    pass


# --- separation -----------------------------------------------------------


def brute_force_separation(
    port_items: Sequence[PortItem], m: int, cap: int = BRUTE_FORCE_CAP
) -> tuple[float, tuple[Hashable, ...]]:
    """Max of ``(d(S)^2 + d2(S))/(2m) - sum_S d C`` over all non-empty subsets.

    Returns the violation and one subset attaining it (items in input order).
    Like the prefix scan, a port with no violated subset reports ``(0.0, ())``.
    """
    n = len(port_items)
    if n > cap:
        raise OracleCapError(f"{n} items exceeds the brute-force cap of {cap}")
    if n == 0:
        return 0.0, ()
    d = np.array([it[1] for it in port_items], dtype=float)
    dc = d * np.array([it[2] for it in port_items], dtype=float)
    bits = 1 << np.arange(n)
    best, best_mask = -np.inf, 0
    chunk = 1 << 16
    for lo in range(1, 1 << n, chunk):
        masks = np.arange(lo, min(lo + chunk, 1 << n))
        member = (masks[:, None] & bits[None, :]) != 0
        ds = member @ d
        viol = (ds * ds + member @ (d * d)) / (2 * m) - member @ dc
        k = int(np.argmax(viol))
        if viol[k] > best:
            best, best_mask = float(viol[k]), int(masks[k])
    if best <= 0:
        return 0.0, ()
    return best, tuple(it[0] for t, it in enumerate(port_items) if best_mask >> t & 1)


def subset_violation(port_items: Sequence[PortItem], members, m: int) -> float:
    chosen = [it for it in port_items if it[0] in set(members)]
    d = sum(it[1] for it in chosen)
    d2 = sum(it[1] ** 2 for it in chosen)
    return (d * d + d2) / (2 * m) - sum(it[1] * it[2] for it in chosen)


# --- exact optimum for tiny instances ----------------------------------------


@dataclass(frozen=True)
class TinyCaps:
    total_size: int = 12
    flows: int = 6
    cores: int = 2
    ports: int = 3
    release: int = 4
    states: int = 10**7


@dataclass
class ExactResult:
    objective: Fraction
    trace: ScheduleTrace
    states: int


def exact_opt_tiny(
    instance: CoflowInstance, indivisible: bool = False, caps: TinyCaps = TinyCaps()
) -> ExactResult:
    """Minimum total weighted completion time by exhaustive search.

    Time advances in unit steps.  In each step every released, incomplete flow
    either idles or transmits one unit on a core; all feasible combinations
    are explored.  A flow (divisible) or a whole coflow (indivisible) is bound
    to the core it first transmits on.  Cores are interchangeable, so core
    labels are canonicalized by order of first use.
    """
    flows = instance.flows
    m = instance.network.cores
    problems = []
    if sum(f.size for f in flows) > caps.total_size:
        problems.append(f"total size {sum(f.size for f in flows)} > {caps.total_size}")
    if len(flows) > caps.flows:
        problems.append(f"{len(flows)} flows > {caps.flows}")
    if m > caps.cores:
        problems.append(f"{m} cores > {caps.cores}")
    if instance.network.ports > caps.ports:
        problems.append(f"{instance.network.ports} ports > {caps.ports}")
    if any(c.release > caps.release for c in instance.coflows):
        problems.append(f"release above {caps.release}")
    if problems:
        raise OracleCapError("; ".join(problems))

    release = {c.id: c.release for c in instance.coflows}
    weight = {c.id: c.weight for c in instance.coflows}
    n = len(flows)
    coflow_ids = sorted(weight)
    cidx = {k: t for t, k in enumerate(coflow_ids)}
    owner = [cidx[f.coflow_id] for f in flows]
    # binding unit: the flow itself, or its coflow
    unit = owner if indivisible else list(range(n))
    nunits = len(coflow_ids) if indivisible else n
    fin = [f.input for f in flows]
    fout = [f.output for f in flows]
    rel = [release[f.coflow_id] for f in flows]
    members = [[p for p in range(n) if owner[p] == t] for t in range(len(coflow_ids))]
    last_release = max(rel) if rel else 0

    memo: dict = {}
    choice: dict = {}

    def incomplete_weight(rem) -> Fraction:
        return sum(
            (weight[coflow_ids[t]] for t, ps in enumerate(members) if any(rem[p] for p in ps)),
            Fraction(0),
        )

    def canon(bind):
        relabel: dict[int, int] = {}
        out = []
        for b in bind:
            if b:
                relabel.setdefault(b, len(relabel) + 1)
                out.append(relabel[b])
            else:
                out.append(0)
        return tuple(out), relabel

    def step(rem, bind, act):
        new_rem = tuple(r - (1 if act[p] else 0) for p, r in enumerate(rem))
        new_bind = list(bind)
        for p in range(n):
            if act[p]:
                new_bind[unit[p]] = act[p]
        # a finished unit no longer constrains anything
        for u in range(nunits):
            ps = members[u] if indivisible else [u]
            if not any(new_rem[p] for p in ps):
                new_bind[u] = 0
        cb, relabel = canon(new_bind)
        return new_rem, cb, relabel

    def actions(t, rem, bind):
        """Yield tuples giving each flow's core this step (0 = idle)."""
        ready = [p for p in range(n) if rem[p] and rel[p] <= t]
        cur = [0] * n
        used = set()  # (core, 'i'/'o', port)
        bound = list(bind)

        def rec(q):
            if q == len(ready):
                yield tuple(cur)
                return
            p = ready[q]
            yield from rec(q + 1)
            u = unit[p]
            if bound[u]:
                options = [bound[u]]
            else:
                # an unbound unit may open at most one fresh core label
                options = list(range(1, min(m, max(bound, default=0) + 1) + 1))
            for h in options:
                if (h, "i", fin[p]) in used or (h, "o", fout[p]) in used:
                    continue
                was = bound[u]
                bound[u] = h
                used.add((h, "i", fin[p]))
                used.add((h, "o", fout[p]))
                cur[p] = h
                yield from rec(q + 1)
                cur[p] = 0
                used.discard((h, "i", fin[p]))
                used.discard((h, "o", fout[p]))
                bound[u] = was

        yield from rec(0)

    def solve(t, rem, bind) -> Fraction:
        """Optimal weighted completion of the remaining coflows from time t."""
        if not any(rem):
            return Fraction(0)
        tk = min(t, last_release)
        key = (tk, rem, bind)
        if key in memo:
            return memo[key] + (t - tk) * incomplete_weight(rem)
        if len(memo) >= caps.states:
            raise OracleCapError(f"state space exceeds {caps.states}")
        if not any(rem[p] and rel[p] <= tk for p in range(n)):
            nxt = min(rel[p] for p in range(n) if rem[p])
            best = solve(nxt, rem, bind)
            memo[key] = best
            choice[key] = None
            return best + (t - tk) * incomplete_weight(rem)
        best, best_act = None, None
        for act in actions(tk, rem, bind):
            if tk == last_release and not any(act):
                # same state one step later at extra cost; never better
                continue
            new_rem, cb, _ = step(rem, bind, act)
            gained = Fraction(0)
            for tt, ps in enumerate(members):
                if any(rem[p] for p in ps) and not any(new_rem[p] for p in ps):
                    gained += weight[coflow_ids[tt]] * (tk + 1)
            val = gained + solve(tk + 1, new_rem, cb)
            if best is None or val < best:
                best, best_act = val, act
        memo[key] = best
        choice[key] = best_act
        return best + (t - tk) * incomplete_weight(rem)

    start_rem = tuple(f.size for f in flows)
    start_bind = tuple([0] * nunits)
    t0 = min(rel) if rel else 0
    objective = solve(t0, start_rem, start_bind)

    # replay the optimal choices, tracking real core labels
    segments: list[tuple[int, int, int]] = []  # (core, t, flow position)
    t, rem, bind = t0, start_rem, start_bind
    real = {}  # canonical label -> real core label
    while any(rem):
        tk = min(t, last_release)
        act = choice[(tk, rem, bind)]
        if act is None:
            t = min(rel[p] for p in range(n) if rem[p])
            continue
        for p in range(n):
            if act[p]:
                h = act[p]
                if h not in real:
                    # unbound real cores are interchangeable; take the lowest free one
                    real[h] = min(set(range(1, m + 1)) - set(real.values()))
                segments.append((real[h], t, p))
        rem, bind, relabel = step(rem, bind, act)
        real = {relabel[h]: r for h, r in real.items() if h in relabel}
        t += 1

    intervals = _merge_unit_segments(segments, [f.key for f in flows])
    trace = trace_from_intervals(intervals, instance)
    return ExactResult(objective, trace, len(memo))


def _merge_unit_segments(segments, keys) -> list[TransmissionInterval]:
    out: list[TransmissionInterval] = []
    open_: dict[int, list[int]] = {}
    for core, t, p in sorted(segments, key=lambda s: (s[2], s[1])):
        cur = open_.get(p)
        if cur is not None and cur[0] == core and cur[2] == t:
            cur[2] = t + 1
        else:
            if cur is not None:
                out.append(TransmissionInterval(cur[0], cur[1], cur[2], keys[p]))
            open_[p] = [core, t, t + 1]
    for p, (core, s, e) in open_.items():
        out.append(TransmissionInterval(core, s, e, keys[p]))
    return sorted(out)


# --- approximation bound audit -------------------------------------------------


def ratio_bound(m: int, indivisible: bool, with_release: bool) -> float:
    if indivisible:
        return 4 * m + 1 if with_release else 4 * m
    return 6 - 2 / m if with_release else 5 - 2 / m


@dataclass
class RatioReport:
    mode: str
    with_release: bool
    per_item_ratio: dict = field(default_factory=dict)
    max_ratio: float = 0.0
    bound: float = 0.0
    satisfied: bool = True


def audit_bounds(
    instance: CoflowInstance,
    lp: DivisibleLpSolution | IndivisibleLpSolution,
    trace: ScheduleTrace,
    mode: str,
) -> RatioReport:
    """Per-flow (divisible) or per-coflow (indivisible) ratio of schedule to LP."""
    if mode == "divisible":
        if not isinstance(lp, DivisibleLpSolution):
            raise TypeError("divisible audit needs a DivisibleLpSolution")
        pairs: dict = {k: (trace.flow_completion[k], lp.flow_completion[k]) for k in lp.flow_completion}
    elif mode == "indivisible":
        if not isinstance(lp, IndivisibleLpSolution):
            raise TypeError("indivisible audit needs an IndivisibleLpSolution")
        pairs = {k: (trace.coflow_completion[k], lp.coflow_completion[k]) for k in lp.coflow_completion}
    else:
        raise ValueError(f"unknown mode {mode!r}")
    with_release = not instance.zero_release
    bound = ratio_bound(instance.network.cores, mode == "indivisible", with_release)
    ratios = {k: float(sched) / lpv for k, (sched, lpv) in sorted(pairs.items())}
    worst = max(ratios.values(), default=0.0)
    return RatioReport(mode, with_release, ratios, worst, bound, worst <= bound + RATIO_SLACK)


def bound_gaps(
    lp: DivisibleLpSolution | IndivisibleLpSolution, trace: ScheduleTrace, bound: float
) -> dict[FlowKey | int, float]:
    """``schedule - bound * lp`` per item; non-positive when the bound holds."""
    if isinstance(lp, DivisibleLpSolution):
        return {k: trace.flow_completion[k] - bound * v for k, v in lp.flow_completion.items()}
    return {k: trace.coflow_completion[k] - bound * v for k, v in lp.coflow_completion.items()}
