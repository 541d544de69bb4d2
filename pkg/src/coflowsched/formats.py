"""Instance, solution, trace, report and curve files; random instance generation.

Instances and solutions are JSON with an explicit ``schema_version``.  Traces
and curves are CSV with a header row.  Floats are written with ``repr`` so
files are byte-stable across runs.
"""

from __future__ import annotations

import csv
import io
import json
import random
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable

from .model import (
    Coflow,
    CoflowInstance,
    Flow,
    InvalidInstanceError,
    NetworkConfig,
)
from .relaxations import DivisibleLpSolution, IndivisibleLpSolution
from .simulator import ScheduleTrace, TransmissionInterval, trace_from_intervals

SCHEMA_VERSION = 1
TRACE_HEADER = ["core", "coflow_id", "input", "output", "start", "end"]
CURVE_HEADER = [
    "m",
    "divisible_release",
    "divisible_no_release",
    "indivisible_release",
    "indivisible_no_release",
    "composed_release",
    "composed_no_release",
]


class FormatError(ValueError):
    pass


# --- instances ----------------------------------------------------------------


def _weight_out(w: Fraction):
    return w.numerator if w.denominator == 1 else f"{w.numerator}/{w.denominator}"


def _weight_in(raw) -> Fraction:
    if isinstance(raw, bool) or not isinstance(raw, (int, float, str)):
        raise FormatError(f"bad weight {raw!r}")
    try:
        return Fraction(raw)
    except (ValueError, ZeroDivisionError) as exc:
        raise FormatError(f"bad weight {raw!r}") from exc


def instance_to_dict(instance: CoflowInstance) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "network": {"cores": instance.network.cores, "ports": instance.network.ports},
        "coflows": [
            {
                "id": c.id,
                "weight": _weight_out(c.weight),
                "release": c.release,
                "flows": [
                    {"input": f.input, "output": f.output, "size": f.size} for f in c.flows
                ],
            }
            for c in instance.coflows
        ],
    }


def instance_from_dict(data) -> CoflowInstance:
    try:
        if data.get("schema_version") != SCHEMA_VERSION:
            raise FormatError(f"unsupported schema_version {data.get('schema_version')!r}")
        net = NetworkConfig(data["network"]["cores"], data["network"]["ports"])
        coflows = []
        for c in data["coflows"]:
            cid = c["id"]
            flows = tuple(Flow(cid, f["input"], f["output"], f["size"]) for f in c["flows"])
            coflows.append(
                Coflow(cid, flows, _weight_in(c.get("weight", 1)), c.get("release", 0))
            )
    except (KeyError, TypeError, AttributeError) as exc:
        raise FormatError(f"malformed instance: {exc!r}") from exc
    try:
        return CoflowInstance(net, tuple(coflows))
    except InvalidInstanceError as exc:
        raise FormatError(f"invalid instance: {exc}") from exc
    except TypeError as exc:
        raise FormatError(f"malformed instance: {exc!r}") from exc


def dumps_instance(instance: CoflowInstance) -> str:
    return json.dumps(instance_to_dict(instance), indent=2) + "\n"


def loads_instance(text: str) -> CoflowInstance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise FormatError("instance file must hold a JSON object")
    return instance_from_dict(data)


def write_instance(instance: CoflowInstance, path) -> None:
    Path(path).write_text(dumps_instance(instance))


def read_instance(path) -> CoflowInstance:
    return loads_instance(Path(path).read_text())


# --- LP solutions ---------------------------------------------------------------


def solution_to_dict(sol: DivisibleLpSolution | IndivisibleLpSolution) -> dict:
    out = {
        "schema_version": SCHEMA_VERSION,
        "mode": "divisible" if isinstance(sol, DivisibleLpSolution) else "indivisible",
        "objective": sol.objective,
        "rounds": sol.rounds,
        "converged": sol.converged,
        "num_cuts": sol.num_cuts,
        "objective_history": list(sol.objective_history),
        "coflows": [{"id": k, "completion": v} for k, v in sorted(sol.coflow_completion.items())],
    }
    if isinstance(sol, DivisibleLpSolution):
        out["flows"] = [
            {"coflow": k[0], "input": k[1], "output": k[2], "completion": v}
            for k, v in sorted(sol.flow_completion.items())
        ]
    return out


def solution_from_dict(data: dict) -> DivisibleLpSolution | IndivisibleLpSolution:
    coflows = {c["id"]: float(c["completion"]) for c in data["coflows"]}
    common = dict(
        objective=float(data["objective"]),
        rounds=int(data["rounds"]),
        converged=bool(data["converged"]),
        objective_history=[float(x) for x in data.get("objective_history", [])],
        num_cuts=int(data.get("num_cuts", 0)),
    )
    if data["mode"] == "divisible":
        flows = {
            (f["coflow"], f["input"], f["output"]): float(f["completion"]) for f in data["flows"]
        }
        return DivisibleLpSolution(flows, coflows, **common)
    if data["mode"] == "indivisible":
        return IndivisibleLpSolution(coflows, **common)
    raise FormatError(f"unknown solution mode {data['mode']!r}")


def dumps_json(data) -> str:
    return json.dumps(data, indent=2, sort_keys=False) + "\n"


# --- traces -----------------------------------------------------------------------


def dumps_trace(trace: ScheduleTrace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_HEADER)
    for iv in trace.intervals:
        k, i, j = iv.flow
        w.writerow([iv.core, k, i, j, iv.start, iv.end])
    return buf.getvalue()


def loads_trace(text: str, instance: CoflowInstance) -> ScheduleTrace:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != TRACE_HEADER:
        raise FormatError(f"trace header must be {','.join(TRACE_HEADER)}")
    intervals = []
    for n, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        try:
            core, k, i, j, s, e = (int(x) for x in row)
        except ValueError as exc:
            raise FormatError(f"trace line {n}: {exc}") from exc
        intervals.append(TransmissionInterval(core, s, e, (k, i, j)))
    return trace_from_intervals(intervals, instance)


# --- ratio curves -------------------------------------------------------------------


def ratio_row(m: int) -> tuple:
    """Closed-form approximation ratios at ``m`` cores, in CURVE_HEADER order."""
    return (m, 6 - 2 / m, 5 - 2 / m, 4 * m + 1, 4 * m, 5 * m, 4 * m)


def emit_ratio_curves(m_range: Iterable[int]) -> list[tuple]:
    ms = list(m_range)
    if not ms:
        raise ValueError("m_range must not be empty")
    for m in ms:
        if isinstance(m, bool) or not isinstance(m, int) or m < 1:
            raise ValueError(f"core counts must be positive integers, got {m!r}")
    return [ratio_row(m) for m in ms]


def dumps_curves(rows: list[tuple]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CURVE_HEADER)
    for row in rows:
        w.writerow([repr(x) for x in row])
    return buf.getvalue()


# --- generator --------------------------------------------------------------------------


@dataclass(frozen=True)
class GeneratorParams:
    seed: int = 0
    ports: int = 4
    cores: int = 2
    num_coflows: int = 5
    flow_density: float = 0.5
    max_size: int = 5
    max_release: int = 10
    max_weight: int = 1

    def __post_init__(self):
        for name in ("ports", "cores", "num_coflows", "max_size", "max_weight"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.max_release < 0:
            raise ValueError("max_release must be non-negative")
        if not 0 < self.flow_density <= 1:
            raise ValueError("flow_density must be in (0, 1]")


def generate(params: GeneratorParams) -> CoflowInstance:
    rng = random.Random(params.seed)
    n = params.ports
    coflows = []
    for k in range(1, params.num_coflows + 1):
        links: list[tuple[int, int]] = []
        while not links:
            links = [
                (i, j)
                for i in range(1, n + 1)
                for j in range(1, n + 1)
                if rng.random() < params.flow_density
            ]
        flows = tuple(Flow(k, i, j, rng.randint(1, params.max_size)) for i, j in links)
        release = rng.randint(0, params.max_release)
        weight = Fraction(rng.randint(1, params.max_weight))
        coflows.append(Coflow(k, flows, weight, release))
    return CoflowInstance(NetworkConfig(params.cores, n), tuple(coflows))
