"""Instances of the coflow scheduling problem on identical parallel switches.

A network is ``cores`` identical ``ports x ports`` non-blocking switches.  Every
coflow is a sparse demand matrix stored as a tuple of flows; zero entries are
never materialized.  Ports are 1-based everywhere.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import InitVar, dataclass, field
from fractions import Fraction
from typing import Iterable

# (coflow id, input port, output port) identifies a flow uniquely.
FlowKey = tuple[int, int, int]


class InvalidInstanceError(ValueError):
    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


@dataclass(frozen=True)
class NetworkConfig:
    cores: int
    ports: int


@dataclass(frozen=True)
class Flow:
    coflow_id: int
    input: int
    output: int
    size: int

    @property
    def key(self) -> FlowKey:
        return (self.coflow_id, self.input, self.output)


@dataclass(frozen=True)
class Coflow:
    id: int
    flows: tuple[Flow, ...]
    weight: Fraction = Fraction(1)
    release: int = 0

    @property
    def total_size(self) -> int:
        return sum(f.size for f in self.flows)


@dataclass(frozen=True)
class CoflowInstance:
    network: NetworkConfig
    coflows: tuple[Coflow, ...]
    check: InitVar[bool] = True

    def __post_init__(self, check: bool):
        if check:
            violations = validate_instance(self)
            if violations:
                raise InvalidInstanceError(violations)

    @property
    def flows(self) -> list[Flow]:
        """All flows, sorted by (coflow id, input, output)."""
        return sorted((f for c in self.coflows for f in c.flows), key=lambda f: f.key)

    def coflow(self, coflow_id: int) -> Coflow:
        for c in self.coflows:
            if c.id == coflow_id:
                return c
        raise KeyError(coflow_id)

    @property
    def zero_release(self) -> bool:
        return all(c.release == 0 for c in self.coflows)


@dataclass(frozen=True)
class PortLoads:
    """Per-coflow port totals; ``input_load[(k, i)]`` is L_ik."""

    input_load: dict[tuple[int, int], int] = field(default_factory=dict)
    output_load: dict[tuple[int, int], int] = field(default_factory=dict)

    def input(self, coflow_id: int, port: int) -> int:
        return self.input_load.get((coflow_id, port), 0)

    def output(self, coflow_id: int, port: int) -> int:
        return self.output_load.get((coflow_id, port), 0)


def make_coflow(
    coflow_id: int,
    flows: Iterable[tuple[int, int, int]],
    weight=1,
    release: int = 0,
) -> Coflow:
    """Build a coflow from ``(input, output, size)`` triples."""
    return Coflow(
        id=coflow_id,
        flows=tuple(Flow(coflow_id, i, j, d) for i, j, d in flows),
        weight=Fraction(weight),
        release=release,
    )


def make_instance(cores: int, ports: int, coflows: Iterable[Coflow]) -> CoflowInstance:
    return CoflowInstance(NetworkConfig(cores, ports), tuple(coflows))


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def validate_instance(instance: CoflowInstance) -> list[str]:
    """Return a list of violations; an empty list means the instance is well formed."""
    out: list[str] = []
    net = instance.network
    if not _is_int(net.cores) or net.cores < 1:
        out.append(f"cores must be a positive integer, got {net.cores!r}")
    if not _is_int(net.ports) or net.ports < 1:
        out.append(f"ports must be a positive integer, got {net.ports!r}")
    ports = net.ports if _is_int(net.ports) else 0

    ids = Counter(c.id for c in instance.coflows)
    for cid, n in sorted(ids.items()):
        if n > 1:
            out.append(f"duplicate coflow id {cid}")

    for c in instance.coflows:
        if not c.weight > 0:
            out.append(f"coflow {c.id}: non-positive weight {c.weight}")
        if not _is_int(c.release) or c.release < 0:
            out.append(f"coflow {c.id}: negative or non-integer release {c.release!r}")
        if not c.flows:
            out.append(f"coflow {c.id}: no flows")
        links = Counter()
        for f in c.flows:
            if f.coflow_id != c.id:
                out.append(f"coflow {c.id}: flow tagged with coflow {f.coflow_id}")
            for name, p in (("input", f.input), ("output", f.output)):
                if not _is_int(p) or not 1 <= p <= ports:
                    out.append(f"coflow {c.id}: {name} port out of range ({p!r} not in [1, {ports}])")
            if not _is_int(f.size) or f.size < 1:
                out.append(f"coflow {c.id}: non-positive size {f.size!r} on link ({f.input}, {f.output})")
            links[(f.input, f.output)] += 1
        for (i, j), n in sorted(links.items()):
            if n > 1:
                out.append(f"coflow {c.id}: duplicate link entry ({i}, {j})")
    return out


def compute_port_loads(instance: CoflowInstance) -> PortLoads:
    inp: dict[tuple[int, int], int] = defaultdict(int)
    outp: dict[tuple[int, int], int] = defaultdict(int)
    for c in instance.coflows:
        for f in c.flows:
            inp[(c.id, f.input)] += f.size
            outp[(c.id, f.output)] += f.size
    return PortLoads(dict(inp), dict(outp))
