from __future__ import annotations

import itertools
import random

import pytest

from coflowsched.formats import GeneratorParams, generate

# criterion number -> (passed, detail), filled in by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")


def random_instance(seed: int, max_release: int = 10, **overrides):
    """Sweep-sized instance: N <= 4, m in {1,2,3}, <= 5 coflows, sizes <= 5."""
    rng = random.Random(seed)
    params = dict(
        seed=seed,
        ports=rng.randint(1, 4),
        cores=(1, 2, 3)[seed % 3],
        num_coflows=rng.randint(1, 5),
        flow_density=rng.choice([0.25, 0.5, 0.75]),
        max_size=5,
        max_release=max_release,
        max_weight=rng.randint(1, 3),
    )
    params.update(overrides)
    return generate(GeneratorParams(**params))


def tiny_instance(seed: int, max_release: int = 4):
    """Random instance inside the default exact-search caps."""
    for attempt in itertools.count():
        inst = random_instance(
            seed * 1000 + attempt, max_release=max_release,
            ports=(2, 3)[seed % 2], cores=(1, 2)[seed % 2 == 0], num_coflows=2 + seed % 2,
            flow_density=0.25, max_size=3,
        )
        flows = inst.flows
        if len(flows) <= 6 and sum(f.size for f in flows) <= 10:
            return inst


@pytest.fixture
def make_random_instance():
    return random_instance
