"""Coflow scheduling on identical parallel switch networks."""

from .model import (
    Coflow,
    CoflowInstance,
    Flow,
    NetworkConfig,
    compute_port_loads,
    make_coflow,
    make_instance,
    validate_instance,
)
from .relaxations import solve_divisible_lp, solve_indivisible_lp
from .divisible import schedule_divisible
from .indivisible import schedule_baseline, schedule_indivisible
from .simulator import verify_trace
from .oracles import audit_bounds

__all__ = [
    "Coflow",
    "CoflowInstance",
    "Flow",
    "NetworkConfig",
    "audit_bounds",
    "compute_port_loads",
    "make_coflow",
    "make_instance",
    "schedule_baseline",
    "schedule_divisible",
    "schedule_indivisible",
    "solve_divisible_lp",
    "solve_indivisible_lp",
    "validate_instance",
    "verify_trace",
]
