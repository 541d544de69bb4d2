"""LP -> schedule -> feasibility check -> bound audit, with file artifacts."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import formats
from .divisible import schedule_divisible
from .indivisible import schedule_baseline, schedule_indivisible
from .lp import DEFAULT_EPS_FEAS
from .model import CoflowInstance
from .oracles import audit_bounds
from .relaxations import (
    DEFAULT_EPS_SEP,
    DEFAULT_MAX_ROUNDS,
    RoundLimitError,
    solve_divisible_lp,
    solve_indivisible_lp,
)
from .simulator import verify_trace

log = logging.getLogger(__name__)

MODES = ("divisible", "indivisible")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FEASIBILITY = 2
EXIT_BOUND = 3
EXIT_ROUND_LIMIT = 4

# slack for the LP-below-schedule check
LOWER_BOUND_TOL = 1e-6


@dataclass
class PipelineResult:
    report: dict
    exit_code: int
    solution: object = None
    trace: object = None
    files: dict[str, Path] = field(default_factory=dict)


def solve_lp(instance: CoflowInstance, mode: str, eps_sep=DEFAULT_EPS_SEP,
             max_rounds=DEFAULT_MAX_ROUNDS, eps_feas=DEFAULT_EPS_FEAS):
    """Solve the relaxation for ``mode``; a round-limit yields the partial solution."""
    solver = {"divisible": solve_divisible_lp, "indivisible": solve_indivisible_lp}[mode]
    try:
        return solver(instance, eps_sep=eps_sep, max_rounds=max_rounds, eps_feas=eps_feas)
    except RoundLimitError as exc:
        log.warning("%s; results are not certified", exc)
        return exc.partial


def run_instance(
    instance: CoflowInstance,
    mode: str,
    eps_sep: float = DEFAULT_EPS_SEP,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
    eps_feas: float = DEFAULT_EPS_FEAS,
    baseline: str | None = None,
    seed: int = 0,
    timing: bool = False,
) -> PipelineResult:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if baseline is not None and mode != "indivisible":
        raise ValueError("baselines use the indivisible assignment rule; pass mode='indivisible'")
    t0 = time.perf_counter()
    sol = solve_lp(instance, mode, eps_sep, max_rounds, eps_feas)
    t1 = time.perf_counter()
    if baseline is not None:
        trace = schedule_baseline(instance, baseline, seed)
    elif mode == "divisible":
        trace = schedule_divisible(instance, sol)
    else:
        trace = schedule_indivisible(instance, sol)
    t2 = time.perf_counter()

    feas = verify_trace(trace, instance, indivisible=(mode == "indivisible"))
    lower_ok = sol.objective <= float(trace.objective) + LOWER_BOUND_TOL
    ratio = None if baseline is not None else audit_bounds(instance, sol, trace, mode)

    report = {
        "schema_version": formats.SCHEMA_VERSION,
        "mode": mode,
        "policy": baseline or "lp-order",
        "seed": seed if baseline == "random" else None,
        "cores": instance.network.cores,
        "ports": instance.network.ports,
        "coflows": len(instance.coflows),
        "flows": len(instance.flows),
        "with_release": not instance.zero_release,
        "lp_objective": sol.objective,
        "lp_rounds": sol.rounds,
        "lp_cuts": sol.num_cuts,
        "lp_certified": sol.converged,
        "schedule_objective": _num(trace.objective),
        "lp_lower_bound_ok": lower_ok,
        "feasible": feas.ok,
        "feasibility_violations": feas.violations,
    }
    if ratio is not None:
        report.update(
            bound=ratio.bound,
            max_ratio=ratio.max_ratio,
            bound_satisfied=ratio.satisfied,
            ratios=[
                {"item": list(k) if isinstance(k, tuple) else k, "ratio": r}
                for k, r in ratio.per_item_ratio.items()
            ],
        )
    if timing:
        report["timing"] = {"lp_seconds": t1 - t0, "schedule_seconds": t2 - t1}

    # an uncertified LP is not a proven lower bound, so its bound verdict is moot
    if not feas.ok:
        code = EXIT_FEASIBILITY
    elif not sol.converged:
        code = EXIT_ROUND_LIMIT
    elif not lower_ok or (ratio is not None and not ratio.satisfied):
        code = EXIT_BOUND
    else:
        code = EXIT_OK
    return PipelineResult(report, code, sol, trace)


def _num(x):
    return x.numerator if x.denominator == 1 else float(x)


def run_pipeline(instance_path, mode: str, out_dir=None, **flags) -> PipelineResult:
    """Run one instance file and write solution, trace and report next to it
    (or into ``out_dir``).  Parse failures raise ``formats.FormatError``."""
    path = Path(instance_path)
    instance = formats.read_instance(path)
    res = run_instance(instance, mode, **flags)
    out = Path(out_dir) if out_dir is not None else path.parent
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{path.stem}.{mode}" if flags.get("baseline") is None else f"{path.stem}.{flags['baseline']}"
    files = {
        "solution": out / f"{stem}.solution.json",
        "trace": out / f"{stem}.trace.csv",
        "report": out / f"{stem}.report.json",
    }
    files["solution"].write_text(formats.dumps_json(formats.solution_to_dict(res.solution)))
    files["trace"].write_text(formats.dumps_trace(res.trace))
    files["report"].write_text(formats.dumps_json(res.report))
    res.files = files
    return res
