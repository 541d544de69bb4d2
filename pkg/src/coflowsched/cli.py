"""Command line entry point: ``coflowsched {gen,lp,schedule,verify,curves,oracle}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import formats
from .lp import DEFAULT_EPS_FEAS
from .oracles import OracleCapError, TinyCaps, brute_force_separation, exact_opt_tiny
from .pipeline import (
    EXIT_FEASIBILITY,
    EXIT_OK,
    EXIT_ROUND_LIMIT,
    EXIT_USAGE,
    MODES,
    run_pipeline,
    solve_lp,
)
from .indivisible import BASELINE_POLICIES
from .relaxations import DEFAULT_EPS_SEP, DEFAULT_MAX_ROUNDS, max_prefix_violation
from .simulator import verify_trace


def _lp_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=MODES, default="divisible")
    p.add_argument("--eps-sep", type=float, default=DEFAULT_EPS_SEP)
    p.add_argument("--eps-feas", type=float, default=DEFAULT_EPS_FEAS)
    p.add_argument("--max-rounds", type=int, default=DEFAULT_MAX_ROUNDS)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coflowsched", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a random instance file")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--ports", type=int, default=4)
    g.add_argument("--cores", type=int, default=2)
    g.add_argument("--coflows", type=int, default=5)
    g.add_argument("--density", type=float, default=0.5)
    g.add_argument("--max-size", type=int, default=5)
    g.add_argument("--max-release", type=int, default=10)
    g.add_argument("--max-weight", type=int, default=1)
    g.add_argument("-o", "--output", type=Path, help="write here instead of stdout")

    lp = sub.add_parser("lp", help="solve the LP relaxation of an instance")
    lp.add_argument("instance", type=Path)
    _lp_flags(lp)
    lp.add_argument("-o", "--output", type=Path)

    s = sub.add_parser("schedule", help="LP, schedule, verify and audit; writes artifacts")
    s.add_argument("instance", type=Path)
    _lp_flags(s)
    s.add_argument("--baseline", choices=BASELINE_POLICIES,
                   help="order coflows by this policy instead of the LP (indivisible only)")
    s.add_argument("--seed", type=int, default=0, help="seed for the random baseline")
    s.add_argument("--out-dir", type=Path)
    s.add_argument("--timing", action="store_true", help="add wall-clock timings to the report")

    v = sub.add_parser("verify", help="check a trace file against an instance")
    v.add_argument("instance", type=Path)
    v.add_argument("trace", type=Path)
    v.add_argument("--mode", choices=MODES, default="divisible")

    c = sub.add_parser("curves", help="emit closed-form approximation ratio curves")
    c.add_argument("--m-min", type=int, default=1)
    c.add_argument("--m-max", type=int, default=20)
    c.add_argument("-o", "--output", type=Path)

    o = sub.add_parser("oracle", help="brute-force reference computations")
    osub = o.add_subparsers(dest="oracle", required=True)
    sep = osub.add_parser("separate", help="subset vs prefix separation on one port")
    sep.add_argument("items", type=Path, help="JSON list of [id, size, C] triples")
    sep.add_argument("--cores", type=int, required=True)
    ex = osub.add_parser("exact", help="exact optimum of a tiny instance")
    ex.add_argument("instance", type=Path)
    ex.add_argument("--mode", choices=MODES, default="divisible")
    ex.add_argument("--max-states", type=int, default=TinyCaps.states)
    ex.add_argument("--trace", type=Path, help="write the optimal schedule here")
    return parser


def _emit(text: str, path: Path | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _dispatch(args)
    except (formats.FormatError, OSError, OracleCapError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def _dispatch(args) -> int:
    if args.command == "gen":
        params = formats.GeneratorParams(
            seed=args.seed, ports=args.ports, cores=args.cores, num_coflows=args.coflows,
            flow_density=args.density, max_size=args.max_size,
            max_release=args.max_release, max_weight=args.max_weight,
        )
        _emit(formats.dumps_instance(formats.generate(params)), args.output)
        return EXIT_OK

    if args.command == "lp":
        instance = formats.read_instance(args.instance)
        sol = solve_lp(instance, args.mode, args.eps_sep, args.max_rounds, args.eps_feas)
        _emit(formats.dumps_json(formats.solution_to_dict(sol)), args.output)
        return EXIT_OK if sol.converged else EXIT_ROUND_LIMIT

    if args.command == "schedule":
        mode = "indivisible" if args.baseline else args.mode
        res = run_pipeline(
            args.instance, mode, args.out_dir,
            eps_sep=args.eps_sep, eps_feas=args.eps_feas, max_rounds=args.max_rounds,
            baseline=args.baseline, seed=args.seed, timing=args.timing,
        )
        r = res.report
        line = (f"{mode}: objective {r['schedule_objective']} lp {r['lp_objective']:.6g} "
                f"rounds {r['lp_rounds']} feasible {r['feasible']}")
        if "bound" in r:
            line += f" max_ratio {r['max_ratio']:.4f} bound {r['bound']:.4g}"
        print(line)
        for name, path in res.files.items():
            print(f"  {name}: {path}")
        return res.exit_code

    if args.command == "verify":
        instance = formats.read_instance(args.instance)
        trace = formats.loads_trace(args.trace.read_text(), instance)
        rep = verify_trace(trace, instance, indivisible=(args.mode == "indivisible"))
        for v in rep.violations:
            print(v)
        print("pass" if rep.ok else f"fail ({len(rep.violations)} violations)")
        return EXIT_OK if rep.ok else EXIT_FEASIBILITY

    if args.command == "curves":
        rows = formats.emit_ratio_curves(range(args.m_min, args.m_max + 1))
        _emit(formats.dumps_curves(rows), args.output)
        return EXIT_OK

    if args.command == "oracle":
        if args.oracle == "separate":
            items = [tuple(it) for it in json.loads(args.items.read_text())]
            bf, witness = brute_force_separation(items, args.cores)
            pv, prefix = max_prefix_violation(items, args.cores)
            print(json.dumps({
                "brute_force": {"violation": bf, "set": list(witness)},
                "prefix": {"violation": pv, "set": list(prefix)},
            }, indent=2))
            return EXIT_OK
        instance = formats.read_instance(args.instance)
        res = exact_opt_tiny(
            instance, indivisible=(args.mode == "indivisible"),
            caps=TinyCaps(states=args.max_states),
        )
        obj = res.objective
        print(f"optimum {obj.numerator if obj.denominator == 1 else obj} ({res.states} states)")
        if args.trace:
            args.trace.write_text(formats.dumps_trace(res.trace))
        return EXIT_OK
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
