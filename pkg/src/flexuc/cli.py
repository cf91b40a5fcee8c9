"""Command line interface.

Subcommands: validate, resolve, solve, bench, sweep.  Exit codes:
0 success, 2 validation/usage error, 3 infeasible, 4 time limit.
"""

import argparse
import json
import sys
from pathlib import Path

from . import bench as bench_mod
from . import figures, milpcore, resolution
from .caseio import load_case
from .demand import Partition, partition_durations
from .errors import FlexucError
from .powersys import compute_ptdf, validate_case

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INFEASIBLE = 3
EXIT_TIME_LIMIT = 4

_INFEASIBLE_CODES = {
    "resolution.relaxation_infeasible", "uc.capacity_shortfall",
    "dispatch.case_infeasible", "io.solution_infeasible", "uc.solve",
}


def _add_common(p, needs_demand=True):
    p.add_argument("--case", required=True, help="network case file")
    p.add_argument("--demand", required=needs_demand, help="demand table (CSV)")
    p.add_argument("--units", help="unit sidecar file for MATPOWER imports")
    p.add_argument("--step-hours", type=float, default=None,
                   help="override the demand file's step length")


def _add_solver(p):
    p.add_argument("--gap", type=float, default=1e-4, help="MIP relative gap")
    p.add_argument("--theta", type=float, default=resolution.THETA_DEFAULT,
                   help="congestion flag threshold (share of rating)")
    p.add_argument("--reserve-up", type=float, default=0.05)
    p.add_argument("--reserve-down", type=float, default=0.05)
    p.add_argument("--time-limit", type=float, default=None, help="seconds")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--engine", choices=["auto", "builtin", "highs"], default="auto")


def _add_out(p):
    p.add_argument("--out", help="output directory for reports and figures")
    p.add_argument("--format", choices=["json", "csv", "both"], default="both")
    p.add_argument("--no-plots", action="store_true",
                   help="skip rendering figures next to the reports")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="flexuc",
                                 description="NCUC with congestion-aware "
                                             "flexible temporal resolution")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a case (and demand) file")
    _add_common(p, needs_demand=False)

    p = sub.add_parser("resolve", help="determine and emit a partition")
    _add_common(p)
    p.add_argument("--method", choices=bench_mod.METHODS, default="M1")
    p.add_argument("--periods", type=int, required=True, help="adaptive period count T")
    _add_solver(p)
    _add_out(p)

    p = sub.add_parser("solve", help="run one method end to end")
    _add_common(p)
    p.add_argument("--method", choices=bench_mod.METHODS, default="M1")
    p.add_argument("--periods", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    _add_solver(p)
    _add_out(p)

    p = sub.add_parser("bench", help="run the method matrix against BM")
    _add_common(p)
    p.add_argument("--method", default="M1,M2,M3,M4,BM",
                   help="comma-separated method list")
    p.add_argument("--periods", type=int, required=True)
    p.add_argument("--jobs", type=int, default=1)
    _add_solver(p)
    _add_out(p)

    p = sub.add_parser("sweep", help="sweep the adaptive period count")
    _add_common(p)
    p.add_argument("--method", choices=bench_mod.METHODS, default="M1")
    p.add_argument("--periods", required=True,
                   help="comma-separated T values, e.g. 24,38,48")
    p.add_argument("--jobs", type=int, default=1)
    _add_solver(p)
    _add_out(p)
    return ap


def _config(args) -> bench_mod.BenchConfig:
    return bench_mod.BenchConfig(
        theta=args.theta, gap=args.gap, reserve_up=args.reserve_up,
        reserve_down=args.reserve_down, time_limit=args.time_limit,
        seed=args.seed, engine=args.engine, jobs=getattr(args, "jobs", 1))


def _emit(report, args, out_paths):
    if args.out:
        out_paths += bench_mod.emit_report(report, args.out, args.format)


def cmd_validate(args) -> int:
    try:
        case, demand = load_case(args.case, args.demand, args.units, args.step_hours)
    except FlexucError as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    violations = validate_case(case)
    for v in violations:
        print(str(v), file=sys.stderr)
    if violations:
        return EXIT_VALIDATION
    msg = {"case": case.name, "buses": case.n_buses, "lines": case.n_lines,
           "units": case.n_units, "valid": True}
    if demand is not None:
        msg["t0"] = demand.t0
        msg["step_hours"] = demand.step_hours
    print(json.dumps(msg))
    return EXIT_OK


def cmd_resolve(args) -> int:
    case, demand = load_case(args.case, args.demand, args.units, args.step_hours)
    config = _config(args)
    ptdf = compute_ptdf(case) if case.monitored_lines else None
    candidates = None
    if args.method in ("BM",):
        partition = Partition.singletons(demand.t0)
    elif args.method == "M1":
        candidates = resolution.estimate_congestion(
            case, demand, theta=config.theta, gap=config.gap, ptdf=ptdf,
            engine=config.engine, time_limit=config.time_limit)
        table = resolution.build_impact_table(case, demand, candidates, ptdf=ptdf)
        partition = resolution.optimize_partition(demand.t0, args.periods, table)
    else:
        method = {"M2": "demand_only", "M3": "ward", "M4": "even"}[args.method]
        partition = resolution.baseline_partition(method, demand, demand.t0, args.periods)
    payload = {
        "case": case.name, "method": args.method, "t0": demand.t0,
        "periods": partition.num_periods,
        "starts": list(partition.starts),
        "durations": partition_durations(partition, demand.t0),
        "objective": partition.objective,
    }
    print(json.dumps(payload))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "partition.json").write_text(json.dumps(payload, indent=2) + "\n")
        if not args.no_plots:
            figures.plot_partitions(demand, {args.method: partition},
                                    out / "partition.png", candidates=candidates)
    return EXIT_OK


def cmd_solve(args) -> int:
    case, demand = load_case(args.case, args.demand, args.units, args.step_hours)
    config = _config(args)
    if args.method != "BM" and args.periods is None:
        print("--periods is required for aggregating methods", file=sys.stderr)
        return EXIT_VALIDATION
    result = bench_mod.run_pipeline(case, demand, args.method, args.periods, config)
    payload = {
        "case": case.name, "method": result.method, "periods": result.periods,
        "status": result.status, "cost": result.cost,
        "corrections": result.corrections,
        "time_resolution_s": result.time_resolution,
        "time_milp_s": result.time_milp,
        "time_dispatch_s": result.time_dispatch,
        "time_correction_s": result.time_correction,
        "time_total_s": result.time_total,
        "partition_starts": list(result.partition.starts),
    }
    print(json.dumps(payload))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "solve.json").write_text(json.dumps(payload, indent=2) + "\n")
        import csv as _csv
        with open(out / "schedule.csv", "w", newline="") as fh:
            w = _csv.writer(fh)
            w.writerow(["unit"] + [f"t{tau}" for tau in range(1, demand.t0 + 1)])
            for i in range(case.n_units):
                w.writerow([i] + [int(v) for v in result.schedule_u[i]])
        if not args.no_plots:
            figures.plot_partitions(demand, {result.method: result.partition},
                                    out / "partition.png")
    return EXIT_OK


def cmd_bench(args) -> int:
    case, demand = load_case(args.case, args.demand, args.units, args.step_hours)
    config = _config(args)
    methods = [m.strip() for m in args.method.split(",") if m.strip()]
    for m in methods:
        if m not in bench_mod.METHODS:
            print(f"unknown method {m!r}", file=sys.stderr)
            return EXIT_VALIDATION
    report = bench_mod.bench(case, demand, methods, args.periods, config)
    print(json.dumps(bench_report_summary(report)))
    out_paths: list = []
    _emit(report, args, out_paths)
    if args.out and not args.no_plots:
        out = Path(args.out)
        figures.plot_bench(report, out / "bench.png")
        figures.plot_partitions(demand, {r.method: r.partition for r in report.runs},
                                out / "partitions.png")
    return EXIT_OK


def bench_report_summary(report) -> dict:
    return {
        "case": report.case_name, "periods": report.periods,
        "runs": [{"method": r.method, "cost": r.cost,
                  "time_total_s": round(r.time_total, 3),
                  "acceleration": None if r.acceleration is None
                  else round(r.acceleration, 3),
                  "cost_variation_pct": None if r.cost_variation_pct is None
                  else round(r.cost_variation_pct, 4),
                  "corrections": r.corrections}
                 for r in report.runs],
    }


def cmd_sweep(args) -> int:
    case, demand = load_case(args.case, args.demand, args.units, args.step_hours)
    config = _config(args)
    try:
        t_list = [int(v) for v in args.periods.split(",") if v.strip()]
    except ValueError:
        print(f"bad --periods list {args.periods!r}", file=sys.stderr)
        return EXIT_VALIDATION
    report = bench_mod.sweep_T(case, demand, t_list, config, method=args.method)
    print(json.dumps({
        "case": report.case_name, "method": report.method,
        "min_periods_without_correction": report.min_periods_without_correction,
        "entries": [{"periods": e.periods,
                     "cost_variation_pct": round(e.cost_variation_pct, 4),
                     "corrections": e.corrections,
                     "time_total_s": round(e.time_total, 3)}
                    for e in report.entries],
    }))
    out_paths: list = []
    _emit(report, args, out_paths)
    if args.out and not args.no_plots:
        figures.plot_sweep(report, Path(args.out) / "sweep.png")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"validate": cmd_validate, "resolve": cmd_resolve,
                "solve": cmd_solve, "bench": cmd_bench, "sweep": cmd_sweep}
    try:
        return handlers[args.command](args)
    except FlexucError as exc:
        print(str(exc), file=sys.stderr)
        if exc.code in ("uc.time_limit",):
            return EXIT_TIME_LIMIT
        if exc.code in _INFEASIBLE_CODES:
            return EXIT_INFEASIBLE
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
