"""Experiment matrix: M1-M4 against the full-resolution benchmark.

Each run times its stages separately (resolution determination, initial
MILP, dispatch, correction) so acceleration ratios can be reported with
and without the aggregation overhead.  Comparisons are always made after
correction.
"""

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import dispatch as dispatch_mod
from . import milpcore, resolution, ucbuilder
from .caseio import load_case
from .demand import DemandSeries, Partition
from .errors import FlexucError
from .powersys import NetworkCase, compute_ptdf

METHODS = ("M1", "M2", "M3", "M4", "BM")
SCHEMA_VERSION = 1

BENCH_CSV_COLUMNS = [
    "method", "periods", "status", "cost", "cost_variation_pct", "acceleration",
    "diff_statuses", "corrections", "time_resolution_s", "time_milp_s",
    "time_dispatch_s", "time_correction_s", "time_total_s",
]
SWEEP_CSV_COLUMNS = [
    "periods", "cost", "cost_variation_pct", "corrections",
    "time_resolution_s", "time_milp_s", "time_dispatch_s",
    "time_correction_s", "time_total_s",
]


@dataclass(frozen=True)
class BenchConfig:
    theta: float = resolution.THETA_DEFAULT
    gap: float = 1e-4
    reserve_up: float = 0.05
    reserve_down: float = 0.05
    time_limit: float | None = None
    seed: int = 0
    engine: str = "auto"
    jobs: int = 1

    def uc_config(self) -> ucbuilder.UcConfig:
        return ucbuilder.UcConfig(self.reserve_up, self.reserve_down,
                                  self.gap, self.time_limit)


@dataclass(frozen=True)
class RunSpec:
    case_path: str
    demand_path: str
    method: str
    periods: int | None = None     # ignored by BM
    config: BenchConfig = field(default_factory=BenchConfig)
    units_path: str | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise FlexucError("bench.method", f"unknown method {self.method!r}")


@dataclass
class RunResult:
    method: str
    periods: int
    status: str
    cost: float
    milp_objective: float
    corrections: int
    time_resolution: float
    time_milp: float
    time_dispatch: float
    time_correction: float
    time_total: float
    partition: Partition
    schedule_u: np.ndarray   # N_G x T0, post correction
    binaries: int
    # filled by bench() against the BM run:
    acceleration: float | None = None
    cost_variation_pct: float | None = None
    diff_statuses: int | None = None


def determine_partition(method: str, case: NetworkCase, demand: DemandSeries,
                        periods: int, config: BenchConfig, ptdf=None):
    """The per-method resolution stage; returns (partition, candidates or None)."""
    t0 = demand.t0
    if method == "BM":
        return Partition.singletons(t0), None
    if method == "M1":
        cands = resolution.estimate_congestion(case, demand, theta=config.theta,
                                               gap=config.gap, ptdf=ptdf,
                                               engine=config.engine,
                                               time_limit=config.time_limit)
        table = resolution.build_impact_table(case, demand, cands, ptdf=ptdf)
        return resolution.optimize_partition(t0, periods, table), cands
    if method == "M2":
        return resolution.baseline_partition("demand_only", demand, t0, periods), None
    if method == "M3":
        return resolution.baseline_partition("ward", demand, t0, periods), None
    if method == "M4":
        return resolution.baseline_partition("even", demand, t0, periods), None
    raise FlexucError("bench.method", f"unknown method {method!r}")


def run_pipeline(case: NetworkCase, demand: DemandSeries, method: str,
                 periods: int | None, config: BenchConfig) -> RunResult:
    """Resolution -> adaptive MILP -> extension -> dispatch -> correction."""
    t0 = demand.t0
    eff_periods = t0 if method == "BM" else int(periods)
    if not (1 <= eff_periods <= t0):
        raise FlexucError("partition.too_many",
                          f"periods={eff_periods} outside [1, {t0}]")
    cfg = config.uc_config()
    t_run0 = time.perf_counter()
    ptdf = compute_ptdf(case) if case.monitored_lines else None

    t_a = time.perf_counter()
    partition, _cands = determine_partition(method, case, demand,
                                            eff_periods, config, ptdf)
    time_resolution = time.perf_counter() - t_a

    t_a = time.perf_counter()
    handle = ucbuilder.build_ncuc(case, demand, partition, cfg, ptdf=ptdf)
    sol = milpcore.solve_milp(handle.model, gap=cfg.mip_gap,
                              time_limit=cfg.time_limit, engine=config.engine)
    time_milp = time.perf_counter() - t_a
    if not sol.ok:
        code = "uc.time_limit" if sol.status == milpcore.TIME_LIMIT else "uc.solve"
        raise FlexucError(code, f"{method}: MILP ended with status {sol.status}")
    uc_sol = ucbuilder.extract_solution(handle, sol)

    outcome = dispatch_mod.correct(case, demand, partition, uc_sol, cfg,
                                   ptdf=ptdf, engine=config.engine)
    time_total = time.perf_counter() - t_run0
    return RunResult(
        method=method, periods=eff_periods, status=sol.status,
        cost=outcome.dispatch.total_cost, milp_objective=uc_sol.objective,
        corrections=outcome.rounds, time_resolution=time_resolution,
        time_milp=time_milp, time_dispatch=outcome.dispatch_time,
        time_correction=outcome.milp_time, time_total=time_total,
        partition=outcome.partition, schedule_u=outcome.schedule.u,
        binaries=handle.model.num_binaries,
    )


def run(spec: RunSpec) -> RunResult:
    case, demand = load_case(spec.case_path, spec.demand_path, spec.units_path)
    return run_pipeline(case, demand, spec.method, spec.periods, spec.config)


def diff_statuses(u_a: np.ndarray, u_b: np.ndarray) -> int:
    """Number of (unit, original period) pairs with different on/off status."""
    return int(np.count_nonzero(u_a != u_b))


@dataclass
class BenchReport:
    case_name: str
    t0: int
    n_units: int
    n_buses: int
    periods: int
    config: BenchConfig
    runs: list

    def run_for(self, method: str) -> RunResult | None:
        for r in self.runs:
            if r.method == method:
                return r
        return None


def bench(case: NetworkCase, demand: DemandSeries, methods, periods: int,
          config: BenchConfig | None = None) -> BenchReport:
    """Run the matrix; BM is always included as the comparison baseline."""
    config = config or BenchConfig()
    wanted = list(methods)
    order = [m for m in METHODS if m in wanted or m == "BM"]
    runs = []
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            futs = [pool.submit(run_pipeline, case, demand, m, periods, config)
                    for m in order]
            runs = [f.result() for f in futs]
    else:
        for m in order:
            runs.append(run_pipeline(case, demand, m, periods, config))
    bm = next(r for r in runs if r.method == "BM")
    for r in runs:
        if r.method == "BM":
            r.acceleration = 1.0
            r.cost_variation_pct = 0.0
            r.diff_statuses = 0
        else:
            r.acceleration = bm.time_total / r.time_total if r.time_total > 0 else math.inf
            r.cost_variation_pct = 100.0 * (r.cost - bm.cost) / bm.cost
            r.diff_statuses = diff_statuses(r.schedule_u, bm.schedule_u)
    runs = [r for r in runs if r.method in wanted or r.method == "BM"]
    return BenchReport(case.name, demand.t0, case.n_units, case.n_buses,
                       periods, config, runs)


@dataclass
class SweepEntry:
    periods: int
    cost: float
    cost_variation_pct: float
    corrections: int
    time_resolution: float
    time_milp: float
    time_dispatch: float
    time_correction: float
    time_total: float


@dataclass
class SweepReport:
    case_name: str
    t0: int
    method: str
    config: BenchConfig
    entries: list
    bm_cost: float
    bm_time: float
    min_periods_without_correction: int | None


def sweep_T(case: NetworkCase, demand: DemandSeries, t_list,
            config: BenchConfig | None = None, method: str = "M1") -> SweepReport:
    """Run one method over a list of adaptive-period counts.

    Also flags the smallest T that needed no correction, the quantity the
    N-sweep is usually after.
    """
    config = config or BenchConfig()
    bm = run_pipeline(case, demand, "BM", None, config)
    entries = []
    for t in sorted(t_list):
        r = run_pipeline(case, demand, method, t, config)
        entries.append(SweepEntry(
            periods=t, cost=r.cost,
            cost_variation_pct=100.0 * (r.cost - bm.cost) / bm.cost,
            corrections=r.corrections, time_resolution=r.time_resolution,
            time_milp=r.time_milp, time_dispatch=r.time_dispatch,
            time_correction=r.time_correction, time_total=r.time_total))
    # smallest tested T from which upward no correction is ever needed
    dirty = [e.periods for e in entries if e.corrections > 0]
    ceiling = max(dirty) if dirty else -1
    clean = [e.periods for e in entries if e.corrections == 0 and e.periods > ceiling]
    return SweepReport(case.name, demand.t0, method, config, entries,
                       bm.cost, bm.time_total, min(clean) if clean else None)


# -- report emission ---------------------------------------------------------

def _run_row(r: RunResult) -> dict:
    return {
        "method": r.method, "periods": r.periods, "status": r.status,
        "cost": round(r.cost, 6),
        "cost_variation_pct": None if r.cost_variation_pct is None
        else round(r.cost_variation_pct, 6),
        "acceleration": None if r.acceleration is None else round(r.acceleration, 6),
        "diff_statuses": r.diff_statuses, "corrections": r.corrections,
        "time_resolution_s": round(r.time_resolution, 6),
        "time_milp_s": round(r.time_milp, 6),
        "time_dispatch_s": round(r.time_dispatch, 6),
        "time_correction_s": round(r.time_correction, 6),
        "time_total_s": round(r.time_total, 6),
    }


def bench_report_dict(report: BenchReport) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "bench",
        "case": report.case_name,
        "t0": report.t0,
        "n_units": report.n_units,
        "n_buses": report.n_buses,
        "periods": report.periods,
        "baseline": "BM",
        "config": {
            "theta": report.config.theta, "gap": report.config.gap,
            "reserve_up": report.config.reserve_up,
            "reserve_down": report.config.reserve_down,
            "time_limit": report.config.time_limit,
            "seed": report.config.seed, "engine": report.config.engine,
            "jobs": report.config.jobs,
        },
        "runs": [dict(_run_row(r), partition_starts=list(r.partition.starts))
                 for r in report.runs],
    }


def sweep_report_dict(report: SweepReport) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "sweep",
        "case": report.case_name,
        "t0": report.t0,
        "method": report.method,
        "bm_cost": round(report.bm_cost, 6),
        "bm_time_s": round(report.bm_time, 6),
        "min_periods_without_correction": report.min_periods_without_correction,
        "entries": [asdict(e) for e in report.entries],
    }


def emit_report(report, out_dir, fmt: str = "both") -> list[Path]:
    """Write the report as JSON and/or CSV under `out_dir`; returns the paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    is_sweep = isinstance(report, SweepReport)
    stem = "sweep" if is_sweep else "bench"
    if fmt in ("json", "both"):
        path = out_dir / f"{stem}.json"
        payload = sweep_report_dict(report) if is_sweep else bench_report_dict(report)
        path.write_text(json.dumps(payload, indent=2) + "\n")
        written.append(path)
    if fmt in ("csv", "both"):
        path = out_dir / f"{stem}.csv"
        with open(path, "w", newline="") as fh:
            if is_sweep:
                w = csv.DictWriter(fh, fieldnames=SWEEP_CSV_COLUMNS)
                w.writeheader()
                for e in report.entries:
                    w.writerow({
                        "periods": e.periods, "cost": round(e.cost, 6),
                        "cost_variation_pct": round(e.cost_variation_pct, 6),
                        "corrections": e.corrections,
                        "time_resolution_s": round(e.time_resolution, 6),
                        "time_milp_s": round(e.time_milp, 6),
                        "time_dispatch_s": round(e.time_dispatch, 6),
                        "time_correction_s": round(e.time_correction, 6),
                        "time_total_s": round(e.time_total, 6),
                    })
            else:
                w = csv.DictWriter(fh, fieldnames=BENCH_CSV_COLUMNS)
                w.writeheader()
                for r in report.runs:
                    w.writerow(_run_row(r))
        written.append(path)
    return written
