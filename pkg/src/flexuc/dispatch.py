"""Extension to the original horizon, economic dispatch and correction.

The adaptive commitment is expanded block-constant, re-dispatched at the
original resolution with the conventional constraints, and any violations
trigger a split-and-resolve loop that refines the offending windows to
singletons until the extension is feasible.
"""

import math
import time
from dataclasses import dataclass

import numpy as np

from . import milpcore, ucbuilder
from .demand import DemandSeries, Partition
from .errors import FlexucError
from .milpcore import EQ, GE, LE, MilpModel
from .powersys import NetworkCase, PtdfMatrix, compute_ptdf
from .ucbuilder import ModelHandle, UcConfig, UcSolution

SLACK_PENALTY = 1e6   # $/MW, far above any marginal cost
VIOL_TOL = 1e-6


@dataclass(frozen=True)
class ExtendedSchedule:
    """Block-constant commitment at the original resolution."""

    u: np.ndarray           # N_G x T0 ints
    provenance: tuple       # original period tau -> adaptive period t (1-based)

    @property
    def t0(self) -> int:
        return self.u.shape[1]


@dataclass(frozen=True)
class DispatchViolation:
    period: int      # original period, 1-based
    tag: str
    magnitude: float # MW


@dataclass(frozen=True)
class DispatchResult:
    p: np.ndarray | None
    total_cost: float
    operating_cost: float
    startup_cost: float
    feasible: bool
    violations: tuple


def extend(uc_sol: UcSolution, partition: Partition, t0: int) -> ExtendedSchedule:
    """Expand the adaptive commitment; startups land on window starts."""
    windows = partition.windows(t0)
    ng = uc_sol.u.shape[0]
    u = np.zeros((ng, t0), dtype=np.int8)
    prov = np.zeros(t0, dtype=np.int64)
    for t, (ts, tf) in enumerate(windows):
        u[:, ts - 1:tf] = uc_sol.u[:, t:t + 1]
        prov[ts - 1:tf] = t + 1
    return ExtendedSchedule(u, tuple(int(v) for v in prov))


def startup_cost_of(case: NetworkCase, u: np.ndarray) -> float:
    total = 0.0
    for i, unit in enumerate(case.units):
        prev = 1 if unit.init_status else 0
        for tau in range(u.shape[1]):
            if u[i, tau] == 1 and prev == 0:
                total += unit.cost_startup
            prev = int(u[i, tau])
    return total


def economic_dispatch(case: NetworkCase, demand: DemandSeries,
                      schedule: ExtendedSchedule, config: UcConfig | None = None,
                      soft: bool = True, ptdf: PtdfMatrix | None = None,
                      engine: str = "auto") -> DispatchResult:
    """LP re-dispatch at original resolution with the commitment fixed.

    soft=True adds nonnegative slacks with a large penalty and reports the
    slack values as violations; soft=False just returns infeasible with no
    diagnosis.  Reported cost never includes the penalty terms.
    """
    cfg = config or UcConfig()
    t0, ng = demand.t0, case.n_units
    if schedule.t0 != t0:
        raise FlexucError("dispatch.horizon", "schedule does not cover the demand horizon")
    if cfg.network_enabled and ptdf is None and case.monitored_lines:
        ptdf = compute_ptdf(case)
    dt = demand.step_hours
    u = schedule.u.astype(np.int64)

    model = MilpModel("dispatch")
    p_idx = np.empty((ng, t0), dtype=np.int64)
    for i, unit in enumerate(case.units):
        for tau in range(t0):
            lo = unit.p_min * int(u[i, tau])
            hi = unit.p_max * int(u[i, tau])
            p_idx[i, tau] = model.add_var(f"p_{i}_{tau + 1}", lo, hi,
                                          obj=unit.cost_linear * dt)

    slack_meta = []   # (var index, period, tag)

    def add_row(coeffs, sense, rhs, name, period, tag):
        if soft:
            if sense == EQ:
                sp = model.add_var(f"slp_{name}", 0.0, math.inf, obj=SLACK_PENALTY)
                sm = model.add_var(f"slm_{name}", 0.0, math.inf, obj=SLACK_PENALTY)
                coeffs = dict(coeffs)
                coeffs[sp] = 1.0
                coeffs[sm] = -1.0
                slack_meta.append((sp, period, tag))
                slack_meta.append((sm, period, tag))
            else:
                sv = model.add_var(f"sl_{name}", 0.0, math.inf, obj=SLACK_PENALTY)
                coeffs = dict(coeffs)
                coeffs[sv] = -1.0 if sense == LE else 1.0
                slack_meta.append((sv, period, tag))
        model.add_constr(coeffs, sense, rhs, name)

    sysd = demand.system
    for tau in range(t0):
        add_row({int(p_idx[i, tau]): 1.0 for i in range(ng)}, EQ,
                float(sysd[tau]), f"bal_{tau + 1}", tau + 1, "balance")

    if cfg.network_enabled:
        for line in case.monitored_lines:
            row = ptdf.values[line.id]
            unit_coef = row[case.unit_buses]
            base_all = demand.values @ row
            for tau in range(t0):
                coeffs = {int(p_idx[i, tau]): unit_coef[i]
                          for i in range(ng) if unit_coef[i] != 0.0}
                base = float(base_all[tau])
                add_row(coeffs, LE, line.rating + base,
                        f"netp_l{line.id}_{tau + 1}", tau + 1, "network")
                add_row(coeffs, GE, -line.rating + base,
                        f"netn_l{line.id}_{tau + 1}", tau + 1, "network")

    for i, unit in enumerate(case.units):
        u0 = 1 if unit.init_status else 0
        p0 = unit.init_power
        ru, rd = unit.ramp_up * dt, unit.ramp_down * dt
        for tau in range(t0):
            uc = int(u[i, tau])
            up = u0 if tau == 0 else int(u[i, tau - 1])
            rhs_up = ru * up + unit.p_min * (uc - up) + unit.p_max * (1 - uc)
            rhs_dn = rd * uc + unit.p_min * (up - uc) + unit.p_max * (1 - up)
            if tau == 0:
                add_row({int(p_idx[i, 0]): 1.0}, LE, rhs_up + p0,
                        f"rup_{i}_1", 1, "ramp_up")
                add_row({int(p_idx[i, 0]): -1.0}, LE, rhs_dn - p0,
                        f"rdn_{i}_1", 1, "ramp_down")
            else:
                add_row({int(p_idx[i, tau]): 1.0, int(p_idx[i, tau - 1]): -1.0},
                        LE, rhs_up, f"rup_{i}_{tau + 1}", tau + 1, "ramp_up")
                add_row({int(p_idx[i, tau]): -1.0, int(p_idx[i, tau - 1]): 1.0},
                        LE, rhs_dn, f"rdn_{i}_{tau + 1}", tau + 1, "ramp_down")

    sol = milpcore.solve_lp(model, engine=engine, time_limit=cfg.time_limit)
    if sol.status != milpcore.OPTIMAL:
        if not soft and sol.status == milpcore.INFEASIBLE:
            return DispatchResult(None, math.nan, math.nan, math.nan, False, ())
        raise FlexucError("dispatch.lp", f"dispatch LP ended with status {sol.status}")

    p = sol.values[p_idx]
    violations = []
    for var, period, tag in slack_meta:
        v = float(sol.values[var])
        if v > VIOL_TOL:
            violations.append(DispatchViolation(period, tag, v))
    violations.sort(key=lambda v: (v.period, v.tag))
    noload = sum(unit.cost_noload * float(u[i].sum()) * dt
                 for i, unit in enumerate(case.units))
    operating = float(p.sum(axis=1) @ [unit.cost_linear for unit in case.units]) * dt \
        + noload
    su_cost = startup_cost_of(case, u)
    return DispatchResult(p, operating + su_cost, operating, su_cost,
                          len(violations) == 0, tuple(violations))


@dataclass
class CorrectionOutcome:
    schedule: ExtendedSchedule
    dispatch: DispatchResult
    rounds: int
    partition: Partition
    uc: UcSolution
    milp_time: float = 0.0
    dispatch_time: float = 0.0


def _refined_partition(partition: Partition, t0: int, bad_periods: set) -> Partition:
    """Replace every window containing a flagged period by singletons."""
    starts = set(partition.starts)
    for ts, tf in partition.windows(t0):
        if any(ts <= tau <= tf for tau in bad_periods):
            starts.update(range(ts, tf + 1))
    return Partition(tuple(sorted(starts)))


def correct(case: NetworkCase, demand: DemandSeries, partition: Partition,
            uc_sol: UcSolution, config: UcConfig | None = None,
            ptdf: PtdfMatrix | None = None, engine: str = "auto") -> CorrectionOutcome:
    """Split-and-resolve loop until the extended schedule dispatches cleanly.

    Each round dispatches softly, splits every window touching a violated
    period (ramp violations implicate both ends of the transition), and
    re-solves the NCUC on the refined partition.  The partition strictly
    refines every round, so the loop ends at the all-singleton model at
    the latest; if that is still infeasible the case itself is infeasible.
    """
    cfg = config or UcConfig()
    if cfg.network_enabled and ptdf is None and case.monitored_lines:
        ptdf = compute_ptdf(case)
    t0 = demand.t0
    cur_part, cur_uc = partition, uc_sol
    rounds = 0
    milp_time = 0.0
    dispatch_time = 0.0
    while True:
        sched = extend(cur_uc, cur_part, t0)
        t_a = time.perf_counter()
        disp = economic_dispatch(case, demand, sched, cfg, soft=True,
                                 ptdf=ptdf, engine=engine)
        dispatch_time += time.perf_counter() - t_a
        if disp.feasible:
            return CorrectionOutcome(sched, disp, rounds, cur_part, cur_uc,
                                     milp_time, dispatch_time)
        if cur_part.num_periods == t0:
            raise FlexucError("dispatch.case_infeasible",
                              "original-resolution dispatch is infeasible")
        bad = set()
        for v in disp.violations:
            bad.add(v.period)
            if v.tag in ("ramp_up", "ramp_down") and v.period > 1:
                bad.add(v.period - 1)
        new_part = _refined_partition(cur_part, t0, bad)
        if new_part.starts == cur_part.starts:
            new_part = Partition.singletons(t0)
        t_a = time.perf_counter()
        handle = ucbuilder.build_ncuc(case, demand, new_part, cfg, ptdf=ptdf)
        sol = milpcore.solve_milp(handle.model, gap=cfg.mip_gap,
                                  time_limit=cfg.time_limit, engine=engine)
        milp_time += time.perf_counter() - t_a
        if not sol.ok:
            if new_part.num_periods == t0:
                raise FlexucError("dispatch.case_infeasible",
                                  f"all-singleton model ended with status {sol.status}")
            new_part = Partition.singletons(t0)
            t_a = time.perf_counter()
            handle = ucbuilder.build_ncuc(case, demand, new_part, cfg, ptdf=ptdf)
            sol = milpcore.solve_milp(handle.model, gap=cfg.mip_gap,
                                      time_limit=cfg.time_limit, engine=engine)
            milp_time += time.perf_counter() - t_a
            if not sol.ok:
                raise FlexucError("dispatch.case_infeasible",
                                  f"all-singleton model ended with status {sol.status}")
        cur_part = new_part
        cur_uc = ucbuilder.extract_solution(handle, sol)
        rounds += 1
