"""Construction of the NCUC MILP on an adaptive partition.

The all-singleton partition reproduces the conventional model constraint
for constraint: ramp parameters collapse to the per-step values and the
window statistics collapse to point demands.  Ramping across windows of
unequal duration uses transformed parameters derived from the steepest
feasible trajectories at the original resolution.
"""

import math
from dataclasses import dataclass

import numpy as np

from .demand import DemandSeries, Partition, all_window_stats, partition_durations
from .errors import FlexucError
from .milpcore import EQ, GE, LE, MilpModel, MilpSolution
from .powersys import NetworkCase, PtdfMatrix, ThermalUnit, compute_ptdf


@dataclass(frozen=True)
class UcConfig:
    reserve_up_ratio: float = 0.05
    reserve_down_ratio: float = 0.05
    mip_gap: float = 1e-4
    time_limit: float | None = None
    network_enabled: bool = True

    def __post_init__(self):
        if not (0.0 <= self.mip_gap < 1.0):
            raise FlexucError("config.gap", "mip_gap must lie in [0, 1)")
        if self.reserve_up_ratio < 0.0 or self.reserve_down_ratio < 0.0:
            raise FlexucError("config.reserve", "reserve ratios must be >= 0")


@dataclass(frozen=True)
class RampEntry:
    """Transformed ramping parameters of one unit in one adaptive period."""

    ru: float       # max average-power increase when online in t-1 and t
    rd: float
    su: float       # max average power in t right after startup
    sd: float       # max average power in t-'s window right before shutdown
    tau_su: int     # turning point of the startup trajectory, original periods


def _startup_cap(p_min, p_max, rate_per_step, d_cur):
    """Average of the steepest trajectory from p_min, capped at p_max."""
    if rate_per_step <= 0:
        return p_min, 1
    tau = min(d_cur, int(math.floor((p_max - p_min) / rate_per_step)) + 1)
    su = (tau / d_cur) * rate_per_step * (tau - 1) / 2.0 \
        + (1.0 - tau / d_cur) * (p_max - p_min) + p_min
    return su, tau


def ramp_params(unit: ThermalUnit, d_prev: int, d_cur: int,
                step_hours: float) -> RampEntry:
    """Eq.-style transformed ramp limits for a (d_prev, d_cur) window pair.

    With d_prev = d_cur = 1 this reduces to the conventional constraint:
    ru = ramp_up * step and su = p_min.
    """
    if d_prev < 1 or d_cur < 1:
        raise FlexucError("ramp.duration", "window durations must be >= 1")
    ru_step = unit.ramp_up * step_hours
    rd_step = unit.ramp_down * step_hours
    ru = (d_cur + d_prev) / 2.0 * ru_step
    rd = (d_cur + d_prev) / 2.0 * rd_step
    su, tau_su = _startup_cap(unit.p_min, unit.p_max, ru_step, d_cur)
    sd, _ = _startup_cap(unit.p_min, unit.p_max, rd_step, d_cur)
    return RampEntry(ru, rd, su, sd, tau_su)


def min_time_horizon(t: int, dt_hours: float, durations, step_hours: float) -> int:
    """Last adaptive period the min-up/down constraint starting at t reaches.

    Smallest t' >= t whose cumulative length covers dt_hours; clips to the
    final period when the tail is shorter than the requirement.
    """
    total = 0.0
    for tp in range(t, len(durations) + 1):
        total += durations[tp - 1] * step_hours
        if total >= dt_hours - 1e-9:
            return tp
    return len(durations)


@dataclass
class ModelHandle:
    """MilpModel plus the (unit, period) variable index maps."""

    model: MilpModel
    u_idx: np.ndarray
    p_idx: np.ndarray
    s_idx: np.ndarray
    partition: Partition
    stats: list
    durations: list


@dataclass(frozen=True)
class UcSolution:
    """Commitment/output on the adaptive periods."""

    u: np.ndarray          # N_G x T ints
    p: np.ndarray          # N_G x T MW
    s: np.ndarray          # N_G x T startup flags
    objective: float
    status: str
    partition: Partition


def build_ncuc(case: NetworkCase, demand: DemandSeries, partition: Partition,
               config: UcConfig | None = None,
               ptdf: PtdfMatrix | None = None) -> ModelHandle:
    """The adaptive-period NCUC MILP."""
    return _build(case, demand, partition, config or UcConfig(),
                  ptdf=ptdf, relaxed=False)


def build_relaxed_ncuc(case: NetworkCase, demand: DemandSeries,
                       config: UcConfig | None = None) -> ModelHandle:
    """Original-resolution LP relaxation: u in [0,1], network dropped."""
    cfg = config or UcConfig()
    cfg = UcConfig(cfg.reserve_up_ratio, cfg.reserve_down_ratio,
                   cfg.mip_gap, cfg.time_limit, network_enabled=False)
    return _build(case, demand, Partition.singletons(demand.t0), cfg,
                  ptdf=None, relaxed=True)


def _build(case, demand, partition, config, ptdf, relaxed):
    t0 = demand.t0
    partition.validate(t0)
    durations = partition_durations(partition, t0)
    stats = all_window_stats(demand, partition)
    nt = len(durations)
    ng = case.n_units
    dt = demand.step_hours

    cap_total = sum(u.p_max for u in case.units)
    peak = max(st.max_sys for st in stats)
    if (1.0 + config.reserve_up_ratio) * peak > cap_total + 1e-9:
        raise FlexucError("uc.capacity_shortfall",
                          f"peak demand with reserve {(1 + config.reserve_up_ratio) * peak:.1f} MW "
                          f"exceeds installed capacity {cap_total:.1f} MW")

    if config.network_enabled and ptdf is None and case.monitored_lines:
        ptdf = compute_ptdf(case)

    model = MilpModel("ncuc" if not relaxed else "ncuc_relaxed")
    u_idx = np.empty((ng, nt), dtype=np.int64)
    p_idx = np.empty((ng, nt), dtype=np.int64)
    s_idx = np.empty((ng, nt), dtype=np.int64)
    for i, unit in enumerate(case.units):
        for t in range(nt):
            w = durations[t] * dt
            u_idx[i, t] = model.add_var(f"u_{i}_{t + 1}", 0.0, 1.0,
                                        integer=not relaxed,
                                        obj=unit.cost_noload * w)
            p_idx[i, t] = model.add_var(f"p_{i}_{t + 1}", 0.0, unit.p_max,
                                        obj=unit.cost_linear * w)
            s_idx[i, t] = model.add_var(f"s_{i}_{t + 1}", 0.0, 1.0,
                                        integer=not relaxed,
                                        obj=unit.cost_startup)

    ramps = [[ramp_params(unit, durations[t - 1] if t else 1, durations[t], dt)
              for t in range(nt)] for unit in case.units]

    for t in range(nt):
        st = stats[t]
        model.add_constr({int(p_idx[i, t]): 1.0 for i in range(ng)},
                         EQ, st.avg_sys, f"bal_{t + 1}")
        model.add_constr({int(u_idx[i, t]): case.units[i].p_max for i in range(ng)},
                         GE, (1.0 + config.reserve_up_ratio) * st.max_sys,
                         f"resup_{t + 1}")
        model.add_constr({int(u_idx[i, t]): case.units[i].p_min for i in range(ng)},
                         LE, (1.0 - config.reserve_down_ratio) * st.min_sys,
                         f"resdn_{t + 1}")
        model.add_constr({int(u_idx[i, t]): case.units[i].ramp_up * dt for i in range(ng)},
                         GE, st.max_step_up, f"rru_{t + 1}")
        model.add_constr({int(u_idx[i, t]): case.units[i].ramp_down * dt for i in range(ng)},
                         GE, st.max_step_down, f"rrd_{t + 1}")

    if config.network_enabled:
        for line in case.monitored_lines:
            row = ptdf.values[line.id]
            unit_coef = row[case.unit_buses]
            for t in range(nt):
                base = float(row @ stats[t].avg_bus)
                coeffs = {int(p_idx[i, t]): unit_coef[i]
                          for i in range(ng) if unit_coef[i] != 0.0}
                model.add_constr(coeffs, LE, line.rating + base,
                                 f"netp_l{line.id}_{t + 1}")
                model.add_constr(coeffs, GE, -line.rating + base,
                                 f"netn_l{line.id}_{t + 1}")

    for i, unit in enumerate(case.units):
        u0 = 1.0 if unit.init_status else 0.0
        p0 = unit.init_power
        for t in range(nt):
            ui, pi, si = int(u_idx[i, t]), int(p_idx[i, t]), int(s_idx[i, t])
            rp = ramps[i][t]
            model.add_constr({pi: 1.0, ui: -unit.p_max}, LE, 0.0,
                             f"pmax_{i}_{t + 1}")
            model.add_constr({pi: 1.0, ui: -unit.p_min}, GE, 0.0,
                             f"pmin_{i}_{t + 1}")
            if t == 0:
                # anchored to the initial point: d_prev = 1, sd_prev = p_min
                model.add_constr({pi: 1.0, ui: unit.p_max - rp.su},
                                 LE, unit.p_max + p0 + (rp.ru - rp.su) * u0,
                                 f"rup_{i}_1")
                model.add_constr({pi: -1.0, ui: unit.p_min - rp.rd},
                                 LE, unit.p_max - p0 - (unit.p_max - unit.p_min) * u0,
                                 f"rdn_{i}_1")
                model.add_constr({si: 1.0, ui: -1.0}, GE, -u0, f"sup_{i}_1")
            else:
                up, pp = int(u_idx[i, t - 1]), int(p_idx[i, t - 1])
                sd_prev = ramps[i][t - 1].sd
                model.add_constr({pi: 1.0, pp: -1.0,
                                  up: rp.su - rp.ru, ui: unit.p_max - rp.su},
                                 LE, unit.p_max, f"rup_{i}_{t + 1}")
                model.add_constr({pp: 1.0, pi: -1.0,
                                  ui: sd_prev - rp.rd, up: unit.p_max - sd_prev},
                                 LE, unit.p_max, f"rdn_{i}_{t + 1}")
                model.add_constr({si: 1.0, ui: -1.0, up: 1.0}, GE, 0.0,
                                 f"sup_{i}_{t + 1}")

        # minimum up/down windows mapped through the adaptive durations
        for t in range(1, nt + 1):
            k_up = min_time_horizon(t, unit.min_up, durations, dt)
            k_dn = min_time_horizon(t, unit.min_down, durations, dt)
            if t == 1:
                for k in range(2, k_up + 1):
                    model.add_constr({int(u_idx[i, k - 1]): 1.0,
                                      int(u_idx[i, 0]): -1.0}, GE, -u0,
                                     f"mup_{i}_1_{k}")
                for k in range(2, k_dn + 1):
                    model.add_constr({int(u_idx[i, k - 1]): 1.0,
                                      int(u_idx[i, 0]): -1.0}, LE, 1.0 - u0,
                                     f"mdn_{i}_1_{k}")
            else:
                for k in range(t + 1, k_up + 1):
                    model.add_constr({int(u_idx[i, k - 1]): 1.0,
                                      int(u_idx[i, t - 1]): -1.0,
                                      int(u_idx[i, t - 2]): 1.0}, GE, 0.0,
                                     f"mup_{i}_{t}_{k}")
                for k in range(t + 1, k_dn + 1):
                    model.add_constr({int(u_idx[i, k - 1]): 1.0,
                                      int(u_idx[i, t - 1]): -1.0,
                                      int(u_idx[i, t - 2]): 1.0}, LE, 1.0,
                                     f"mdn_{i}_{t}_{k}")

        # initial-condition carryover of the minimum times
        if unit.init_status and unit.init_duration < unit.min_up:
            k_end = min_time_horizon(1, unit.min_up - unit.init_duration,
                                     durations, dt)
            for k in range(1, k_end + 1):
                model.set_bounds(int(u_idx[i, k - 1]), lo=1.0)
        if not unit.init_status and unit.init_duration < unit.min_down:
            k_end = min_time_horizon(1, unit.min_down - unit.init_duration,
                                     durations, dt)
            for k in range(1, k_end + 1):
                model.set_bounds(int(u_idx[i, k - 1]), hi=0.0)

    return ModelHandle(model, u_idx, p_idx, s_idx, partition, stats, durations)


def extract_solution(handle: ModelHandle, sol: MilpSolution) -> UcSolution:
    if sol.values is None:
        raise FlexucError("uc.no_solution", f"solver returned status {sol.status}")
    u = np.round(sol.values[handle.u_idx]).astype(np.int8)
    p = sol.values[handle.p_idx]
    s = np.round(sol.values[handle.s_idx]).astype(np.int8)
    return UcSolution(u, p, s, float(sol.objective), sol.status, handle.partition)
