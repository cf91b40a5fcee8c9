"""Congestion-aware determination of the flexible temporal resolution.

The horizon is cut into T contiguous adaptive periods by minimizing, over
all partitions, the summed impact that within-window demand variation
puts on the committed units.  The impact metric couples the plain demand
swing with congestion terms derived from a two-variable power-output
variation model; candidate congested lines come from a relaxed LP of the
full-resolution commitment problem.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import milpcore, ucbuilder
from .demand import DemandSeries, Partition, WindowStats, window_stats
from .errors import FlexucError
from .powersys import (PTDF_EPSILON, NetworkCase, PtdfMatrix, UnitSplit,
                       classify_units, compute_ptdf)

THETA_DEFAULT = 0.95   # flag a line when |flow| reaches this share of its rating


@dataclass(frozen=True)
class CongestionCandidates:
    """Per original period: the (line, direction) pairs near their rating.

    direction is +1 when the flagged flow runs from_bus -> to_bus, -1
    otherwise; the impact metric orients the PTDF row with it.
    """

    per_period: tuple   # tuple of frozensets of (line, direction)

    @property
    def t0(self) -> int:
        return len(self.per_period)

    def window_union(self, ts: int, tf: int) -> frozenset:
        out = set()
        for tau in range(ts, tf + 1):
            out |= self.per_period[tau - 1]
        return frozenset(out)

    @property
    def all_pairs(self) -> frozenset:
        return self.window_union(1, self.t0) if self.per_period else frozenset()

    def first_flagged(self, line: int) -> int | None:
        for tau, flags in enumerate(self.per_period, start=1):
            if any(l == line for l, _ in flags):
                return tau
        return None

    @classmethod
    def empty(cls, t0: int) -> "CongestionCandidates":
        return cls(tuple(frozenset() for _ in range(t0)))


def estimate_congestion(case: NetworkCase, demand: DemandSeries,
                        theta: float = THETA_DEFAULT, gap: float = 1e-4,
                        ptdf: PtdfMatrix | None = None,
                        engine: str = "auto",
                        time_limit: float | None = None) -> CongestionCandidates:
    """Flag lines whose relaxed-LP flow reaches theta times their rating.

    The relaxation keeps every commitment constraint but makes the integer
    variables continuous and drops the network constraints; flows are then
    recovered from the dispatch with the PTDF matrix.
    """
    if not (0.0 < theta <= 1.0):
        raise FlexucError("resolution.theta", "theta must lie in (0, 1]")
    if ptdf is None:
        ptdf = compute_ptdf(case)
    handle = ucbuilder.build_relaxed_ncuc(case, demand)
    sol = milpcore.solve_lp(handle.model, engine=engine, time_limit=time_limit)
    if sol.status != milpcore.OPTIMAL:
        raise FlexucError("resolution.relaxation_infeasible",
                          f"relaxed commitment LP ended with status {sol.status}")
    t0 = demand.t0
    p = sol.values[handle.p_idx]               # N_G x T0
    inj = np.zeros((t0, case.n_buses))
    np.add.at(inj.T, case.unit_buses, p)
    inj -= demand.values
    flows = inj @ ptdf.values.T                # T0 x N_L
    per_period = []
    monitored = [(l.id, l.rating) for l in case.lines if l.monitored]
    for tau in range(t0):
        flags = set()
        for lid, rating in monitored:
            f = flows[tau, lid]
            if abs(f) >= theta * rating:
                flags.add((lid, 1 if f >= 0 else -1))
        per_period.append(frozenset(flags))
    return CongestionCandidates(tuple(per_period))


def build_unit_splits(case: NetworkCase, ptdf: PtdfMatrix,
                      candidates: CongestionCandidates,
                      epsilon: float = PTDF_EPSILON) -> dict:
    """One UnitSplit per (line, direction) pair appearing anywhere."""
    return {
        (line, direction): classify_units(ptdf, case.units, line, epsilon, direction)
        for line, direction in candidates.all_pairs
    }


def impact_lambda(window: tuple[int, int], stats: WindowStats,
                  demand: DemandSeries,
                  candidates: CongestionCandidates | None = None,
                  splits: dict | None = None,
                  ptdf: PtdfMatrix | None = None) -> float:
    """Impact of within-window demand variation on the committed units.

    With no candidate congestion the metric is the demand swing over the
    window maximum.  Each candidate line adds load-following requirements
    for its G+/G- unit sets, scaled to system level by their range shares;
    a one-sided line makes the window untenable (+inf), which forces the
    partition optimizer to split it.
    """
    ts, tf = window
    max_d = max(stats.max_sys, 0.0)
    if max_d <= 0.0:
        return 0.0
    numer = stats.max_sys - stats.min_sys
    pairs = candidates.window_union(ts, tf) if candidates is not None else frozenset()
    if pairs and tf > ts:
        sysd = demand.system[ts - 1:tf]
        bus = demand.values[ts - 1:tf]
        for line, direction in sorted(pairs):
            split = splits[(line, direction)]
            if split.one_sided:
                return math.inf
            row = ptdf.row(line, direction)
            flow_part = bus @ row
            denom = split.t_plus - split.t_minus
            best_p = best_m = -math.inf
            n = tf - ts + 1
            for b in range(1, n):
                for a in range(b):
                    dd = sysd[b] - sysd[a]
                    dpf = -(flow_part[b] - flow_part[a])
                    best_p = max(best_p, (split.t_minus * dd + dpf) / denom)
                    best_m = max(best_m, (split.t_plus * dd + dpf) / denom)
            numer = max(numer,
                        max(best_p, 0.0) / split.eta_plus,
                        max(best_m, 0.0) / split.eta_minus)
    return numer / max_d


class ImpactTable:
    """lambda(tau_S, tau_F) for all windows, built one start-row at a time."""

    def __init__(self, t0: int, row_builder):
        self.t0 = t0
        self._row_builder = row_builder
        self._rows: dict[int, np.ndarray] = {}

    def row(self, ts: int) -> np.ndarray:
        """Values lambda(ts, f) for f = ts..T0 as a vector."""
        r = self._rows.get(ts)
        if r is None:
            r = np.asarray(self._row_builder(ts), dtype=float)
            self._rows[ts] = r
        return r

    def value(self, ts: int, tf: int) -> float:
        if not (1 <= ts <= tf <= self.t0):
            raise FlexucError("window.range", f"window [{ts}, {tf}] outside [1, {self.t0}]")
        return float(self.row(ts)[tf - ts])

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "ImpactTable":
        a = np.asarray(arr, dtype=float)
        t0 = a.shape[0]
        return cls(t0, lambda ts: a[ts - 1, ts - 1:])

    @classmethod
    def from_function(cls, t0: int, fn) -> "ImpactTable":
        return cls(t0, lambda ts: np.array([fn(ts, tf) for tf in range(ts, t0 + 1)]))


def demand_only_table(demand: DemandSeries) -> ImpactTable:
    """The congestion-free metric: (max - min) / max per window."""
    sysd = demand.system

    def build_row(ts):
        tail = sysd[ts - 1:]
        runmax = np.maximum.accumulate(tail)
        runmin = np.minimum.accumulate(tail)
        with np.errstate(invalid="ignore", divide="ignore"):
            lam = np.where(runmax > 0, (runmax - runmin) / runmax, 0.0)
        return lam

    return ImpactTable(demand.t0, build_row)


def build_impact_table(case: NetworkCase, demand: DemandSeries,
                       candidates: CongestionCandidates,
                       ptdf: PtdfMatrix | None = None,
                       splits: dict | None = None,
                       epsilon: float = PTDF_EPSILON) -> ImpactTable:
    """Vectorized lambda table including the congestion terms.

    For fixed tau_S the pairwise maxima telescope: with
    g(tau) = T_opposite * D(tau) - sum_j T_j D_j(tau), the best ordered
    pair ending at tau_f is g(tau_f) - min_{tau_s < tau_f} g(tau_s), so a
    whole start-row costs O(T0) per candidate line.
    """
    if ptdf is None:
        ptdf = compute_ptdf(case)
    if splits is None:
        splits = build_unit_splits(case, ptdf, candidates, epsilon)
    t0 = demand.t0
    sysd = demand.system

    pair_data = []
    for (line, direction), split in sorted(splits.items()):
        flagged = np.zeros(t0, dtype=bool)
        for tau in range(t0):
            if (line, direction) in candidates.per_period[tau]:
                flagged[tau] = True
        if not flagged.any():
            continue
        if split.one_sided:
            pair_data.append((flagged, None))
            continue
        flow_part = demand.values @ ptdf.row(line, direction)
        g_plus = split.t_minus * sysd - flow_part
        g_minus = split.t_plus * sysd - flow_part
        denom = split.t_plus - split.t_minus
        pair_data.append((flagged, (g_plus, g_minus, denom,
                                    split.eta_plus, split.eta_minus)))

    def build_row(ts):
        tail = sysd[ts - 1:]
        runmax = np.maximum.accumulate(tail)
        runmin = np.minimum.accumulate(tail)
        numer = runmax - runmin
        n = len(tail)
        for flagged, data in pair_data:
            member = np.cumsum(flagged[ts - 1:]) > 0
            if not member.any():
                continue
            if data is None:
                numer = np.where(member, math.inf, numer)
                continue
            g_p, g_m, denom, eta_p, eta_m = data
            contrib = np.zeros(n)
            for g, eta in ((g_p[ts - 1:], eta_p), (g_m[ts - 1:], eta_m)):
                if n > 1:
                    runmin_g = np.minimum.accumulate(g)
                    diff = np.full(n, -math.inf)
                    diff[1:] = g[1:] - runmin_g[:-1]
                    best = np.maximum.accumulate(diff) / denom
                    contrib = np.maximum(contrib, np.maximum(best, 0.0) / eta)
            numer = np.maximum(numer, np.where(member, contrib, -math.inf))
        with np.errstate(invalid="ignore", divide="ignore"):
            lam = np.where(runmax > 0, numer / runmax, 0.0)
        return lam

    return ImpactTable(t0, build_row)


def optimize_partition(t0: int, periods: int, impacts: ImpactTable) -> Partition:
    """Exact DP minimizing the summed window impact.

    Ties break toward the lexicographically smallest starts vector; the
    attained objective is attached to the returned partition.
    """
    if not (1 <= periods <= t0):
        raise FlexucError("partition.too_many",
                          f"cannot form {periods} adaptive periods from {t0} originals")
    # cost_to_go[t][s]: best cost covering [s, t0] with windows t..periods
    ctg = np.full((periods + 2, t0 + 2), math.inf)
    for s in range(periods, t0 + 1):
        ctg[periods][s] = impacts.value(s, t0)
    for t in range(periods - 1, 0, -1):
        for s in range(t, t0 - (periods - t) + 1):
            emax = t0 - (periods - t)
            lam = impacts.row(s)[:emax - s + 1]
            cand = lam + ctg[t + 1][s + 1:emax + 2]
            ctg[t][s] = float(np.min(cand))
    starts = [1]
    s = 1
    for t in range(1, periods):
        emax = t0 - (periods - t)
        lam = impacts.row(s)[:emax - s + 1]
        cand = lam + ctg[t + 1][s + 1:emax + 2]
        target = ctg[t][s]
        if math.isinf(target):
            e = s   # forced; keep splitting as early as possible
        else:
            e = s + int(np.flatnonzero(cand == target)[0])
        starts.append(e + 1)
        s = e + 1
    return Partition(tuple(starts), objective=float(ctg[1][1]))


def _even_partition(t0: int, periods: int) -> Partition:
    q, r = divmod(t0, periods)
    durations = [q + 1] * r + [q] * (periods - r)
    starts, s = [], 1
    for d in durations:
        starts.append(s)
        s += d
    return Partition(tuple(starts), objective=None)


def _ward_partition(demand: DemandSeries, t0: int, periods: int) -> Partition:
    """Contiguity-constrained Ward clustering of the system demand.

    Solved exactly: DP over segmentations minimizing the within-window sum
    of squared deviations.  Ties prefer the most even durations, then the
    longest-window-first arrangement, so degenerate inputs (constant
    demand) reproduce the even partition.
    """
    sysd = demand.system
    pre1 = np.concatenate([[0.0], np.cumsum(sysd)])
    pre2 = np.concatenate([[0.0], np.cumsum(sysd ** 2)])

    def ssq(s, e):
        n = e - s + 1
        tot = pre1[e] - pre1[s - 1]
        v = (pre2[e] - pre2[s - 1]) - tot * tot / n
        return 0.0 if v < 1e-9 * (1.0 + pre2[e]) else v

    ctg1 = np.full((periods + 2, t0 + 2), math.inf)   # primary: SSQ
    ctg2 = np.full((periods + 2, t0 + 2), math.inf)   # secondary: sum d^2
    for s in range(periods, t0 + 1):
        ctg1[periods][s] = ssq(s, t0)
        ctg2[periods][s] = (t0 - s + 1) ** 2
    for t in range(periods - 1, 0, -1):
        for s in range(t, t0 - (periods - t) + 1):
            emax = t0 - (periods - t)
            best1, best2 = math.inf, math.inf
            for e in range(s, emax + 1):
                c1 = ssq(s, e) + ctg1[t + 1][e + 1]
                c2 = (e - s + 1) ** 2 + ctg2[t + 1][e + 1]
                if c1 < best1 - 0.0 or (c1 == best1 and c2 < best2):
                    best1, best2 = c1, c2
            ctg1[t][s], ctg2[t][s] = best1, best2
    starts = [1]
    s = 1
    for t in range(1, periods):
        emax = t0 - (periods - t)
        pick = s
        for e in range(s, emax + 1):   # largest optimal window first
            c1 = ssq(s, e) + ctg1[t + 1][e + 1]
            c2 = (e - s + 1) ** 2 + ctg2[t + 1][e + 1]
            if c1 == ctg1[t][s] and c2 == ctg2[t][s]:
                pick = e
        starts.append(pick + 1)
        s = pick + 1
    return Partition(tuple(starts), objective=float(ctg1[1][1]))


def baseline_partition(method: str, demand: DemandSeries,
                       t0: int, periods: int) -> Partition:
    """The comparison aggregators: demand-only DP, Ward clustering, even merge."""
    if not (1 <= periods <= t0):
        raise FlexucError("partition.too_many",
                          f"cannot form {periods} adaptive periods from {t0} originals")
    if method == "demand_only":
        return optimize_partition(t0, periods, demand_only_table(demand))
    if method == "ward":
        return _ward_partition(demand, t0, periods)
    if method == "even":
        return _even_partition(t0, periods)
    raise FlexucError("resolution.method", f"unknown baseline method {method!r}")
