"""Regenerate the bundled fixture files.

Run from the repo root:  python3 tools/gen_fixtures.py [--check]

The six-bus case's congested-line rating is derived from the relaxed
dispatch flows so that only the evening peak trips the 0.95 threshold;
--check replays the acceptance-critical behaviours and prints them.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from flexuc import milpcore, resolution, ucbuilder  # noqa: E402
from flexuc.bench import BenchConfig, bench  # noqa: E402
from flexuc.caseio import load_case, write_demand_csv  # noqa: E402
from flexuc.demand import DemandSeries  # noqa: E402
from flexuc.powersys import compute_ptdf  # noqa: E402

FIXDIR = ROOT / "src" / "flexuc" / "fixtures"

# anchor points (hour, share of peak): realistic jagged daily curve with a
# flat evening peak; the dynamic program should isolate the steep segments
SIX_BUS_SHAPE = [
    (0.0, 0.545), (1.0, 0.52), (2.5, 0.47), (4.0, 0.455), (5.5, 0.46),
    (6.25, 0.50), (7.0, 0.62), (8.0, 0.755), (8.75, 0.79), (10.0, 0.80),
    (11.5, 0.795), (12.25, 0.745), (13.5, 0.74), (14.5, 0.775), (15.5, 0.78),
    (16.5, 0.825), (17.25, 0.92), (17.75, 0.985), (18.25, 1.0), (19.5, 0.995),
    (20.0, 0.95), (20.75, 0.86), (21.5, 0.80), (22.25, 0.69), (23.0, 0.62),
    (24.0, 0.56),
]
SIX_BUS_PEAK = 980.0   # MW, about 61% of the 1600 MW installed capacity
SIX_BUS_JITTER = 0.002
SIX_BUS_SWING = 0.09   # bus 2 <-> bus 5 share shift across the evening peak
SIX_BUS_SEED = 42

SIX_BUS_UNITS = [
    # id bus pmin pmax  ru   rd  tu td clin  cnl  csu   status p0  hours
    # initial outputs of the three online units are filled in from the
    # first-period demand so the initial state is self-consistent
    (0, 0, 100, 400, 150, 150, 4, 4, 18.0, 400, 4000, "on", None, 24),
    (1, 0, 80, 300, 120, 120, 4, 4, 20.5, 300, 3000, "on", None, 24),
    (2, 1, 60, 250, 120, 120, 3, 3, 24.0, 250, 2500, "on", None, 24),
    (3, 3, 50, 200, 100, 100, 2, 2, 27.0, 200, 2000, "off", 0, 24),
    (4, 1, 40, 150, 90, 90, 2, 2, 32.0, 150, 1200, "off", 0, 24),
    (5, 2, 30, 120, 80, 80, 1, 1, 38.0, 120, 800, "off", 0, 24),
    (6, 4, 25, 100, 80, 80, 1, 1, 43.0, 100, 600, "off", 0, 24),
    (7, 5, 20, 80, 70, 70, 1, 1, 50.0, 80, 400, "off", 0, 24),
]

SIX_BUS_LINES = [
    # id from to reactance (ratings filled from the relaxed flows)
    (0, 0, 1, 0.10),
    (1, 1, 2, 0.15),
    (2, 0, 3, 0.12),
    (3, 3, 4, 0.10),
    (4, 4, 5, 0.20),
    (5, 2, 5, 0.15),
    (6, 1, 4, 0.25),
]
CONGESTED_LINE = 1     # 1-2 feeds the heavy bus-2 load from the gen cluster


def six_bus_demand() -> DemandSeries:
    t0, dt = 96, 0.25
    hours = np.arange(t0) * dt
    xs = np.array([p[0] for p in SIX_BUS_SHAPE])
    ys = np.array([p[1] for p in SIX_BUS_SHAPE])
    shape = np.interp(hours, xs, ys)
    rng = np.random.RandomState(SIX_BUS_SEED)
    shape = shape + rng.uniform(-SIX_BUS_JITTER, SIX_BUS_JITTER, t0)
    sysd = SIX_BUS_PEAK * shape / shape.max()

    # bus shares; buses 2 and 5 trade share across the evening peak so the
    # system stays flat while flows keep moving (the congestion signal)
    base = {0: 0.0, 1: 0.12, 2: 0.34, 3: 0.06, 4: 0.28, 5: 0.20}
    swing = SIX_BUS_SWING * np.exp(-0.5 * ((hours - 18.9) / 1.1) ** 2)
    shares = np.zeros((t0, 6))
    for j, w in base.items():
        shares[:, j] = w
    shares[:, 5] += swing
    shares[:, 2] -= swing
    shares /= shares.sum(axis=1, keepdims=True)
    return DemandSeries(sysd[:, None] * shares, dt)


def six_bus_units(first_period_demand: float):
    weights = np.array([400.0, 300.0, 250.0])
    p0 = first_period_demand * weights / weights.sum()
    rows = []
    for k, u in enumerate(SIX_BUS_UNITS):
        row = list(u)
        if row[12] is None:
            row[12] = round(float(p0[k]), 1)
        rows.append(tuple(row))
    return rows


def write_case(path, name, ref, buses, lines, units):
    out = [f"flexuc-case v1", f"name {name}", f"reference_bus {ref}"]
    for b, bname in buses:
        out.append(f"bus {b} {bname}")
    for lid, fr, to, x, rating in lines:
        out.append(f"line {lid} {fr} {to} {x:g} {rating:g}")
    for u in units:
        out.append("unit " + " ".join(str(v) for v in u))
    Path(path).write_text("\n".join(out) + "\n")


def gen_six_bus():
    demand = six_bus_demand()
    # unconstrained-network relaxation sets the rating of the engineered line
    from flexuc.powersys import Bus, Line, NetworkCase, ThermalUnit
    buses = tuple(Bus(i, f"b{i}") for i in range(6))
    lines = tuple(Line(lid, fr, to, x, 0.0) for lid, fr, to, x in SIX_BUS_LINES)
    units = tuple(ThermalUnit(u[0], u[1], *[float(v) for v in u[2:8]],
                              float(u[8]), float(u[9]), float(u[10]),
                              u[11] == "on", float(u[12]), float(u[13]))
                  for u in SIX_BUS_UNITS)
    case = NetworkCase(buses, lines, units, reference_bus=0, name="six_bus")
    ptdf = compute_ptdf(case)
    handle = ucbuilder.build_relaxed_ncuc(case, demand)
    sol = milpcore.solve_lp(handle.model, engine="highs")
    p = sol.values[handle.p_idx]
    inj = np.zeros((demand.t0, 6))
    np.add.at(inj.T, case.unit_buses, p)
    inj -= demand.values
    flows = inj @ ptdf.values.T
    peak_abs = np.abs(flows).max(axis=0)
    print("relaxed |flow| maxima per line:", np.round(peak_abs, 1))

    ratings = []
    for lid, fr, to, x in SIX_BUS_LINES:
        if lid == CONGESTED_LINE:
            ratings.append(round(peak_abs[lid] / 0.97))
        else:
            ratings.append(round(1.45 * peak_abs[lid] + 10))
    print("ratings:", ratings)
    line_rows = [(lid, fr, to, x, ratings[lid]) for lid, fr, to, x in SIX_BUS_LINES]
    write_case(FIXDIR / "six_bus.case", "six_bus", 0,
               [(i, f"b{i}") for i in range(6)], line_rows, SIX_BUS_UNITS)
    write_demand_csv(FIXDIR / "six_bus.demand.csv", demand,
                     [str(j) for j in range(6)])


def gen_two_bus():
    units = [
        (0, 0, 60, 300, 150, 150, 2, 2, 20.0, 200, 1500, "on", 150, 24),
        (1, 1, 20, 100, 100, 100, 1, 1, 45.0, 80, 500, "off", 0, 24),
    ]
    lines = [(0, 0, 1, 0.1, 220.0)]
    write_case(FIXDIR / "two_bus.case", "two_bus", 0,
               [(0, "gen"), (1, "load")], lines, units)
    prof = np.array([130, 125, 120, 125, 140, 170, 205, 240, 250, 235, 190, 150],
                    dtype=float)
    values = np.column_stack([0.1 * prof, 0.9 * prof])
    write_demand_csv(FIXDIR / "two_bus.demand.csv", DemandSeries(values, 1.0),
                     ["0", "1"])


def gen_tight():
    units = [
        (0, 0, 80, 400, 300, 300, 1, 1, 20.0, 200, 1000, "on", 150, 24),
        (1, 1, 10, 80, 200, 200, 1, 1, 60.0, 80, 300, "off", 0, 24),
    ]
    lines = [(0, 0, 1, 0.1, 200.0)]
    write_case(FIXDIR / "tight.case", "tight", 0,
               [(0, "gen"), (1, "load")], lines, units)
    bus1 = np.array([140, 160, 180, 250, 240, 180, 150, 140], dtype=float)
    values = np.column_stack([np.full(8, 20.0), bus1])
    write_demand_csv(FIXDIR / "tight.demand.csv", DemandSeries(values, 1.0),
                     ["0", "1"])


def check():
    case, demand = load_case(FIXDIR / "six_bus.case", FIXDIR / "six_bus.demand.csv")
    cfg = BenchConfig()
    cands = resolution.estimate_congestion(case, demand, theta=cfg.theta)
    flagged = [(t + 1, sorted(c)) for t, c in enumerate(cands.per_period) if c]
    print("flagged periods:", flagged)
    ptdf = compute_ptdf(case)
    table = resolution.build_impact_table(case, demand, cands, ptdf=ptdf)
    t_n = 38
    m1 = resolution.optimize_partition(demand.t0, t_n, table)
    m2 = resolution.baseline_partition("demand_only", demand, demand.t0, t_n)
    print("M1 starts:", m1.starts)
    print("M2 starts:", m2.starts)
    tau_c = min(t for t, _ in flagged) if flagged else None
    print("onset period:", tau_c)
    if tau_c:
        w2 = [w for w in m2.windows(demand.t0) if w[0] <= tau_c <= w[1]][0]
        inside = [s for s in m1.starts if w2[0] < s <= w2[1]]
        print(f"M2 window around onset: {w2}; M1 boundaries inside: {inside}")
    rep = bench(case, demand, ["M1", "M4", "BM"], t_n, cfg)
    for r in rep.runs:
        print(f"{r.method}: cost={r.cost:.0f} var={r.cost_variation_pct:.4f}% "
              f"acc={r.acceleration:.2f} corr={r.corrections} "
              f"t_res={r.time_resolution:.2f} t_milp={r.time_milp:.2f} "
              f"t_total={r.time_total:.2f} bins={r.binaries}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--check", action="store_true")
    args = ap.parse_args()
    FIXDIR.mkdir(parents=True, exist_ok=True)
    gen_six_bus()
    gen_two_bus()
    gen_tight()
    print("fixtures written to", FIXDIR)
    if args.check:
        check()


if __name__ == "__main__":
    main()
