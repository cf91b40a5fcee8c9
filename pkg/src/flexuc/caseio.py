"""Case and demand file ingestion.

Two network formats are accepted: the native keyword-led text format
(versioned `flexuc-case v1` header) and a MATPOWER .m subset (bus, branch
and gen tables) paired with a sidecar unit-parameter file for the fields
MATPOWER lacks.  Demand is a delimited table whose header names the bus
ids, one row per original period.  External ids may be arbitrary; they
are remapped to dense 0-based indices at ingestion.
"""

import csv
import math
import re
from pathlib import Path

import numpy as np

from .demand import DemandSeries
from .errors import FlexucError
from .powersys import Bus, Line, NetworkCase, ThermalUnit, validate_case

CASE_MAGIC = "flexuc-case"
DEMAND_MAGIC = "flexuc-demand"
UNITS_MAGIC = "flexuc-units"


def _fail(path, ln, msg):
    raise FlexucError("ingest.parse", f"{path}:{ln}: {msg}")


def _fnum(path, ln, token, what):
    try:
        return float(token)
    except ValueError:
        _fail(path, ln, f"bad {what}: {token!r}")


def parse_case_text(path) -> tuple[NetworkCase, dict]:
    path = Path(path)
    raw_buses = []        # (raw_id, name)
    raw_lines = []        # (raw_id, from_raw, to_raw, x, rating)
    raw_units = []
    name = path.stem
    reference_raw = None
    version_seen = False
    with open(path) as fh:
        for ln, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tok = line.split()
            if not version_seen:
                if tok[0] != CASE_MAGIC:
                    _fail(path, ln, f"expected '{CASE_MAGIC} v1' header, got {tok[0]!r}")
                if len(tok) < 2 or tok[1] != "v1":
                    _fail(path, ln, f"unsupported case version {tok[1] if len(tok) > 1 else '?'}")
                version_seen = True
                continue
            kind = tok[0]
            if kind == "name":
                name = tok[1] if len(tok) > 1 else name
            elif kind == "reference_bus":
                if len(tok) != 2:
                    _fail(path, ln, "reference_bus takes one id")
                reference_raw = tok[1]
            elif kind == "bus":
                if len(tok) < 2:
                    _fail(path, ln, "bus needs an id")
                raw_buses.append((tok[1], tok[2] if len(tok) > 2 else tok[1], ln))
            elif kind == "line":
                if len(tok) != 6:
                    _fail(path, ln, "line needs: id from to reactance rating")
                raw_lines.append((tok[1], tok[2], tok[3],
                                  _fnum(path, ln, tok[4], "reactance"),
                                  _fnum(path, ln, tok[5], "rating"), ln))
            elif kind == "unit":
                if len(tok) != 15:
                    _fail(path, ln, "unit needs 14 fields: id bus p_min p_max ramp_up "
                                    "ramp_down min_up min_down cost_linear cost_noload "
                                    "cost_startup init_status init_power init_hours")
                raw_units.append((tok, ln))
            else:
                _fail(path, ln, f"unknown record {kind!r}")
    if not version_seen:
        _fail(path, 1, "empty case file")
    if not raw_buses:
        _fail(path, 1, "case has no buses")

    bus_map = {}
    buses = []
    for k, (rid, bname, ln) in enumerate(raw_buses):
        if rid in bus_map:
            _fail(path, ln, f"duplicate bus id {rid}")
        bus_map[rid] = k
        buses.append(Bus(k, bname))

    def bus_of(rid, ln):
        if rid not in bus_map:
            raise FlexucError("ingest.unknown_bus", f"{path}:{ln}: unknown bus id {rid!r}")
        return bus_map[rid]

    lines = []
    for k, (rid, fr, to, x, rating, ln) in enumerate(raw_lines):
        lines.append(Line(k, bus_of(fr, ln), bus_of(to, ln), x, rating))
    units = []
    for k, (tok, ln) in enumerate(raw_units):
        status = tok[12].lower()
        if status not in ("on", "off"):
            _fail(path, ln, f"init_status must be on/off, got {tok[12]!r}")
        units.append(ThermalUnit(
            id=k, bus=bus_of(tok[2], ln),
            p_min=_fnum(path, ln, tok[3], "p_min"),
            p_max=_fnum(path, ln, tok[4], "p_max"),
            ramp_up=_fnum(path, ln, tok[5], "ramp_up"),
            ramp_down=_fnum(path, ln, tok[6], "ramp_down"),
            min_up=_fnum(path, ln, tok[7], "min_up"),
            min_down=_fnum(path, ln, tok[8], "min_down"),
            cost_linear=_fnum(path, ln, tok[9], "cost_linear"),
            cost_noload=_fnum(path, ln, tok[10], "cost_noload"),
            cost_startup=_fnum(path, ln, tok[11], "cost_startup"),
            init_status=status == "on",
            init_power=_fnum(path, ln, tok[13], "init_power"),
            init_duration=_fnum(path, ln, tok[14], "init_hours"),
        ))
    ref = 0 if reference_raw is None else bus_of(reference_raw, 0)
    case = NetworkCase(tuple(buses), tuple(lines), tuple(units), ref, name)
    _raise_if_invalid(case)
    return case, bus_map


def _raise_if_invalid(case):
    violations = validate_case(case)
    if violations:
        raise FlexucError("case.invalid",
                          "; ".join(str(v) for v in violations[:8])
                          + (f" (+{len(violations) - 8} more)" if len(violations) > 8 else ""))


def parse_demand_csv(path, bus_map, n_buses, step_hours=None) -> DemandSeries:
    path = Path(path)
    header_step = None
    rows = []
    header = None
    with open(path) as fh:
        for ln, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                m = re.search(rf"{DEMAND_MAGIC}\s+v1\s+step_hours\s*=\s*([0-9.eE+-]+)", line)
                if m:
                    header_step = float(m.group(1))
                continue
            cells = [c.strip() for c in line.split(",")]
            if header is None:
                header = cells
                continue
            if len(cells) != len(header):
                _fail(path, ln, f"expected {len(header)} columns, got {len(cells)}")
            rows.append(([_fnum(path, ln, c, "demand value") for c in cells], ln))
    if header is None or not rows:
        _fail(path, 1, "demand file needs a header row and at least one data row")
    cols = []
    for cid in header:
        if cid not in bus_map:
            raise FlexucError("ingest.unknown_bus",
                              f"{path}: demand column {cid!r} is not a bus in the case")
        cols.append(bus_map[cid])
    step = step_hours if step_hours is not None else header_step
    if step is None:
        raise FlexucError("ingest.parse",
                          f"{path}: no step_hours metadata; add a "
                          f"'# {DEMAND_MAGIC} v1 step_hours=...' line or pass it explicitly")
    values = np.zeros((len(rows), n_buses))
    for r, (vals, _ln) in enumerate(rows):
        for c, j in enumerate(cols):
            values[r, j] = vals[c]
    return DemandSeries(values, step)


# -- MATPOWER subset -------------------------------------------------------

def _matpower_table(text, name, path):
    m = re.search(rf"mpc\.{name}\s*=\s*\[(.*?)\];", text, re.S)
    if not m:
        raise FlexucError("ingest.parse", f"{path}: mpc.{name} table not found")
    rows = []
    for chunk in m.group(1).split(";"):
        chunk = chunk.split("%", 1)[0].strip()
        if not chunk:
            continue
        rows.append([float(v) for v in chunk.split()])
    return rows


def parse_matpower(path, units_path) -> tuple:
    """Read a MATPOWER case plus the sidecar unit-parameter file.

    Uses bus ids and Pd from mpc.bus, reactance/rateA from mpc.branch and
    Pmin/Pmax/bus from mpc.gen; everything MATPOWER lacks (ramps, minimum
    times, costs, initial state) comes from the sidecar, keyed by the gen
    row index.
    """
    path = Path(path)
    text = path.read_text()
    bus_rows = _matpower_table(text, "bus", path)
    branch_rows = _matpower_table(text, "branch", path)
    gen_rows = _matpower_table(text, "gen", path)

    bus_map = {}
    buses = []
    pd = []
    ref = 0
    for k, row in enumerate(bus_rows):
        rid = str(int(row[0]))
        bus_map[rid] = k
        buses.append(Bus(k, rid))
        pd.append(row[2])
        if int(row[1]) == 3:
            ref = k
    lines = []
    for k, row in enumerate(branch_rows):
        lines.append(Line(k, bus_map[str(int(row[0]))], bus_map[str(int(row[1]))],
                          reactance=row[3], rating=row[5]))

    side = _parse_units_sidecar(units_path)
    units = []
    for k, row in enumerate(gen_rows):
        if k not in side:
            raise FlexucError("ingest.parse",
                              f"{units_path}: missing parameters for generator {k}")
        s = side[k]
        units.append(ThermalUnit(
            id=k, bus=bus_map[str(int(row[0]))],
            p_min=row[9], p_max=row[8],
            ramp_up=s["ramp_up"], ramp_down=s["ramp_down"],
            min_up=s["min_up"], min_down=s["min_down"],
            cost_linear=s["cost_linear"], cost_noload=s["cost_noload"],
            cost_startup=s["cost_startup"], init_status=s["init_status"],
            init_power=s["init_power"], init_duration=s["init_hours"],
        ))
    case = NetworkCase(tuple(buses), tuple(lines), tuple(units), ref, path.stem)
    _raise_if_invalid(case)
    return case, bus_map, np.asarray(pd)


def _parse_units_sidecar(path):
    path = Path(path)
    out = {}
    version_seen = False
    with open(path) as fh:
        for ln, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tok = line.split()
            if not version_seen:
                if tok[0] != UNITS_MAGIC or len(tok) < 2 or tok[1] != "v1":
                    _fail(path, ln, f"expected '{UNITS_MAGIC} v1' header")
                version_seen = True
                continue
            if tok[0] != "unit" or len(tok) != 12:
                _fail(path, ln, "unit needs 11 fields: gen_index ramp_up ramp_down "
                                "min_up min_down cost_linear cost_noload cost_startup "
                                "init_status init_power init_hours")
            status = tok[9].lower()
            if status not in ("on", "off"):
                _fail(path, ln, f"init_status must be on/off, got {tok[9]!r}")
            out[int(tok[1])] = {
                "ramp_up": _fnum(path, ln, tok[2], "ramp_up"),
                "ramp_down": _fnum(path, ln, tok[3], "ramp_down"),
                "min_up": _fnum(path, ln, tok[4], "min_up"),
                "min_down": _fnum(path, ln, tok[5], "min_down"),
                "cost_linear": _fnum(path, ln, tok[6], "cost_linear"),
                "cost_noload": _fnum(path, ln, tok[7], "cost_noload"),
                "cost_startup": _fnum(path, ln, tok[8], "cost_startup"),
                "init_status": status == "on",
                "init_power": _fnum(path, ln, tok[10], "init_power"),
                "init_hours": _fnum(path, ln, tok[11], "init_hours"),
            }
    return out


def load_case(case_path, demand_path=None, units_path=None, step_hours=None):
    """Load and validate a case, plus its demand series when given."""
    case_path = Path(case_path)
    head = ""
    with open(case_path) as fh:
        for raw in fh:
            head = raw.strip()
            if head and not head.startswith("#"):
                break
    if head.startswith(CASE_MAGIC):
        case, bus_map = parse_case_text(case_path)
    elif case_path.suffix == ".m" or "mpc" in head or "function" in head:
        if units_path is None:
            raise FlexucError("ingest.parse",
                              f"{case_path}: MATPOWER import needs a unit sidecar file")
        case, bus_map, _pd = parse_matpower(case_path, units_path)
    else:
        raise FlexucError("ingest.parse", f"{case_path}: unrecognized case format")
    demand = None
    if demand_path is not None:
        demand = parse_demand_csv(demand_path, bus_map, case.n_buses, step_hours)
    return case, demand


def write_demand_csv(path, demand: DemandSeries, bus_ids=None):
    """Emit the demand table in the documented format."""
    ids = bus_ids if bus_ids is not None else [str(j) for j in range(demand.n_buses)]
    with open(path, "w", newline="") as fh:
        fh.write(f"# {DEMAND_MAGIC} v1 step_hours={demand.step_hours:g}\n")
        w = csv.writer(fh)
        w.writerow(ids)
        for row in demand.values:
            w.writerow([f"{v:.4f}" for v in row])


def synthesize_demand(case: NetworkCase, t0: int = 96, step_hours: float = 0.25,
                      peak_fraction: float = 0.6, bus_weights=None,
                      seed: int = 0) -> DemandSeries:
    """Deterministic double-peak daily profile scaled to the installed capacity.

    Meant for imported cases that come without demand data: a morning and
    a stronger evening peak, distributed over buses by `bus_weights`
    (uniform across buses when absent), with a small seeded per-bus phase
    wiggle so flows are not perfectly proportional.
    """
    rng = np.random.RandomState(seed)
    hours = np.arange(t0) * step_hours
    h = np.mod(hours, 24.0)

    cap = sum(u.p_max for u in case.units)
    if bus_weights is None:
        w = np.ones(case.n_buses)
    else:
        w = np.asarray(bus_weights, dtype=float)
    if w.sum() <= 0:
        w = np.ones(case.n_buses)
    w = w / w.sum()
    phases = rng.uniform(-0.75, 0.75, case.n_buses)
    values = np.zeros((t0, case.n_buses))
    for j in range(case.n_buses):
        local = 0.55 + 0.14 * np.exp(-0.5 * ((h - 9.0 - phases[j]) / 2.5) ** 2) \
            + 0.33 * np.exp(-0.5 * ((h - 18.5 - phases[j]) / 2.0) ** 2)
        values[:, j] = w[j] * local
    sys = values.sum(axis=1)
    scale = peak_fraction * cap / sys.max()
    return DemandSeries(values * scale, step_hours)
