"""Power-system data model, validation and DC-power-flow PTDF computation.

Indices are dense and 0-based internally; file ingestion remaps whatever
ids the source uses.  All types are immutable, every operation is pure.
"""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import FlexucError

PTDF_EPSILON = 1e-6   # |PTDF| at or below this puts a unit in neither set


@dataclass(frozen=True)
class Bus:
    id: int
    name: str = ""


@dataclass(frozen=True)
class Line:
    """Transmission line; rating 0 means the line is not monitored."""

    id: int
    from_bus: int
    to_bus: int
    reactance: float
    rating: float = 0.0

    @property
    def monitored(self) -> bool:
        return self.rating > 0.0


@dataclass(frozen=True)
class ThermalUnit:
    id: int
    bus: int
    p_min: float
    p_max: float
    ramp_up: float        # MW per hour
    ramp_down: float      # MW per hour
    min_up: float         # hours
    min_down: float       # hours
    cost_linear: float    # $/MWh
    cost_noload: float    # $/h while committed
    cost_startup: float   # $ per start
    init_status: bool = False
    init_power: float = 0.0
    init_duration: float = 0.0   # hours already spent in init_status

    @property
    def range(self) -> float:
        return self.p_max - self.p_min


@dataclass(frozen=True)
class NetworkCase:
    buses: tuple
    lines: tuple
    units: tuple
    reference_bus: int = 0
    name: str = "case"

    @property
    def n_buses(self) -> int:
        return len(self.buses)

    @property
    def n_lines(self) -> int:
        return len(self.lines)

    @property
    def n_units(self) -> int:
        return len(self.units)

    @cached_property
    def monitored_lines(self) -> tuple:
        return tuple(l for l in self.lines if l.monitored)

    @cached_property
    def unit_buses(self) -> np.ndarray:
        return np.array([u.bus for u in self.units], dtype=np.int64)


@dataclass(frozen=True)
class PtdfMatrix:
    """Line-by-bus sensitivity of flows to injections withdrawn at the reference."""

    values: np.ndarray     # N_L x N_B
    reference_bus: int

    def flows(self, injections: np.ndarray) -> np.ndarray:
        return self.values @ injections

    def row(self, line: int, direction: int = 1) -> np.ndarray:
        return direction * self.values[line]


@dataclass(frozen=True)
class UnitSplit:
    """Units grouped by the sign of their PTDF on one (oriented) line."""

    line: int
    direction: int
    g_plus: tuple
    g_minus: tuple
    t_plus: float
    t_minus: float
    eta_plus: float
    eta_minus: float

    @property
    def one_sided(self) -> bool:
        """True when either side is empty or has no adjustable range."""
        return (not self.g_plus or not self.g_minus
                or self.eta_plus <= 0.0 or self.eta_minus <= 0.0)


@dataclass(frozen=True)
class Violation:
    code: str
    message: str

    def __str__(self):
        return f"[{self.code}] {self.message}"


def validate_case(case: NetworkCase) -> list[Violation]:
    """Check every structural invariant; an empty list means the case is valid."""
    out = []
    nb = case.n_buses
    for k, bus in enumerate(case.buses):
        if bus.id != k:
            out.append(Violation("bus.index", f"bus {bus.id} at position {k}: ids must be dense 0..N-1"))
    if not (0 <= case.reference_bus < nb):
        out.append(Violation("case.reference", f"reference bus {case.reference_bus} out of range"))
    for line in case.lines:
        if not (0 <= line.from_bus < nb) or not (0 <= line.to_bus < nb):
            out.append(Violation("line.endpoints", f"line {line.id}: endpoint out of range"))
        elif line.from_bus == line.to_bus:
            out.append(Violation("line.endpoints", f"line {line.id}: from_bus equals to_bus"))
        if not (line.reactance > 0.0) or not math.isfinite(line.reactance):
            out.append(Violation("line.reactance", f"line {line.id}: reactance must be > 0"))
        if line.rating < 0.0 or not math.isfinite(line.rating):
            out.append(Violation("line.rating", f"line {line.id}: rating must be >= 0"))
    for u in case.units:
        if not (0 <= u.bus < nb):
            out.append(Violation("unit.bus", f"unit {u.id}: bus {u.bus} out of range"))
        if not (0.0 <= u.p_min <= u.p_max):
            out.append(Violation("unit.range", f"unit {u.id}: need 0 <= p_min <= p_max"))
        if u.ramp_up <= 0.0 or u.ramp_down <= 0.0:
            out.append(Violation("unit.ramp", f"unit {u.id}: ramp rates must be > 0"))
        if u.min_up < 0.0 or u.min_down < 0.0:
            out.append(Violation("unit.mintime", f"unit {u.id}: min up/down must be >= 0"))
        if u.init_status:
            if not (u.p_min - 1e-9 <= u.init_power <= u.p_max + 1e-9):
                out.append(Violation("unit.init", f"unit {u.id}: online initial power outside [p_min, p_max]"))
        elif u.init_power != 0.0:
            out.append(Violation("unit.init", f"unit {u.id}: offline unit must have init_power 0"))
    if nb and not _connected(case):
        out.append(Violation("network.disconnected", "network graph is not connected"))
    return out


def _connected(case: NetworkCase) -> bool:
    nb = case.n_buses
    adj = [[] for _ in range(nb)]
    for line in case.lines:
        if 0 <= line.from_bus < nb and 0 <= line.to_bus < nb:
            adj[line.from_bus].append(line.to_bus)
            adj[line.to_bus].append(line.from_bus)
    seen = np.zeros(nb, dtype=bool)
    stack = [0]
    seen[0] = True
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if not seen[w]:
                seen[w] = True
                stack.append(w)
    return bool(seen.all())


def compute_ptdf(case: NetworkCase) -> PtdfMatrix:
    """PTDF under DC assumptions with the case's reference bus.

    The reduced nodal susceptance matrix is factorized once and reused for
    every line, so the cost is one dense solve against N_L right-hand
    sides instead of one power flow per injection.
    """
    nb, nl = case.n_buses, case.n_lines
    if not _connected(case):
        raise FlexucError("network.disconnected",
                          "cannot compute PTDF on a disconnected network")
    b_mat = np.zeros((nb, nb))
    bf = np.zeros((nl, nb))
    for line in case.lines:
        b = 1.0 / line.reactance
        f, t = line.from_bus, line.to_bus
        b_mat[f, f] += b
        b_mat[t, t] += b
        b_mat[f, t] -= b
        b_mat[t, f] -= b
        bf[line.id, f] = b
        bf[line.id, t] = -b
    keep = [j for j in range(nb) if j != case.reference_bus]
    values = np.zeros((nl, nb))
    if keep and nl:
        try:
            sol = np.linalg.solve(b_mat[np.ix_(keep, keep)], bf[:, keep].T)
        except np.linalg.LinAlgError as exc:
            raise FlexucError("network.disconnected",
                              "reduced susceptance matrix is singular") from exc
        values[:, keep] = sol.T
    values.setflags(write=False)
    return PtdfMatrix(values, case.reference_bus)


def classify_units(ptdf: PtdfMatrix, units, line: int,
                   epsilon: float = PTDF_EPSILON, direction: int = 1) -> UnitSplit:
    """Split units into G+/G- by PTDF sign on (possibly negated) line `line`.

    Units with |PTDF| <= epsilon join neither set; their range still counts
    in the eta denominators, so both proportions shrink accordingly.
    """
    row = ptdf.row(line, direction)
    total_range = sum(u.range for u in units)
    g_plus, g_minus = [], []
    num_p = num_m = rng_p = rng_m = 0.0
    for k, u in enumerate(units):
        t = row[u.bus]
        if t > epsilon:
            g_plus.append(k)
            num_p += t * u.range
            rng_p += u.range
        elif t < -epsilon:
            g_minus.append(k)
            num_m += t * u.range
            rng_m += u.range
    t_plus = num_p / rng_p if rng_p > 0 else 0.0
    t_minus = num_m / rng_m if rng_m > 0 else 0.0
    eta_plus = rng_p / total_range if total_range > 0 else 0.0
    eta_minus = rng_m / total_range if total_range > 0 else 0.0
    return UnitSplit(line, direction, tuple(g_plus), tuple(g_minus),
                     t_plus, t_minus, eta_plus, eta_minus)
