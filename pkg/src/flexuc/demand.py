"""Demand profiles, per-window statistics and adaptive-period partitions."""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import FlexucError


@dataclass(frozen=True)
class DemandSeries:
    """Per-bus demand matrix over the original horizon.

    `values` is T0 x N_B in MW; `step_hours` is the length of one original
    period.  System demand is the row sum.
    """

    values: np.ndarray
    step_hours: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] < 1:
            raise FlexucError("demand.shape", "demand must be a T0 x N_B matrix with T0 >= 1")
        if not np.isfinite(v).all() or (v < 0).any():
            raise FlexucError("demand.values", "demand entries must be finite and >= 0")
        if not self.step_hours > 0:
            raise FlexucError("demand.step", "step_hours must be > 0")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def t0(self) -> int:
        return self.values.shape[0]

    @property
    def n_buses(self) -> int:
        return self.values.shape[1]

    @cached_property
    def system(self) -> np.ndarray:
        s = self.values.sum(axis=1)
        s.setflags(write=False)
        return s


@dataclass(frozen=True)
class Partition:
    """Starting points tau_1..tau_T of the adaptive periods, 1-based."""

    starts: tuple
    objective: float | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "starts", tuple(int(s) for s in self.starts))

    @property
    def num_periods(self) -> int:
        return len(self.starts)

    def validate(self, t0: int):
        s = self.starts
        if not s or s[0] != 1:
            raise FlexucError("partition.invalid", "starts must begin with tau_1 = 1")
        if any(b <= a for a, b in zip(s, s[1:])):
            raise FlexucError("partition.invalid", "starts must be strictly increasing")
        if s[-1] > t0:
            raise FlexucError("partition.invalid", f"last start {s[-1]} exceeds T0={t0}")

    def windows(self, t0: int) -> list[tuple[int, int]]:
        """Inclusive 1-based [tau_S, tau_F] window per adaptive period."""
        self.validate(t0)
        ends = list(self.starts[1:]) + [t0 + 1]
        return [(s, e - 1) for s, e in zip(self.starts, ends)]

    @classmethod
    def singletons(cls, t0: int) -> "Partition":
        return cls(tuple(range(1, t0 + 1)))


def partition_durations(partition: Partition, t0: int) -> list[int]:
    """d_t = tau_{t+1} - tau_t with tau_{T+1} = T0 + 1; the sum is T0."""
    return [f - s + 1 for s, f in partition.windows(t0)]


@dataclass(frozen=True)
class WindowStats:
    """Demand summaries over one adaptive window."""

    avg_bus: np.ndarray   # N_B vector, MW
    avg_sys: float
    max_sys: float
    min_sys: float
    max_step_up: float
    max_step_down: float


def window_stats(demand: DemandSeries, window: tuple[int, int],
                 prev_last: int | None = None) -> WindowStats:
    """Averages, extrema and largest single demand steps over [tau_S, tau_F].

    The steps include the transition from `prev_last` (the last original
    period of the preceding adaptive period) when given: the commitment is
    frozen across the whole window, so units ride the entry step too.
    """
    ts, tf = window
    if not (1 <= ts <= tf <= demand.t0):
        raise FlexucError("window.range", f"window [{ts}, {tf}] outside [1, {demand.t0}]")
    if prev_last is not None and not (1 <= prev_last < ts):
        raise FlexucError("window.range", f"prev_last {prev_last} must precede the window")
    sys = demand.system
    block = sys[ts - 1:tf]
    if prev_last is None:
        seq = block
    else:
        seq = np.concatenate([[sys[prev_last - 1]], block])
    steps = np.diff(seq)
    return WindowStats(
        avg_bus=demand.values[ts - 1:tf].mean(axis=0),
        avg_sys=float(block.mean()),
        max_sys=float(block.max()),
        min_sys=float(block.min()),
        max_step_up=float(max(0.0, steps.max())) if steps.size else 0.0,
        max_step_down=float(max(0.0, -steps.min())) if steps.size else 0.0,
    )


def all_window_stats(demand: DemandSeries, partition: Partition) -> list[WindowStats]:
    """Stats for every window, wiring prev_last across window boundaries."""
    out = []
    prev_last = None
    for ts, tf in partition.windows(demand.t0):
        out.append(window_stats(demand, (ts, tf), prev_last))
        prev_last = tf
    return out
