"""flexuc: network-constrained unit commitment with flexible temporal resolution.

The pipeline: estimate congestion candidates from a relaxed LP, score
every candidate window with the impact metric, cut the horizon into T
adaptive periods by dynamic programming, solve the duration-aware NCUC
MILP, extend the commitment back to the original resolution, dispatch and
correct until feasible.
"""

from .demand import DemandSeries, Partition, WindowStats, partition_durations, window_stats
from .dispatch import (DispatchResult, ExtendedSchedule, correct,
                       economic_dispatch, extend)
from .errors import FlexucError
from .powersys import (Bus, Line, NetworkCase, PtdfMatrix, ThermalUnit,
                       UnitSplit, classify_units, compute_ptdf, validate_case)
from .resolution import (CongestionCandidates, ImpactTable, baseline_partition,
                         build_impact_table, estimate_congestion, impact_lambda,
                         optimize_partition)
from .ucbuilder import (ModelHandle, RampEntry, UcConfig, UcSolution,
                        build_ncuc, build_relaxed_ncuc, min_time_horizon,
                        ramp_params)

__version__ = "0.1.0"
