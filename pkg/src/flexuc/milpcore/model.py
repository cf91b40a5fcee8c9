"""Solver-neutral linear model container and solution record.

A MilpModel is a plain list of bounded variables, sparse rows with a
sense (<=, >=, ==) and a linear objective to be minimized.  It knows how
to evaluate a point against its own constraints, which is what the
solution importer and the solver backends use to verify feasibility.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from ..errors import FlexucError

LE = "<="
GE = ">="
EQ = "=="

# solution statuses
OPTIMAL = "optimal"
GAP_REACHED = "gap_reached"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
TIME_LIMIT = "time_limit"

FEAS_TOL = 1e-6   # absolute constraint/bound feasibility tolerance
INT_TOL = 1e-6    # integrality tolerance


class MilpModel:
    """Sparse MILP in minimization form."""

    def __init__(self, name: str = "model"):
        self.name = name
        self.var_names: list[str] = []
        self.lo: list[float] = []
        self.hi: list[float] = []
        self.integer: list[bool] = []
        self.obj: list[float] = []
        self.obj_constant = 0.0
        self.row_idx: list[np.ndarray] = []
        self.row_coef: list[np.ndarray] = []
        self.senses: list[str] = []
        self.rhs: list[float] = []
        self.row_names: list[str] = []
        self._name_to_var: dict[str, int] = {}
        self._matrix_cache = None

    # -- construction -------------------------------------------------

    def add_var(self, name, lo=0.0, hi=math.inf, integer=False, obj=0.0) -> int:
        if lo > hi:
            raise FlexucError("model.bounds", f"variable {name}: lo {lo} > hi {hi}")
        if name in self._name_to_var:
            raise FlexucError("model.duplicate_var", f"variable {name} already exists")
        j = len(self.var_names)
        self.var_names.append(name)
        self.lo.append(float(lo))
        self.hi.append(float(hi))
        self.integer.append(bool(integer))
        self.obj.append(float(obj))
        self._name_to_var[name] = j
        self._matrix_cache = None
        return j

    def add_binary(self, name, obj=0.0) -> int:
        return self.add_var(name, 0.0, 1.0, integer=True, obj=obj)

    def add_constr(self, coeffs, sense, rhs, name=None) -> int:
        if sense not in (LE, GE, EQ):
            raise FlexucError("model.sense", f"unknown sense {sense!r}")
        items = coeffs.items() if isinstance(coeffs, dict) else coeffs
        idx, coef = [], []
        for j, a in items:
            if a == 0.0:
                continue
            if not math.isfinite(a):
                raise FlexucError("model.coefficient", f"non-finite coefficient in row {name}")
            idx.append(j)
            coef.append(float(a))
        i = len(self.senses)
        self.row_idx.append(np.asarray(idx, dtype=np.int64))
        self.row_coef.append(np.asarray(coef, dtype=np.float64))
        self.senses.append(sense)
        self.rhs.append(float(rhs))
        self.row_names.append(name if name is not None else f"r{i}")
        self._matrix_cache = None
        return i

    def set_bounds(self, j, lo=None, hi=None):
        if lo is not None:
            self.lo[j] = float(lo)
        if hi is not None:
            self.hi[j] = float(hi)
        if self.lo[j] > self.hi[j]:
            raise FlexucError("model.bounds", f"variable {self.var_names[j]}: empty bound range")

    # -- views ----------------------------------------------------------

    @property
    def num_vars(self) -> int:
        return len(self.var_names)

    @property
    def num_rows(self) -> int:
        return len(self.senses)

    @property
    def num_binaries(self) -> int:
        return sum(
            1 for j in range(self.num_vars)
            if self.integer[j] and self.lo[j] >= 0.0 and self.hi[j] <= 1.0
        )

    @property
    def num_integers(self) -> int:
        return sum(self.integer)

    def var_index(self, name) -> int:
        return self._name_to_var[name]

    def matrix(self) -> sparse.csr_matrix:
        """Constraint matrix as CSR, cached until the model changes."""
        if self._matrix_cache is None:
            if self.num_rows == 0:
                self._matrix_cache = sparse.csr_matrix((0, self.num_vars))
            else:
                rows = np.concatenate([
                    np.full(len(ix), i, dtype=np.int64)
                    for i, ix in enumerate(self.row_idx)
                ]) if self.row_idx else np.zeros(0, dtype=np.int64)
                cols = (np.concatenate(self.row_idx)
                        if self.row_idx else np.zeros(0, dtype=np.int64))
                vals = (np.concatenate(self.row_coef)
                        if self.row_coef else np.zeros(0))
                self._matrix_cache = sparse.csr_matrix(
                    (vals, (rows, cols)), shape=(self.num_rows, self.num_vars))
        return self._matrix_cache

    def bounds_arrays(self):
        return np.asarray(self.lo), np.asarray(self.hi)

    def integer_mask(self) -> np.ndarray:
        return np.asarray(self.integer, dtype=bool)

    # -- evaluation -------------------------------------------------------

    def objective_value(self, x) -> float:
        return float(np.dot(self.obj, x) + self.obj_constant)

    def row_activity(self, x) -> np.ndarray:
        return self.matrix().dot(np.asarray(x, dtype=float))

    def constraint_violations(self, x, tol=FEAS_TOL):
        """Yield (row index, amount) for every violated row, worst first not guaranteed."""
        act = self.row_activity(x)
        rhs = np.asarray(self.rhs)
        for i, sense in enumerate(self.senses):
            if sense == LE:
                v = act[i] - rhs[i]
            elif sense == GE:
                v = rhs[i] - act[i]
            else:
                v = abs(act[i] - rhs[i])
            if v > tol:
                yield i, float(v)

    def bound_violations(self, x, tol=FEAS_TOL):
        lo, hi = self.bounds_arrays()
        xa = np.asarray(x, dtype=float)
        for j in np.flatnonzero((lo - xa > tol) | (xa - hi > tol)):
            yield int(j), float(max(lo[j] - xa[j], xa[j] - hi[j]))

    def max_violation(self, x) -> tuple[float, str]:
        """Largest constraint or bound violation and the offender's name."""
        worst, who = 0.0, ""
        for j, v in self.bound_violations(x, tol=-math.inf):
            if v > worst:
                worst, who = v, f"bound:{self.var_names[j]}"
        for i, v in self.constraint_violations(x, tol=-math.inf):
            if v > worst:
                worst, who = v, self.row_names[i]
        return worst, who

    def integrality_violation(self, x) -> float:
        mask = self.integer_mask()
        if not mask.any():
            return 0.0
        xi = np.asarray(x, dtype=float)[mask]
        return float(np.max(np.abs(xi - np.round(xi))))


@dataclass
class MilpSolution:
    """Outcome of a solve; `values` is None when no point is available."""

    status: str
    values: np.ndarray | None = None
    objective: float | None = None
    bound: float | None = None
    gap: float | None = None
    wall_time: float = 0.0
    engine: str = ""
    iterations: int = 0
    nodes: int = 0
    var_names: tuple[str, ...] = field(default_factory=tuple, repr=False)

    @property
    def ok(self) -> bool:
        return self.status in (OPTIMAL, GAP_REACHED)

    def value(self, name: str) -> float:
        if self.values is None:
            raise FlexucError("solution.empty", "no incumbent values available")
        return float(self.values[self.var_names.index(name)])


def relative_gap(objective: float, bound: float) -> float:
    """(objective - bound) / max(1, |objective|), clipped at zero."""
    if not (math.isfinite(objective) and math.isfinite(bound)):
        return math.inf
    return max(0.0, (objective - bound) / max(1.0, abs(objective)))
