"""Linear/mixed-integer solving layer.

Two interchangeable engines sit behind `solve_lp` / `solve_milp`: the
in-repo bounded revised simplex with branch-and-bound (deterministic,
meant for desk-scale models) and HiGHS through scipy for anything large.
`engine="auto"` picks by model size.
"""

from .branchbound import solve_branch_and_bound
from .highs import solve_lp_highs, solve_milp_highs
from .lpfile import export_lp_file, import_solution_file
from .model import (EQ, FEAS_TOL, GAP_REACHED, GE, INFEASIBLE, INT_TOL, LE,
                    OPTIMAL, TIME_LIMIT, UNBOUNDED, MilpModel, MilpSolution,
                    relative_gap)
from .simplex import solve_simplex

# above this many rows+columns the dense in-repo simplex stops being sensible
_AUTO_SIZE_LIMIT = 600


def _pick(model, engine):
    if engine == "auto":
        return "builtin" if model.num_vars + model.num_rows <= _AUTO_SIZE_LIMIT else "highs"
    return engine


def solve_lp(model: MilpModel, engine: str = "auto",
             time_limit: float | None = None) -> MilpSolution:
    """Solve the LP relaxation (integrality flags ignored)."""
    picked = _pick(model, engine)
    if picked == "builtin":
        return solve_simplex(model, time_limit=time_limit)
    if picked == "highs":
        return solve_lp_highs(model, time_limit=time_limit)
    raise ValueError(f"unknown engine {engine!r}")


def solve_milp(model: MilpModel, gap: float = 1e-4,
               time_limit: float | None = None,
               engine: str = "auto") -> MilpSolution:
    """Solve to the requested relative gap; incumbents are always feasible."""
    picked = _pick(model, engine)
    if picked == "builtin":
        return solve_branch_and_bound(model, gap=gap, time_limit=time_limit)
    if picked == "highs":
        return solve_milp_highs(model, gap=gap, time_limit=time_limit)
    raise ValueError(f"unknown engine {engine!r}")


__all__ = [
    "MilpModel", "MilpSolution", "solve_lp", "solve_milp", "solve_simplex",
    "solve_branch_and_bound", "solve_lp_highs", "solve_milp_highs",
    "export_lp_file", "import_solution_file", "relative_gap",
    "LE", "GE", "EQ", "OPTIMAL", "GAP_REACHED", "INFEASIBLE", "UNBOUNDED",
    "TIME_LIMIT", "FEAS_TOL", "INT_TOL",
]
