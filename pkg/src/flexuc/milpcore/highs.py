"""HiGHS-backed LP/MILP solves through scipy.optimize.

Used for instances too large for the in-repo dense simplex.  The adapter
keeps the MilpModel/MilpSolution contract: statuses, gap definition and
the feasibility/integrality verification are identical to the built-in
engine's.
"""

import math
import time

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, LinearConstraint, linprog
from scipy.optimize import milp as scipy_milp

from ..errors import FlexucError
from .model import (EQ, GAP_REACHED, GE, INFEASIBLE, INT_TOL, LE, OPTIMAL,
                    TIME_LIMIT, UNBOUNDED, MilpModel, MilpSolution,
                    relative_gap)


def _row_bounds(model):
    rhs = np.asarray(model.rhs, dtype=float)
    lb = np.where([s == LE for s in model.senses], -np.inf, rhs)
    ub = np.where([s == GE for s in model.senses], np.inf, rhs)
    return lb, ub


def solve_lp_highs(model: MilpModel, time_limit: float | None = None) -> MilpSolution:
    t0 = time.perf_counter()
    c = np.asarray(model.obj, dtype=float)
    lo, hi = model.bounds_arrays()
    a_ub, b_ub, a_eq, b_eq = None, None, None, None
    if model.num_rows:
        A = model.matrix()
        rhs = np.asarray(model.rhs, dtype=float)
        le = np.array([s == LE for s in model.senses])
        ge = np.array([s == GE for s in model.senses])
        eq = np.array([s == EQ for s in model.senses])
        blocks, rhss = [], []
        if le.any():
            blocks.append(A[le])
            rhss.append(rhs[le])
        if ge.any():
            blocks.append(-A[ge])
            rhss.append(-rhs[ge])
        if blocks:
            a_ub = sparse.vstack(blocks, format="csr")
            b_ub = np.concatenate(rhss)
        if eq.any():
            a_eq = A[eq]
            b_eq = rhs[eq]
    options = {"presolve": True}
    if time_limit is not None:
        options["time_limit"] = float(time_limit)
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq,
                  bounds=np.column_stack([lo, hi]), method="highs",
                  options=options)
    wall = time.perf_counter() - t0
    if res.status == 2:
        return MilpSolution(INFEASIBLE, engine="highs", wall_time=wall)
    if res.status == 3:
        return MilpSolution(UNBOUNDED, engine="highs", wall_time=wall)
    if res.status == 1:
        return MilpSolution(TIME_LIMIT, engine="highs", wall_time=wall)
    if res.status != 0:
        raise FlexucError("lp.numerical", f"HiGHS LP failed on {model.name}: {res.message}")
    x = np.asarray(res.x, dtype=float)
    obj = model.objective_value(x)
    return MilpSolution(OPTIMAL, x, obj, obj, 0.0, wall, "highs",
                        iterations=int(getattr(res, "nit", 0)),
                        var_names=tuple(model.var_names))


def solve_milp_highs(model: MilpModel, gap: float = 1e-4,
                     time_limit: float | None = None) -> MilpSolution:
    t0 = time.perf_counter()
    c = np.asarray(model.obj, dtype=float)
    lo, hi = model.bounds_arrays()
    constraints = None
    if model.num_rows:
        lb, ub = _row_bounds(model)
        constraints = LinearConstraint(model.matrix(), lb, ub)
    options = {"mip_rel_gap": float(gap)}
    if time_limit is not None:
        options["time_limit"] = float(time_limit)
    res = scipy_milp(c=c, constraints=constraints,
                     integrality=model.integer_mask().astype(np.int64),
                     bounds=Bounds(lo, hi), options=options)
    wall = time.perf_counter() - t0
    if res.status == 2:
        return MilpSolution(INFEASIBLE, engine="highs", wall_time=wall)
    if res.status == 3:
        return MilpSolution(UNBOUNDED, engine="highs", wall_time=wall)
    if res.status == 1 and res.x is None:
        return MilpSolution(TIME_LIMIT, engine="highs", wall_time=wall)
    if res.status not in (0, 1) or res.x is None:
        raise FlexucError("lp.numerical",
                          f"HiGHS MILP failed on {model.name}: {res.message}")

    x = np.asarray(res.x, dtype=float)
    if model.integrality_violation(x) > 10 * INT_TOL:
        raise FlexucError("lp.numerical",
                          f"HiGHS returned non-integral incumbent on {model.name}")
    mask = model.integer_mask()
    x[mask] = np.round(x[mask])
    obj = model.objective_value(x)
    bound = getattr(res, "mip_dual_bound", None)
    if bound is None or not math.isfinite(bound):
        bound = obj
    else:
        bound = float(bound) + model.obj_constant
    g = relative_gap(obj, min(bound, obj))
    if res.status == 1:
        status = TIME_LIMIT
    else:
        status = OPTIMAL if g <= 1e-9 else GAP_REACHED
    return MilpSolution(status, x, obj, min(bound, obj), g, wall, "highs",
                        nodes=int(getattr(res, "mip_node_count", 0) or 0),
                        var_names=tuple(model.var_names))
