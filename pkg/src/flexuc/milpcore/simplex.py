"""Bounded-variable two-phase revised simplex.

Dense implementation intended for desk-scale models (a few hundred rows).
Every row gets a slack whose bounds encode the sense, plus an artificial
column so phase 1 can start from an identity basis.  Pricing is Dantzig
with a permanent switch to Bland's rule once the objective stalls, which
rules out cycling.  The basis inverse is kept explicitly and rebuilt every
so often to bound drift.
"""

import math
import time

import numpy as np

from ..errors import FlexucError
from .model import (EQ, GE, INFEASIBLE, LE, OPTIMAL, TIME_LIMIT, UNBOUNDED,
                    MilpModel, MilpSolution)

_PIV_TOL = 1e-9       # smallest pivot magnitude accepted
_COST_TOL = 1e-9      # reduced-cost optimality tolerance
_STALL_LIMIT = 200    # degenerate iterations before Bland's rule kicks in
_REFACTOR_EVERY = 150

AT_LO, AT_UP, FREE, BASIC = 0, 1, 2, 3


def solve_simplex(model: MilpModel, time_limit: float | None = None) -> MilpSolution:
    """Solve the LP relaxation of `model` (integrality flags are ignored)."""
    t_start = time.perf_counter()
    n = model.num_vars
    m = model.num_rows

    if m == 0:
        # pure bound problem: each variable sits at its cheaper bound
        x = np.zeros(n)
        for j in range(n):
            c = model.obj[j]
            lo, hi = model.lo[j], model.hi[j]
            if c > 0:
                if not math.isfinite(lo):
                    return MilpSolution(UNBOUNDED, engine="simplex")
                x[j] = lo
            elif c < 0:
                if not math.isfinite(hi):
                    return MilpSolution(UNBOUNDED, engine="simplex")
                x[j] = hi
            else:
                x[j] = min(max(0.0, lo), hi)
        return MilpSolution(OPTIMAL, x, model.objective_value(x),
                            model.objective_value(x), 0.0,
                            time.perf_counter() - t_start, "simplex",
                            var_names=tuple(model.var_names))

    # columns: [structural | slack | artificial]
    ncols = n + 2 * m
    A = np.zeros((m, ncols))
    A[:, :n] = model.matrix().toarray()
    lo = np.full(ncols, -math.inf)
    hi = np.full(ncols, math.inf)
    lo[:n] = model.lo
    hi[:n] = model.hi
    for i, sense in enumerate(model.senses):
        A[i, n + i] = 1.0
        if sense == LE:
            lo[n + i], hi[n + i] = 0.0, math.inf
        elif sense == GE:
            lo[n + i], hi[n + i] = -math.inf, 0.0
        else:
            lo[n + i], hi[n + i] = 0.0, 0.0

    b = np.asarray(model.rhs, dtype=float)

    # nonbasic starting point: finite bound nearest the origin, else free at 0
    state = np.empty(ncols, dtype=np.int8)
    value = np.zeros(ncols)
    for j in range(n + m):
        if math.isfinite(lo[j]):
            state[j], value[j] = AT_LO, lo[j]
        elif math.isfinite(hi[j]):
            state[j], value[j] = AT_UP, hi[j]
        else:
            state[j], value[j] = FREE, 0.0

    resid = b - A[:, :n + m] @ value[:n + m]
    art_sign = np.where(resid >= 0.0, 1.0, -1.0)
    for i in range(m):
        A[i, n + m + i] = art_sign[i]
    lo[n + m:] = 0.0
    hi[n + m:] = math.inf
    state[n + m:] = BASIC
    value[n + m:] = 0.0

    basis = np.arange(n + m, n + m + m, dtype=np.int64)
    binv = np.diag(art_sign)          # inverse of the artificial basis
    xb = np.abs(resid)

    c_phase1 = np.zeros(ncols)
    c_phase1[n + m:] = 1.0
    c_phase2 = np.zeros(ncols)
    c_phase2[:n] = model.obj

    fixed = lo == hi                   # never worth entering
    iters = 0
    max_iters = 5000 + 200 * m

    def run_phase(c, allow_unbounded):
        nonlocal binv, xb, iters
        bland = False
        stall = 0
        since_refactor = 0
        while True:
            iters += 1
            if iters > max_iters:
                raise FlexucError("lp.numerical",
                                  f"simplex iteration limit ({max_iters}) hit on {model.name}")
            if time_limit is not None and time.perf_counter() - t_start > time_limit:
                return TIME_LIMIT

            y = c[basis] @ binv
            d = c - y @ A
            d[basis] = 0.0

            cand_lo = (state == AT_LO) & (d < -_COST_TOL) & ~fixed
            cand_up = (state == AT_UP) & (d > _COST_TOL) & ~fixed
            cand_fr = (state == FREE) & (np.abs(d) > _COST_TOL)
            cand = cand_lo | cand_up | cand_fr
            if not cand.any():
                return OPTIMAL

            if bland:
                e = int(np.flatnonzero(cand)[0])
            else:
                score = np.where(cand, np.abs(d), 0.0)
                e = int(np.argmax(score))
            sigma = 1.0 if (state[e] == AT_LO or (state[e] == FREE and d[e] < 0)) else -1.0

            w = binv @ A[:, e]
            sw = sigma * w

            # ratio test over the basic variables
            t_cand = np.full(m, math.inf)
            dec = sw > _PIV_TOL
            inc = sw < -_PIV_TOL
            lo_b = lo[basis]
            hi_b = hi[basis]
            with np.errstate(invalid="ignore"):
                t_cand[dec] = np.where(np.isfinite(lo_b[dec]),
                                       (xb[dec] - lo_b[dec]) / sw[dec], math.inf)
                t_cand[inc] = np.where(np.isfinite(hi_b[inc]),
                                       (hi_b[inc] - xb[inc]) / (-sw[inc]), math.inf)
            t_cand = np.maximum(t_cand, 0.0)   # drift below a bound must not step back
            t_best = float(t_cand.min()) if m else math.inf
            if t_best < math.inf:
                ties = np.flatnonzero(t_cand <= t_best + 1e-15)
                # smallest basis column index among ties (Bland-compatible)
                k_best = int(ties[np.argmin(basis[ties])])
            else:
                k_best = -1

            t_self = hi[e] - lo[e] if math.isfinite(hi[e] - lo[e]) else math.inf

            if t_best == math.inf and t_self == math.inf:
                if allow_unbounded:
                    return UNBOUNDED
                raise FlexucError("lp.numerical",
                                  "phase-1 ray found; inconsistent bounds in model")

            if t_self <= t_best:
                # bound flip, no basis change
                xb -= sigma * t_self * w
                state[e] = AT_UP if state[e] == AT_LO else AT_LO
                value[e] = hi[e] if state[e] == AT_UP else lo[e]
                stall = stall + 1 if t_self <= 1e-12 else 0
            else:
                leave = basis[k_best]
                enter_val = value[e] + sigma * t_best
                xb -= sigma * t_best * w
                if sw[k_best] > 0:
                    state[leave] = AT_LO
                    value[leave] = lo[leave]
                else:
                    state[leave] = AT_UP
                    value[leave] = hi[leave]
                if leave >= n + m:
                    # drive-out: an artificial never re-enters
                    hi[leave] = 0.0
                    value[leave] = 0.0
                    fixed[leave] = True
                basis[k_best] = e
                state[e] = BASIC
                xb[k_best] = enter_val
                piv_row = binv[k_best, :] / w[k_best]
                binv -= np.outer(w, piv_row)
                binv[k_best, :] = piv_row
                since_refactor += 1
                stall = stall + 1 if t_best <= 1e-12 else 0

            if stall > _STALL_LIMIT:
                bland = True
            if since_refactor >= _REFACTOR_EVERY:
                since_refactor = 0
                binv, xb = _refactor(A, basis, b, state, value, lo, hi, model)

    status = run_phase(c_phase1, allow_unbounded=False)
    if status == TIME_LIMIT:
        return MilpSolution(TIME_LIMIT, engine="simplex",
                            wall_time=time.perf_counter() - t_start)
    infeas = max(0.0, float(c_phase1[basis] @ xb))
    scale = 1.0 + float(np.max(np.abs(b))) if m else 1.0
    if infeas > 1e-7 * scale:
        return MilpSolution(INFEASIBLE, engine="simplex", iterations=iters,
                            wall_time=time.perf_counter() - t_start)

    # artificials are pinned at zero for phase 2
    hi[n + m:] = 0.0
    fixed[n + m:] = True

    status = run_phase(c_phase2, allow_unbounded=True)
    if status == TIME_LIMIT:
        return MilpSolution(TIME_LIMIT, engine="simplex",
                            wall_time=time.perf_counter() - t_start)
    if status == UNBOUNDED:
        return MilpSolution(UNBOUNDED, engine="simplex", iterations=iters,
                            wall_time=time.perf_counter() - t_start)

    binv, xb = _refactor(A, basis, b, state, value, lo, hi, model)
    x_full = value.copy()
    x_full[basis] = xb
    x = x_full[:n]
    worst, who = model.max_violation(x)
    if worst > 1e-6:
        raise FlexucError("lp.numerical",
                          f"simplex solution violates {who} by {worst:.3e}")
    obj = model.objective_value(x)
    return MilpSolution(OPTIMAL, x, obj, obj, 0.0,
                        time.perf_counter() - t_start, "simplex",
                        iterations=iters, var_names=tuple(model.var_names))


def _refactor(A, basis, b, state, value, lo, hi, model):
    """Rebuild the basis inverse and basic values from scratch."""
    try:
        binv = np.linalg.inv(A[:, basis])
    except np.linalg.LinAlgError as exc:
        raise FlexucError("lp.numerical",
                          f"singular basis while solving {model.name}") from exc
    v = value.copy()
    v[basis] = 0.0
    xb = binv @ (b - A @ v)
    return binv, xb
