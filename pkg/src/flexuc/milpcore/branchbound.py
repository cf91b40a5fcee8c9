"""Branch-and-bound MILP search on top of a pluggable LP solver.

Branches on the most fractional integer variable, dives depth-first until
the first incumbent is found and then switches to best-first on the node
bound.  Node ids break every tie, so runs are reproducible.
"""

import heapq
import math
import time

import numpy as np

from .model import (GAP_REACHED, INFEASIBLE, INT_TOL, OPTIMAL, TIME_LIMIT,
                    UNBOUNDED, MilpModel, MilpSolution, relative_gap)
from .simplex import solve_simplex


class _Node:
    __slots__ = ("est", "nid", "lo", "hi", "depth")

    def __init__(self, est, nid, lo, hi, depth):
        self.est = est          # parent LP objective, a valid lower bound
        self.nid = nid
        self.lo = lo
        self.hi = hi
        self.depth = depth

    def key(self):
        return (self.est, self.nid)


def solve_branch_and_bound(model: MilpModel, gap: float = 1e-4,
                           time_limit: float | None = None,
                           lp_solve=solve_simplex) -> MilpSolution:
    t_start = time.perf_counter()
    int_idx = np.flatnonzero(model.integer_mask())
    if len(int_idx) == 0:
        sol = lp_solve(model, time_limit=time_limit)
        sol.engine = sol.engine or "bb"
        return sol

    base_lo = np.asarray(model.lo, dtype=float)
    base_hi = np.asarray(model.hi, dtype=float)

    def node_lp(node):
        saved_lo, saved_hi = list(model.lo), list(model.hi)
        model.lo = list(node.lo)
        model.hi = list(node.hi)
        try:
            remaining = None
            if time_limit is not None:
                remaining = max(0.0, time_limit - (time.perf_counter() - t_start))
            return lp_solve(model, time_limit=remaining)
        finally:
            model.lo, model.hi = saved_lo, saved_hi

    incumbent = None
    inc_obj = math.inf
    nodes_done = 0
    next_id = 0
    root = _Node(-math.inf, next_id, base_lo.copy(), base_hi.copy(), 0)
    next_id += 1
    stack = [root]       # dive phase
    heap = []            # best-first phase, entries (est, nid, node)

    def open_bound():
        b = math.inf
        if heap:
            b = min(b, heap[0][0])
        for nd in stack:
            b = min(b, nd.est)
        return b

    def finish(status_hint=None):
        wall = time.perf_counter() - t_start
        if incumbent is None:
            st = status_hint or INFEASIBLE
            return MilpSolution(st, engine="bb", nodes=nodes_done, wall_time=wall)
        bound = min(inc_obj, open_bound())
        g = relative_gap(inc_obj, bound)
        if status_hint == TIME_LIMIT:
            st = TIME_LIMIT
        else:
            st = OPTIMAL if g <= 1e-9 else GAP_REACHED
        return MilpSolution(st, incumbent, inc_obj, bound, g, wall, "bb",
                            nodes=nodes_done, var_names=tuple(model.var_names))

    while stack or heap:
        if time_limit is not None and time.perf_counter() - t_start > time_limit:
            return finish(TIME_LIMIT)
        if incumbent is not None:
            g = relative_gap(inc_obj, min(inc_obj, open_bound()))
            if g <= gap:
                return finish()

        if stack:
            node = stack.pop()
        else:
            node = heapq.heappop(heap)[2]
        if node.est >= inc_obj - 1e-12:
            continue

        rel = node_lp(node)
        nodes_done += 1
        if rel.status == TIME_LIMIT:
            return finish(TIME_LIMIT)
        if rel.status == INFEASIBLE:
            continue
        if rel.status == UNBOUNDED:
            if node.nid == 0:
                wall = time.perf_counter() - t_start
                return MilpSolution(UNBOUNDED, engine="bb", nodes=nodes_done,
                                    wall_time=wall)
            continue
        if rel.objective >= inc_obj - 1e-12:
            continue

        x = rel.values
        frac = np.abs(x[int_idx] - np.round(x[int_idx]))
        if float(frac.max()) <= INT_TOL:
            snapped = x.copy()
            snapped[int_idx] = np.round(snapped[int_idx])
            obj = model.objective_value(snapped)
            if obj < inc_obj - 1e-12:
                incumbent, inc_obj = snapped, obj
            # dive phase is over once an incumbent exists
            while stack:
                nd = stack.pop()
                heapq.heappush(heap, (nd.est, nd.nid, nd))
            continue

        # most fractional variable, smallest index on ties
        dist = np.minimum(frac, 1.0 - frac)
        j = int(int_idx[int(np.argmax(dist))])
        xj = float(x[j])
        down_hi = math.floor(xj + INT_TOL)
        up_lo = math.ceil(xj - INT_TOL)

        children = []
        lo_d, hi_d = node.lo.copy(), node.hi.copy()
        hi_d[j] = min(hi_d[j], down_hi)
        if lo_d[j] <= hi_d[j]:
            children.append(("down", lo_d, hi_d))
        lo_u, hi_u = node.lo.copy(), node.hi.copy()
        lo_u[j] = max(lo_u[j], up_lo)
        if lo_u[j] <= hi_u[j]:
            children.append(("up", lo_u, hi_u))

        # dive toward the nearer integer first
        prefer_down = (xj - down_hi) <= 0.5
        children.sort(key=lambda ch: (ch[0] == "down") != prefer_down)

        for _, clo, chi in children:
            child = _Node(rel.objective, next_id, clo, chi, node.depth + 1)
            next_id += 1
            if incumbent is None:
                stack.append(child)
            else:
                heapq.heappush(heap, (child.est, child.nid, child))
        if incumbent is None and len(children) == 2:
            # LIFO: the preferred child must be popped first
            stack[-1], stack[-2] = stack[-2], stack[-1]

    return finish()
