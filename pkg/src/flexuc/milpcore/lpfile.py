"""Textual LP-format export and `name value` solution import.

The writer emits the common CPLEX/Gurobi LP dialect (Minimize, Subject To,
Bounds, Binaries, Generals, End) so users can hand models to an external
solver.  The importer reads a whitespace-separated solution file back and
refuses any point that violates bounds, integrality or a constraint.
"""

import math
import re

import numpy as np

from ..errors import FlexucError
from .model import (EQ, FEAS_TOL, GAP_REACHED, GE, INT_TOL, LE, MilpModel,
                    MilpSolution)

_NAME_OK = re.compile(r"^[A-Za-z_][A-Za-z0-9_.]*$")


def _safe_name(name: str, seen: set) -> str:
    out = name if _NAME_OK.match(name) else re.sub(r"[^A-Za-z0-9_.]", "_", "n_" + name)
    while out in seen:
        out += "_"
    seen.add(out)
    return out


def _num(v: float) -> str:
    return format(v, ".17g")


def _terms(idx, coef, names):
    parts = []
    for j, a in zip(idx, coef):
        sign = "-" if a < 0 else "+"
        parts.append(f"{sign} {_num(abs(a))} {names[j]}")
    return parts


def _wrap(prefix, parts, out, width=200):
    line = prefix
    for p in parts:
        if len(line) + len(p) + 1 > width:
            out.append(line)
            line = "   " + p
        else:
            line = line + " " + p
    out.append(line)


def export_lp_file(model: MilpModel, path) -> None:
    seen: set = set()
    vnames = [_safe_name(n, seen) for n in model.var_names]
    rseen: set = set()
    rnames = [_safe_name(n, rseen) for n in model.row_names]

    out = [f"\\ {model.name}", "Minimize"]
    obj_parts = _terms(range(model.num_vars),
                       np.asarray(model.obj, dtype=float), vnames)
    obj_parts = [p for p, a in zip(obj_parts, model.obj) if a != 0.0]
    if model.obj_constant:
        obj_parts.append(f"+ {_num(model.obj_constant)}")
    if not obj_parts:
        obj_parts = ["+ 0 " + vnames[0]] if vnames else ["0"]
    _wrap(" obj:", obj_parts, out)

    out.append("Subject To")
    op = {LE: "<=", GE: ">=", EQ: "="}
    for i in range(model.num_rows):
        parts = _terms(model.row_idx[i], model.row_coef[i], vnames)
        if not parts:
            parts = ["+ 0 " + vnames[0]]
        parts.append(f"{op[model.senses[i]]} {_num(model.rhs[i])}")
        _wrap(f" {rnames[i]}:", parts, out)

    out.append("Bounds")
    for j, name in enumerate(vnames):
        lo, hi = model.lo[j], model.hi[j]
        if model.integer[j] and lo == 0.0 and hi == 1.0:
            continue   # implied by the Binaries section
        if lo == hi:
            out.append(f" {name} = {_num(lo)}")
        elif not math.isfinite(lo) and not math.isfinite(hi):
            out.append(f" {name} free")
        elif lo == 0.0 and not math.isfinite(hi):
            continue   # LP-format default
        else:
            lo_s = "-inf" if not math.isfinite(lo) else _num(lo)
            hi_s = "+inf" if not math.isfinite(hi) else _num(hi)
            out.append(f" {lo_s} <= {name} <= {hi_s}")

    binaries = [vnames[j] for j in range(model.num_vars)
                if model.integer[j] and model.lo[j] == 0.0 and model.hi[j] == 1.0]
    generals = [vnames[j] for j in range(model.num_vars)
                if model.integer[j] and vnames[j] not in binaries]
    if binaries:
        out.append("Binaries")
        _wrap(" ", binaries, out)
    if generals:
        out.append("Generals")
        _wrap(" ", generals, out)
    out.append("End")
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")


def import_solution_file(model: MilpModel, path) -> MilpSolution:
    """Read `name value` pairs and accept them only if feasible for `model`."""
    values: dict[str, float] = {}
    with open(path) as fh:
        for ln, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise FlexucError("io.solution_parse",
                                  f"{path}:{ln}: expected 'name value', got {raw.strip()!r}")
            name, sval = parts
            try:
                values[name] = float(sval)
            except ValueError as exc:
                raise FlexucError("io.solution_parse",
                                  f"{path}:{ln}: bad number {sval!r}") from exc

    seen: set = set()
    vnames = [_safe_name(n, seen) for n in model.var_names]
    name_map = {}
    for raw_name, safe in zip(model.var_names, vnames):
        name_map[raw_name] = raw_name
        name_map[safe] = raw_name

    x = np.zeros(model.num_vars)
    have = set()
    for name, val in values.items():
        if name not in name_map:
            raise FlexucError("io.solution_parse", f"unknown variable {name!r}")
        j = model.var_index(name_map[name])
        x[j] = val
        have.add(j)
    missing = [model.var_names[j] for j in range(model.num_vars) if j not in have]
    if missing:
        raise FlexucError("io.solution_parse",
                          f"solution file misses {len(missing)} variables "
                          f"(first: {missing[0]})")

    for j, amount in model.bound_violations(x, tol=FEAS_TOL):
        raise FlexucError("io.solution_infeasible",
                          f"variable {model.var_names[j]} violates its bounds "
                          f"by {amount:.3e}")
    if model.integrality_violation(x) > INT_TOL:
        raise FlexucError("io.solution_infeasible",
                          "integer variable takes a fractional value")
    for i, amount in model.constraint_violations(x, tol=FEAS_TOL):
        raise FlexucError("io.solution_infeasible",
                          f"constraint {model.row_names[i]} violated by {amount:.3e}")

    # imported points carry no optimality certificate
    return MilpSolution(GAP_REACHED, x, model.objective_value(x),
                        -math.inf, math.inf, 0.0, "import",
                        var_names=tuple(model.var_names))
