"""Best-first branch-and-bound and an exhaustive enumeration oracle."""

from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np

from ..milp import MilpModel
from .simplex import LpStandardForm, NumericalBreakdown, solve_lp_arrays

INT_TOL = 1e-6
AUDIT_TOL = 1e-6


class TooManyBinaries(ValueError):
    pass


@dataclass
class Solution:
    status: str
    objective: float
    values: dict = field(default_factory=dict)
    stats: dict = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.status == "Optimal"

    def __getitem__(self, name):
        return self.values[name]

    def summary_line(self, timestamps=True) -> str:
        parts = [f"status={self.status}", f"objective={self.objective!r}"]
        for key in ("nodes", "lp_iterations", "lps"):
            if key in self.stats:
                parts.append(f"{key}={self.stats[key]}")
        if timestamps and "wall_time" in self.stats:
            parts.append(f"wall_time={self.stats['wall_time']:.3f}s")
        return " ".join(parts)


_STATUS = {"optimal": "Optimal", "infeasible": "Infeasible", "unbounded": "Unbounded"}


def _finish(model, form, status, x, stats, started):
    stats["wall_time"] = time.perf_counter() - started
    if status != "Optimal":
        obj = -math.inf if status == "Unbounded" else math.nan
        return Solution(status, obj, {}, stats)
    x = np.where(form.is_binary, np.round(x), x)
    values = {name: float(v) for name, v in zip(form.names, x)}
    problems = model.violations(values, AUDIT_TOL)
    if problems:
        raise NumericalBreakdown("solution fails the feasibility audit: " + "; ".join(problems[:5]))
    return Solution("Optimal", model.objective_value(values), values, stats)


def solve_lp(model: MilpModel, relax: bool = False) -> Solution:
    """Solve a model without binaries, or its continuous relaxation when ``relax`` is set."""
    if model.binaries and not relax:
        raise ValueError("model has binary variables; pass relax=True for the relaxation")
    started = time.perf_counter()
    form = LpStandardForm.from_model(model)
    res = solve_lp_arrays(form.c, form.A, form.senses, form.b, form.lb, form.ub)
    stats = {"lp_iterations": res.iterations, "lps": 1}
    if res.status != "optimal":
        return _finish(model, form, _STATUS[res.status], None, stats, started)
    stats["wall_time"] = time.perf_counter() - started
    values = {name: float(v) for name, v in zip(form.names, res.x)}
    if relax:
        return Solution("Optimal", model.objective_value(values), values, stats)
    form.is_binary = np.zeros(len(form.names), dtype=bool)
    return _finish(model, form, "Optimal", res.x, stats, started)


def solve_milp(model: MilpModel, gap: float = 1e-6, max_nodes: int = 200_000) -> Solution:
    """Exact solve by best-first branch-and-bound on the LP bound.

    Branches on the most fractional binary (lowest index on ties) and stops
    once no open node can improve the incumbent by more than ``gap``.
    """
    started = time.perf_counter()
    form = LpStandardForm.from_model(model)
    binaries = np.flatnonzero(form.is_binary)
    stats = {"nodes": 0, "lp_iterations": 0, "lps": 0}

    def relax(lb, ub):
        res = solve_lp_arrays(form.c, form.A, form.senses, form.b, lb, ub)
        stats["lps"] += 1
        stats["lp_iterations"] += res.iterations
        return res

    best_obj, best_x = math.inf, None
    counter = itertools.count()
    heap = [(-math.inf, next(counter), form.lb.copy(), form.ub.copy())]
    root_unbounded = False
    while heap:
        bound, _, lb, ub = heapq.heappop(heap)
        if bound >= best_obj - gap:
            break
        if stats["nodes"] >= max_nodes:
            raise NumericalBreakdown(f"node limit {max_nodes} reached")
        stats["nodes"] += 1
        res = relax(lb, ub)
        if res.status == "infeasible":
            continue
        if res.status == "unbounded":
            if stats["nodes"] == 1:
                root_unbounded = True
                break
            continue
        if res.objective >= best_obj - gap:
            continue
        xb = res.x[binaries]
        frac = np.abs(xb - np.round(xb))
        if not np.any(frac > INT_TOL):
            fixed_lb, fixed_ub = lb.copy(), ub.copy()
            fixed_lb[binaries] = fixed_ub[binaries] = np.round(xb)
            polished = relax(fixed_lb, fixed_ub)
            if polished.status == "optimal" and polished.objective < best_obj:
                best_obj, best_x = polished.objective, polished.x
            continue
        # most fractional: distance to 0.5, ties to the lowest index
        k = int(binaries[np.argmin(np.abs(xb - 0.5))])
        for value in (0.0, 1.0):
            child_lb, child_ub = lb.copy(), ub.copy()
            child_lb[k] = child_ub[k] = value
            heapq.heappush(heap, (res.objective, next(counter), child_lb, child_ub))
    if root_unbounded:
        return _finish(model, form, "Unbounded", None, stats, started)
    if best_x is None:
        return _finish(model, form, "Infeasible", None, stats, started)
    return _finish(model, form, "Optimal", best_x, stats, started)


def brute_force(model: MilpModel, max_binaries: int = 20) -> Solution:
    """Enumerate every binary assignment, solve the remaining LP, keep the best.

    Assignments violating a row that contains only binaries are skipped
    without an LP, since that LP is infeasible anyway.
    """
    started = time.perf_counter()
    form = LpStandardForm.from_model(model)
    binaries = np.flatnonzero(form.is_binary)
    if len(binaries) > max_binaries:
        raise TooManyBinaries(f"{len(binaries)} binaries exceed the limit of {max_binaries}")
    bin_set = set(binaries.tolist())
    pure_rows = [
        i for i in range(len(form.b)) if set(np.flatnonzero(form.A[i]).tolist()) <= bin_set and form.A[i].any()
    ]
    stats = {"lps": 0, "lp_iterations": 0, "assignments": 2 ** len(binaries)}
    best_obj, best_x = math.inf, None
    for bits in itertools.product((0.0, 1.0), repeat=len(binaries)):
        assignment = np.array(bits)
        if np.any(assignment < form.lb[binaries]) or np.any(assignment > form.ub[binaries]):
            continue
        if not _pure_rows_ok(form, pure_rows, binaries, assignment):
            continue
        lb, ub = form.lb.copy(), form.ub.copy()
        lb[binaries] = ub[binaries] = assignment
        res = solve_lp_arrays(form.c, form.A, form.senses, form.b, lb, ub)
        stats["lps"] += 1
        stats["lp_iterations"] += res.iterations
        if res.status == "unbounded":
            return _finish(model, form, "Unbounded", None, stats, started)
        if res.status == "optimal" and res.objective < best_obj:
            best_obj, best_x = res.objective, res.x
    if best_x is None:
        return _finish(model, form, "Infeasible", None, stats, started)
    return _finish(model, form, "Optimal", best_x, stats, started)


def _pure_rows_ok(form, rows, binaries, assignment):
    if not rows:
        return True
    x = np.zeros(len(form.c))
    x[binaries] = assignment
    for i in rows:
        lhs = form.A[i] @ x
        sense = form.senses[i]
        if (sense == "<=" and lhs > form.b[i] + 1e-9) or (sense == ">=" and lhs < form.b[i] - 1e-9) or (
            sense == "=" and abs(lhs - form.b[i]) > 1e-9
        ):
            return False
    return True
