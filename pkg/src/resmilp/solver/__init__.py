"""Exact desk-scale solvers and CPLEX LP file I/O."""

from .lpfile import UnrepresentableName, export_lp, parse_lp, sanitize_names
from .milp_solver import Solution, TooManyBinaries, brute_force, solve_lp, solve_milp
from .simplex import LpStandardForm, NumericalBreakdown, solve_lp_arrays

__all__ = [
    "LpStandardForm",
    "NumericalBreakdown",
    "Solution",
    "TooManyBinaries",
    "UnrepresentableName",
    "brute_force",
    "export_lp",
    "parse_lp",
    "sanitize_names",
    "solve_lp",
    "solve_lp_arrays",
    "solve_milp",
]
