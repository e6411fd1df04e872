"""Compile residential multi-energy systems into MILPs and solve them."""

from . import model
from .lowering import LoweringOptions, cop, lower
from .milp import MilpModel
from .model import EnergySystem, Link, Location, TimeIndex, carriers, demands, technologies, validate
from .reporting import export_graph, flows, to_csv
from .solver import Solution, brute_force, export_lp, parse_lp, solve_lp, solve_milp
from .yamlio import export_yaml, load, parse

__all__ = [
    "EnergySystem",
    "Link",
    "Location",
    "LoweringOptions",
    "MilpModel",
    "Solution",
    "TimeIndex",
    "brute_force",
    "carriers",
    "cop",
    "demands",
    "export_graph",
    "export_lp",
    "export_yaml",
    "flows",
    "load",
    "lower",
    "model",
    "parse",
    "parse_lp",
    "solve_lp",
    "solve_milp",
    "technologies",
    "to_csv",
    "validate",
]
