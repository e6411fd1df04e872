"""In-memory mixed-integer linear program with a tagged flow graph on top."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SENSES = ("<=", "=", ">=")
NODE_KINDS = ("source", "sink", "bus", "converter")


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str = "continuous"
    lb: float = 0.0
    ub: float = math.inf


@dataclass(frozen=True)
class Constraint:
    name: str
    terms: tuple[tuple[str, float], ...]
    sense: str
    rhs: float


@dataclass(frozen=True)
class Node:
    """Graph node; ``cluster`` is the (location, group) path used for plotting."""

    id: str
    kind: str
    label: str
    cluster: tuple[str, ...] = ()
    bus: str | None = None


@dataclass(frozen=True)
class FlowEdge:
    interval: int
    source: str
    target: str
    tags: frozenset = field(default_factory=frozenset)


class ModelError(ValueError):
    pass


class MilpModel:
    """Minimisation problem ``min c.x  s.t.  rows, lb <= x <= ub, x_b binary``.

    Variables, constraints and nodes keep insertion order, so a model built by
    a deterministic routine always serialises to the same text.
    """

    def __init__(self, name: str = "model"):
        self.name = name
        self.variables: dict[str, Variable] = {}
        self.constraints: list[Constraint] = []
        self._constraint_names: set[str] = set()
        self.objective: dict[str, float] = {}
        self.flow_registry: dict[str, FlowEdge] = {}
        self.nodes: dict[str, Node] = {}
        self.timestamps: tuple = ()
        self.durations: tuple[float, ...] = ()

    # -- construction -----------------------------------------------------

    def add_variable(self, name, kind="continuous", lb=0.0, ub=math.inf) -> str:
        if name in self.variables:
            raise ModelError(f"duplicate variable {name!r}")
        if kind not in ("continuous", "binary"):
            raise ModelError(f"unknown variable kind {kind!r}")
        if kind == "binary":
            lb, ub = max(0.0, float(lb)), min(1.0, float(ub))
        if lb > ub:
            raise ModelError(f"variable {name!r} has lb {lb} > ub {ub}")
        self.variables[name] = Variable(name, kind, float(lb), float(ub))
        return name

    def add_binary(self, name) -> str:
        return self.add_variable(name, "binary", 0.0, 1.0)

    def set_bounds(self, name, lb=None, ub=None):
        var = self.variables[name]
        lb = var.lb if lb is None else float(lb)
        ub = var.ub if ub is None else float(ub)
        if lb > ub:
            raise ModelError(f"variable {name!r} has lb {lb} > ub {ub}")
        self.variables[name] = Variable(name, var.kind, lb, ub)

    def fix(self, name, value):
        self.set_bounds(name, value, value)

    def add_constraint(self, name, terms, sense, rhs) -> Constraint:
        if sense not in SENSES:
            raise ModelError(f"unknown relation {sense!r}")
        if name in self._constraint_names:
            raise ModelError(f"duplicate constraint {name!r}")
        merged: dict[str, float] = {}
        for var, coef in terms.items() if isinstance(terms, dict) else terms:
            if var not in self.variables:
                raise ModelError(f"constraint {name!r} references unknown variable {var!r}")
            merged[var] = merged.get(var, 0.0) + float(coef)
        if not math.isfinite(float(rhs)) or not all(math.isfinite(c) for c in merged.values()):
            raise ModelError(f"constraint {name!r} has non-finite data")
        con = Constraint(name, tuple((v, c) for v, c in merged.items() if c != 0.0), sense, float(rhs))
        self.constraints.append(con)
        self._constraint_names.add(name)
        return con

    def add_objective(self, name, coef):
        if name not in self.variables:
            raise ModelError(f"objective references unknown variable {name!r}")
        self.objective[name] = self.objective.get(name, 0.0) + float(coef)

    def add_node(self, id, kind, label=None, cluster=(), bus=None) -> str:
        if kind not in NODE_KINDS:
            raise ModelError(f"unknown node kind {kind!r}")
        if id in self.nodes:
            raise ModelError(f"duplicate node {id!r}")
        self.nodes[id] = Node(id, kind, label if label is not None else id, tuple(cluster), bus)
        return id

    def add_flow(self, name, source, target, interval, tags=(), lb=0.0, ub=math.inf) -> str:
        """Create a nonnegative power variable on the edge ``source -> target``."""
        for node in (source, target):
            if node not in self.nodes:
                raise ModelError(f"flow {name!r} references unknown node {node!r}")
        self.add_variable(name, "continuous", lb, ub)
        self.flow_registry[name] = FlowEdge(interval, source, target, frozenset(tags))
        return name

    def add_bus_balances(self):
        """One equality per (bus, interval): inflows minus outflows equal zero."""
        incidence: dict[tuple[str, int], list[tuple[str, float]]] = {}
        for var, edge in self.flow_registry.items():
            if self.nodes[edge.target].kind == "bus":
                incidence.setdefault((edge.target, edge.interval), []).append((var, 1.0))
            if self.nodes[edge.source].kind == "bus":
                incidence.setdefault((edge.source, edge.interval), []).append((var, -1.0))
        for node in self.nodes.values():
            if node.kind != "bus":
                continue
            for t in range(len(self.durations)):
                terms = incidence.get((node.id, t), [])
                self.add_constraint(f"{node.id}.balance.{t}", terms, "=", 0.0)

    # -- inspection -------------------------------------------------------

    @property
    def binaries(self) -> list[str]:
        return [v.name for v in self.variables.values() if v.kind == "binary"]

    def dumps(self) -> str:
        """Canonical text form; equal models give equal strings."""
        lines = [f"model {self.name}"]
        for v in self.variables.values():
            lines.append(f"var {v.name} {v.kind} {v.lb!r} {v.ub!r}")
        for c in self.constraints:
            body = " ".join(f"{coef!r}*{var}" for var, coef in c.terms)
            lines.append(f"con {c.name}: {body} {c.sense} {c.rhs!r}")
        lines.append("obj " + " ".join(f"{coef!r}*{var}" for var, coef in self.objective.items()))
        for var, edge in self.flow_registry.items():
            lines.append(f"flow {var} {edge.interval} {edge.source} -> {edge.target} {sorted(edge.tags)}")
        for node in self.nodes.values():
            lines.append(f"node {node.id} {node.kind} {node.cluster}")
        return "\n".join(lines) + "\n"

    def objective_value(self, values: dict[str, float]) -> float:
        return sum(coef * values[var] for var, coef in self.objective.items())

    def violations(self, values: dict[str, float], tol: float = 1e-6) -> list[str]:
        """Audit an assignment against bounds, integrality and every row."""
        out = []
        for v in self.variables.values():
            x = values[v.name]
            if x < v.lb - tol or x > v.ub + tol:
                out.append(f"bound {v.name}: {x} not in [{v.lb}, {v.ub}]")
            if v.kind == "binary" and min(abs(x), abs(x - 1.0)) > tol:
                out.append(f"integrality {v.name}: {x}")
        for c in self.constraints:
            lhs = sum(coef * values[var] for var, coef in c.terms)
            if (
                (c.sense == "<=" and lhs > c.rhs + tol)
                or (c.sense == ">=" and lhs < c.rhs - tol)
                or (c.sense == "=" and abs(lhs - c.rhs) > tol)
            ):
                out.append(f"row {c.name}: {lhs} {c.sense} {c.rhs}")
        return out

    def to_arrays(self):
        """Dense ``(c, A, senses, b, lb, ub, names, is_binary)``."""
        names = list(self.variables)
        index = {name: i for i, name in enumerate(names)}
        c = np.zeros(len(names))
        for var, coef in self.objective.items():
            c[index[var]] = coef
        A = np.zeros((len(self.constraints), len(names)))
        for i, con in enumerate(self.constraints):
            for var, coef in con.terms:
                A[i, index[var]] += coef
        senses = [con.sense for con in self.constraints]
        b = np.array([con.rhs for con in self.constraints], dtype=float)
        lb = np.array([v.lb for v in self.variables.values()], dtype=float)
        ub = np.array([v.ub for v in self.variables.values()], dtype=float)
        is_binary = np.array([v.kind == "binary" for v in self.variables.values()], dtype=bool)
        return c, A, senses, b, lb, ub, names, is_binary
