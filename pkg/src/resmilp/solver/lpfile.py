"""CPLEX LP text format: writer plus a small re-parser used for round trips."""

from __future__ import annotations

import json
import math
import re
from pathlib import Path

from ..milp import MilpModel

_BAD_CHARS = re.compile(r"[^A-Za-z0-9_]")
_RESERVED = {"free", "inf", "infinity", "st", "bounds", "bound", "binary", "binaries", "bin", "end",
             "general", "generals", "gen", "minimize", "maximize", "min", "max", "subject", "to"}
_TERMS_PER_LINE = 8


class UnrepresentableName(ValueError):
    pass


class LpParseError(ValueError):
    pass


def _sanitize(name: str) -> str:
    if not name:
        raise UnrepresentableName("empty name")
    clean = _BAD_CHARS.sub("_", name)
    if clean[0].isdigit() or re.match(r"[eE][0-9eE]", clean) or clean.lower() in _RESERVED:
        clean = "v_" + clean
    return clean


def sanitize_names(names) -> dict[str, str]:
    """Map names onto ``[A-Za-z0-9_]``; two names collapsing onto one is an error."""
    mapping, seen = {}, {}
    for name in names:
        clean = _sanitize(name)
        if clean in seen and seen[clean] != name:
            raise UnrepresentableName(f"{name!r} and {seen[clean]!r} both sanitize to {clean!r}")
        seen[clean] = name
        mapping[name] = clean
    return mapping


def _num(value: float) -> str:
    if value == 0:
        return "0"
    if math.isinf(value):
        return "+inf" if value > 0 else "-inf"
    return format(value, ".17g")


def _expression(terms, names) -> list[str]:
    parts = []
    for var, coef in terms:
        sign = "-" if coef < 0 else "+"
        parts.append(f"{sign} {_num(abs(coef))} {names[var]}")
    lines = []
    for i in range(0, len(parts), _TERMS_PER_LINE):
        lines.append(" ".join(parts[i : i + _TERMS_PER_LINE]))
    return lines or ["0"]


def export_lp(model: MilpModel, destination=None) -> str:
    """Write ``model`` in CPLEX LP format.

    With a ``destination`` the text goes to that file and the original to
    sanitized name map to ``<destination>.names.json``.
    """
    vnames = sanitize_names(model.variables)
    cnames = sanitize_names([c.name for c in model.constraints])
    used = set(model.objective)
    lines = [f"\\ {model.name}", "Minimize"]
    obj = _expression(list(model.objective.items()), vnames)
    if obj == ["0"] and model.variables:
        obj = [f"0 {vnames[next(iter(model.variables))]}"]
    lines.append(" obj: " + obj[0])
    lines.extend("   " + chunk for chunk in obj[1:])
    lines.append("Subject To")
    for con in model.constraints:
        used.update(var for var, _ in con.terms)
        expr = _expression(con.terms, vnames)
        if expr == ["0"] and model.variables:
            expr = [f"0 {vnames[next(iter(model.variables))]}"]
        expr[-1] += f" {con.sense} {_num(con.rhs)}"
        lines.append(f" {cnames[con.name]}: " + expr[0])
        lines.extend("   " + chunk for chunk in expr[1:])
    lines.append("Bounds")
    for var in model.variables.values():
        name = vnames[var.name]
        lb, ub = var.lb, var.ub
        if var.kind == "binary" and (lb, ub) == (0.0, 1.0):
            continue
        if (lb, ub) == (0.0, math.inf) and var.name in used:
            continue
        if lb == -math.inf and ub == math.inf:
            lines.append(f" {name} free")
        elif lb == ub:
            lines.append(f" {name} = {_num(lb)}")
        else:
            lines.append(f" {_num(lb)} <= {name} <= {_num(ub)}")
    binaries = [vnames[v] for v in model.binaries]
    if binaries:
        lines.append("Binary")
        lines.extend(" " + name for name in binaries)
    lines.append("End")
    text = "\n".join(lines) + "\n"
    if destination is not None:
        path = Path(destination)
        path.write_text(text)
        sidecar = {"variables": vnames, "constraints": cnames}
        path.with_name(path.name + ".names.json").write_text(json.dumps(sidecar, indent=1, sort_keys=True))
    return text


_SECTIONS = {
    "minimize": "min", "minimum": "min", "min": "min",
    "maximize": "max", "maximum": "max", "max": "max",
    "subject to": "st", "such that": "st", "st": "st", "s.t.": "st",
    "bounds": "bounds", "bound": "bounds",
    "binary": "bin", "binaries": "bin", "bin": "bin",
    "end": "end",
}
_TOKEN = re.compile(
    r"\s*(?:(?P<rel><=|>=|=<|=>|<|>|=)|(?P<num>[+-]?(?:inf(?:inity)?\b|(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?))"
    r"|(?P<op>[+-])|(?P<colon>:)|(?P<name>[A-Za-z_][A-Za-z0-9_.\[\]]*))",
    re.IGNORECASE,
)
_REL = {"<=": "<=", "=<": "<=", "<": "<=", ">=": ">=", "=>": ">=", ">": ">=", "=": "="}


def _tokens(text):
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise LpParseError(f"unexpected text near {text[pos:pos + 20]!r}")
        kind = m.lastgroup
        out.append((kind, m.group(kind)))
        pos = m.end()
    return out


def _to_float(tok):
    low = tok.lower().lstrip("+")
    if low in ("inf", "infinity"):
        return math.inf
    if low in ("-inf", "-infinity"):
        return -math.inf
    return float(tok)


def _parse_terms(tokens, i, stop):
    """Parse ``[+-] [coef] name ...`` starting at ``i`` until ``stop(token)``."""
    terms, sign, coef = [], 1.0, None
    while i < len(tokens) and not stop(tokens[i]):
        kind, tok = tokens[i]
        if kind == "op":
            sign = -sign if tok == "-" else sign
        elif kind == "num":
            value = _to_float(tok)
            coef = value if coef is None else coef * value
        elif kind == "name":
            terms.append((tok, sign * (1.0 if coef is None else coef)))
            sign, coef = 1.0, None
        else:
            raise LpParseError(f"unexpected {tok!r} in expression")
        i += 1
    return terms, i


def parse_lp(text: str) -> MilpModel:
    sections, current = {}, None
    for raw in text.splitlines():
        line = raw.split("\\", 1)[0].strip()
        if not line:
            continue
        key = _SECTIONS.get(line.lower())
        if key is not None:
            current = key
            sections.setdefault(current, [])
            if current == "end":
                break
            continue
        if current is None:
            raise LpParseError(f"text before the first section: {line!r}")
        sections[current].append(line)

    model = MilpModel("parsed")
    order: list[str] = []
    seen: set[str] = set()

    def declare(name):
        if name not in seen:
            seen.add(name)
            order.append(name)

    sense = "max" if "max" in sections else "min"
    obj_tokens = _tokens(" ".join(sections.get(sense, [])))
    if len(obj_tokens) >= 2 and obj_tokens[1][0] == "colon":
        obj_tokens = obj_tokens[2:]
    objective, _ = _parse_terms(obj_tokens, 0, lambda tok: False)
    for name, _ in objective:
        declare(name)

    rows = []
    tokens = _tokens(" ".join(sections.get("st", [])))
    i, counter = 0, 0
    while i < len(tokens):
        name = f"R{counter}"
        if i + 1 < len(tokens) and tokens[i][0] == "name" and tokens[i + 1][0] == "colon":
            name, i = tokens[i][1], i + 2
        terms, i = _parse_terms(tokens, i, lambda tok: tok[0] == "rel")
        if i >= len(tokens):
            raise LpParseError(f"constraint {name} has no relation")
        rel = _REL[tokens[i][1]]
        i += 1
        sign = 1.0
        while i < len(tokens) and tokens[i][0] == "op":
            sign = -sign if tokens[i][1] == "-" else sign
            i += 1
        if i >= len(tokens) or tokens[i][0] != "num":
            raise LpParseError(f"constraint {name} has no right-hand side")
        rhs = sign * _to_float(tokens[i][1])
        i += 1
        for var, _ in terms:
            declare(var)
        rows.append((name, terms, rel, rhs))
        counter += 1

    bounds = {}
    for line in sections.get("bounds", []):
        toks = _tokens(line)
        kinds = [k for k, _ in toks]
        if kinds == ["name", "name"] and toks[1][1].lower() == "free":
            bounds[toks[0][1]] = (-math.inf, math.inf)
        elif kinds == ["num", "rel", "name", "rel", "num"]:
            bounds[toks[2][1]] = (_to_float(toks[0][1]), _to_float(toks[4][1]))
        elif kinds == ["name", "rel", "num"]:
            lb, ub = bounds.get(toks[0][1], (0.0, math.inf))
            value, rel = _to_float(toks[2][1]), _REL[toks[1][1]]
            bounds[toks[0][1]] = (value, value) if rel == "=" else (value, ub) if rel == ">=" else (lb, value)
        else:
            raise LpParseError(f"cannot parse bound {line!r}")
    for name in bounds:
        declare(name)
    binaries = " ".join(sections.get("bin", [])).split()
    for name in binaries:
        declare(name)

    binary_set = set(binaries)
    for name in order:
        lb, ub = bounds.get(name, (0.0, 1.0 if name in binary_set else math.inf))
        model.add_variable(name, "binary" if name in binary_set else "continuous", lb, ub)
    for name, coef in objective:
        model.add_objective(name, -coef if sense == "max" else coef)
    for name, terms, rel, rhs in rows:
        model.add_constraint(name, terms, rel, rhs)
    return model
