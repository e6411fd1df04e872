"""Flow records, CSV export and graph documents (DOT, GraphML) for lowered models."""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass
from pathlib import Path
from xml.sax.saxutils import escape

DOT_SHAPES = {"source": "trapezium", "sink": "invtrapezium", "bus": "circle", "converter": "octagon"}
YED_SHAPES = {"source": "trapezoid", "sink": "trapezoid2", "bus": "ellipse", "converter": "octagon"}
TAG_KEYS = ("location", "carrier", "component", "demand", "level", "origin")


class NoSolution(RuntimeError):
    pass


class IoFailure(OSError):
    pass


@dataclass(frozen=True)
class FlowRecord:
    time: object
    source: str
    target: str
    value: float
    tags: frozenset
    variable: str = ""


def _norm(text) -> str:
    # "heat-pump", "Heat pump" and "HeatPump" all compare equal
    return re.sub(r"[^a-z0-9.]", "", str(text).lower())


def _matcher(filter):
    wanted = []
    for key, value in (filter or {}).items():
        if key not in TAG_KEYS:
            raise ValueError(f"unknown tag key {key!r} (known: {list(TAG_KEYS)})")
        values = value if isinstance(value, (list, tuple, set, frozenset)) else [value]
        wanted.append((key, {_norm(v) for v in values}))

    def match(tags):
        parsed = {}
        for tag in tags:
            key, _, val = tag.partition(":")
            parsed.setdefault(key, set()).add(_norm(val))
        return all(parsed.get(key, set()) & values for key, values in wanted)

    return match


def flows(solution, model, filter=None) -> list[FlowRecord]:
    """Flow records whose tags satisfy every ``filter`` entry, ordered by (time, source, target).

    A filter value may be a single value or a collection (any of them matches).
    """
    if solution is None or not getattr(solution, "optimal", False):
        status = getattr(solution, "status", "missing")
        raise NoSolution(f"no optimal solution to report on (status: {status})")
    match = _matcher(filter)
    records = []
    for var, edge in model.flow_registry.items():
        if not match(edge.tags):
            continue
        time = model.timestamps[edge.interval] if model.timestamps else edge.interval
        value = float(solution.values[var])
        if abs(value) < 1e-12:
            value = 0.0
        records.append(FlowRecord(time, edge.source, edge.target, value, edge.tags, var))
    records.sort(key=lambda r: (r.time, r.source, r.target, r.variable))
    return records


def total(records) -> float:
    return sum(r.value for r in records)


def _time_text(time):
    return time.isoformat(sep=" ") if hasattr(time, "isoformat") else str(time)


def to_csv(records, destination=None) -> str:
    """Write ``time,source,target,value,tags``; returns the text, also written to ``destination`` if given."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(["time", "source", "target", "value", "tags"])
    for r in records:
        writer.writerow([_time_text(r.time), r.source, r.target, repr(float(r.value)), ";".join(sorted(r.tags))])
    text = buf.getvalue()
    if destination is not None:
        try:
            Path(destination).write_text(text, encoding="utf-8", newline="")
        except OSError as err:
            raise IoFailure(f"cannot write {destination}: {err}") from err
    return text


# -- graphs -------------------------------------------------------------------


def _edges(model):
    seen = []
    index = set()
    for edge in model.flow_registry.values():
        key = (edge.source, edge.target)
        if key not in index:
            index.add(key)
            seen.append(key)
    return seen


def _quote(text) -> str:
    return '"' + str(text).replace("\\", "\\\\").replace('"', '\\"') + '"'


def _cluster_tree(model):
    tree: dict = {}
    loose = []
    for node in model.nodes.values():
        if not node.cluster:
            loose.append(node)
            continue
        branch = tree
        for part in node.cluster:
            branch = branch.setdefault(part, {})
        branch.setdefault(None, []).append(node)
    return tree, loose


def _dot(model) -> str:
    lines = [f"digraph {_quote(model.name)} {{", "  rankdir=LR;"]

    def node_line(node, indent):
        return (f"{indent}{_quote(node.id)} [shape={DOT_SHAPES[node.kind]}, "
                f"label={_quote(node.label)}, kind={node.kind}];")

    def emit(branch, path, indent):
        for name in sorted(k for k in branch if k is not None):
            sub = path + (name,)
            cid = "cluster_" + re.sub(r"[^A-Za-z0-9_]", "_", "_".join(sub))
            lines.append(f"{indent}subgraph {_quote(cid)} {{")
            lines.append(f"{indent}  label={_quote(name)};")
            emit(branch[name], sub, indent + "  ")
            lines.append(f"{indent}}}")
        for node in branch.get(None, []):
            lines.append(node_line(node, indent))

    tree, loose = _cluster_tree(model)
    emit(tree, (), "  ")
    for node in loose:
        lines.append(node_line(node, "  "))
    for source, target in _edges(model):
        lines.append(f"  {_quote(source)} -> {_quote(target)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _graphml(model) -> str:
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<graphml xmlns="http://graphml.graphdrawing.org/xmlns" '
        'xmlns:y="http://www.yworks.com/xml/graphml">',
        '  <key id="d0" for="node" yfiles.type="nodegraphics"/>',
        '  <key id="d1" for="node" attr.name="kind" attr.type="string"/>',
        '  <key id="d2" for="node" attr.name="cluster" attr.type="string"/>',
        f'  <graph id="{escape(model.name)}" edgedefault="directed">',
    ]
    for node in model.nodes.values():
        out += [
            f'    <node id="{escape(node.id)}">',
            f"      <data key=\"d1\">{node.kind}</data>",
            f"      <data key=\"d2\">{escape('/'.join(node.cluster))}</data>",
            '      <data key="d0"><y:ShapeNode>'
            f'<y:Shape type="{YED_SHAPES[node.kind]}"/>'
            f"<y:NodeLabel>{escape(node.label)}</y:NodeLabel></y:ShapeNode></data>",
            "    </node>",
        ]
    for i, (source, target) in enumerate(_edges(model)):
        out.append(f'    <edge id="e{i}" source="{escape(source)}" target="{escape(target)}"/>')
    out += ["  </graph>", "</graphml>"]
    return "\n".join(out) + "\n"


def export_graph(model, format="dot") -> str:
    """Graph of the lowered model with one cluster per location and one sub-cluster per group."""
    if format == "dot":
        return _dot(model)
    if format == "graphml":
        return _graphml(model)
    raise ValueError(f"unknown graph format {format!r} (use 'dot' or 'graphml')")


_DOT_NODE = re.compile(r'^\s*"((?:[^"\\]|\\.)*)"\s*\[(.*)\];\s*$')
_DOT_EDGE = re.compile(r'^\s*"((?:[^"\\]|\\.)*)"\s*->\s*"((?:[^"\\]|\\.)*)"\s*;\s*$')
_DOT_ATTR = re.compile(r'(\w+)=("(?:[^"\\]|\\.)*"|[^,\s]+)')
_DOT_CLUSTER = re.compile(r'^\s*subgraph\s+"(cluster_[^"]*)"\s*\{\s*$')


def _unquote(text):
    if text.startswith('"'):
        text = text[1:-1]
    return re.sub(r"\\(.)", r"\1", text)


def parse_dot(text: str):
    """Read back nodes ``{id: {attrs, clusters}}`` and edges from text written by :func:`export_graph`."""
    nodes, edges, stack = {}, [], []
    for line in text.splitlines():
        if m := _DOT_CLUSTER.match(line):
            stack.append(m.group(1))
        elif line.strip() == "}" and stack:
            stack.pop()
        elif m := _DOT_EDGE.match(line):
            edges.append((_unquote('"' + m.group(1) + '"'), _unquote('"' + m.group(2) + '"')))
        elif m := _DOT_NODE.match(line):
            attrs = {k: _unquote(v) for k, v in _DOT_ATTR.findall(m.group(2))}
            attrs["clusters"] = tuple(stack)
            nodes[_unquote('"' + m.group(1) + '"')] = attrs
    return nodes, edges
