"""YAML front end: parse model documents, resolve CSV series, export canonical YAML."""

from __future__ import annotations

import csv
import dataclasses
import math
from pathlib import Path

import yaml

from .model.carriers import CARRIER_TYPES
from .model.demands import DEMAND_TYPES
from .model.system import EnergySystem, Link, Location, SpecError
from .model.technologies import COMPONENT_TYPES
from .model.timeindex import TimeIndex, to_datetime

SERIES_FIELDS = {"working_price", "feed_in_price", "time_series", "air_temperature", "temperature", "power_limit",
                 "max_power"}


class SchemaError(ValueError):
    def __init__(self, path, message):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class SeriesLengthMismatch(SchemaError):
    pass


class FileNotFound(SchemaError):
    pass


class ColumnNotFound(SchemaError):
    pass


class MissingNaNTerminator(ValueError):
    pass


class TimestampMismatch(ValueError):
    pass


class NonNumericValue(ValueError):
    pass


class _StrictLoader(yaml.SafeLoader):
    """SafeLoader that refuses duplicate mapping keys instead of keeping the last one."""

    def construct_mapping(self, node, deep=False):
        keys = set()
        for key_node, _ in node.value:
            key = self.construct_object(key_node, deep=True)
            if key in keys:
                raise SchemaError(
                    "",
                    f"duplicate key {key!r} at line {key_node.start_mark.line + 1}; "
                    "give demands as a list of single-key maps",
                )
            keys.add(key)
        return super().construct_mapping(node, deep=deep)


# -- CSV ----------------------------------------------------------------------


def _is_nan(text: str) -> bool:
    text = text.strip()
    if text == "":
        return True
    try:
        return math.isnan(float(text))
    except ValueError:
        return False


def resolve_csv_series(path, column, time_index: TimeIndex) -> tuple[float, ...]:
    """Read a left-indexed column: one row per boundary, the last row carrying NaN."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFound("", f"time series file {str(path)!r} not found")
    with path.open(newline="", encoding="utf-8-sig") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ColumnNotFound("", f"{path} is empty")
    header = [h.strip() for h in rows[0]]
    if column not in header[1:]:
        raise ColumnNotFound("", f"column {column!r} not in {path} (columns: {header[1:]})")
    col = header.index(column)
    body = [r for r in rows[1:] if any(cell.strip() for cell in r)]
    try:
        stamps = [to_datetime(r[0]) for r in body]
    except ValueError as err:
        raise TimestampMismatch(f"{path}: {err}") from err
    boundaries = list(time_index.boundaries)
    n = len(boundaries) - 1
    if stamps == boundaries[:n]:
        raise MissingNaNTerminator(f"{path}: no NaN row at the final boundary {boundaries[-1]}")
    if stamps != boundaries:
        raise TimestampMismatch(f"{path}: timestamps {[str(s) for s in stamps]} do not match the time index")
    cells = [r[col] if col < len(r) else "" for r in body]
    if not _is_nan(cells[-1]):
        raise MissingNaNTerminator(f"{path}: final row {boundaries[-1]} must be NaN, got {cells[-1]!r}")
    values = []
    for stamp, cell in zip(stamps[:-1], cells[:-1]):
        try:
            value = float(cell)
        except ValueError:
            raise NonNumericValue(f"{path}: value {cell!r} at {stamp} is not numeric") from None
        if math.isnan(value):
            raise NonNumericValue(f"{path}: NaN at {stamp} inside the horizon")
        values.append(value)
    return tuple(values)


# -- parsing ------------------------------------------------------------------


def _expect_map(value, path):
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise SchemaError(path, f"expected a mapping, got {type(value).__name__}")
    return value


def _check_keys(mapping, allowed, path):
    unknown = sorted(set(mapping) - set(allowed), key=str)
    if unknown:
        raise SchemaError(f"{path}.{unknown[0]}".lstrip("."), f"unknown key (allowed: {sorted(allowed)})")


def _is_number(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _check_type(annotation, value, path):
    """Reject values whose shape cannot match the field annotation, naming the field."""
    options = [part.strip() for part in str(annotation).split("|")]
    if value is None and "None" in options:
        return
    if _is_number(value) and "float" in options:
        return
    if isinstance(value, str) and "str" in options:
        return
    if isinstance(value, (list, tuple)) and "tuple[float, ...]" in options:
        if all(_is_number(v) for v in value):
            return
    if isinstance(value, (list, tuple)) and "tuple[tuple[float, float], ...]" in options:
        if all(isinstance(v, (list, tuple)) and len(v) == 2 and all(_is_number(x) for x in v) for v in value):
            return
    expected = " or ".join("null" if o == "None" else "number" if o == "float" else o for o in options)
    raise SchemaError(path, f"expected {expected}, got {value!r}")


def _series(value, path, ctx):
    if isinstance(value, str) and value.strip().startswith("file="):
        ref = value.strip()[len("file="):]
        if ":" not in ref:
            raise SchemaError(path, f"series reference {value!r} lacks ':<column>'")
        file_part, column = ref.rsplit(":", 1)
        try:
            return resolve_csv_series(ctx["base"] / file_part.strip(), column.strip(), ctx["time_index"])
        except SchemaError as err:
            raise type(err)(path, str(err).lstrip(": ")) from None
        except (MissingNaNTerminator, TimestampMismatch, NonNumericValue) as err:
            raise type(err)(f"{path}: {err}") from None
    if isinstance(value, list):
        if len(value) != ctx["n"]:
            raise SeriesLengthMismatch(path, f"series has {len(value)} values, time index has {ctx['n']} intervals")
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            raise SchemaError(path, "series values must be numbers")
    return value


def _build(cls, params, path, ctx):
    params = _expect_map(params, path)
    types = {f.name: f.type for f in dataclasses.fields(cls) if f.init}
    _check_keys(params, types, path)
    kwargs = {}
    for key, value in params.items():
        if key in SERIES_FIELDS:
            value = _series(value, f"{path}.{key}", ctx)
        _check_type(types[key], value, f"{path}.{key}")
        if key == "stages" and value is not None:
            value = [tuple(stage) for stage in value]
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as err:
        raise SchemaError(path, str(err)) from None


def _parse_demands(value, path, ctx):
    if value is None:
        return []
    items = []
    if isinstance(value, list):
        for i, entry in enumerate(value):
            p = f"{path}[{i}]"
            if not isinstance(entry, dict) or len(entry) != 1:
                raise SchemaError(p, "each demand must be a single-key map {Type: {...}}")
            (kind, params), = entry.items()
            items.append((kind, params, p))
    elif isinstance(value, dict):
        for name, params in value.items():
            p = f"{path}.{name}"
            params = dict(_expect_map(params, p))
            if "type" not in params:
                raise SchemaError(p, "name-keyed demands need a 'type' field")
            kind = params.pop("type")
            if params.setdefault("name", name) != name:
                raise SchemaError(f"{p}.name", "demand name differs from its key")
            items.append((kind, params, p))
    else:
        raise SchemaError(path, "demands must be a list or a mapping")
    out = []
    for kind, params, p in items:
        if kind not in DEMAND_TYPES:
            raise SchemaError(p, f"unknown demand type {kind!r} (known: {sorted(DEMAND_TYPES)})")
        demand = _build(DEMAND_TYPES[kind], params, p, ctx)
        out.append((demand, p))
    return out


def _parse_location(name, body, ctx):
    path = f"locations.{name}"
    body = _expect_map(body, path)
    _check_keys(body, ("carriers", "demands", "components"), path)
    loc = Location(name=str(name))
    for kind, params in _expect_map(body.get("carriers"), f"{path}.carriers").items():
        p = f"{path}.carriers.{kind}"
        if kind not in CARRIER_TYPES:
            raise SchemaError(p, f"unknown carrier {kind!r} (known: {sorted(CARRIER_TYPES)})")
        loc.carriers[kind] = _build(CARRIER_TYPES[kind], params, p, ctx)
    for kind, params in _expect_map(body.get("components"), f"{path}.components").items():
        p = f"{path}.components.{kind}"
        if kind not in COMPONENT_TYPES:
            raise SchemaError(p, f"unknown component {kind!r} (known: {sorted(COMPONENT_TYPES)})")
        params = _expect_map(params, p)
        _check_keys(params, ("parameters",), p)
        loc.components[kind] = _build(COMPONENT_TYPES[kind], params.get("parameters"), f"{p}.parameters", ctx)
    for demand, p in _parse_demands(body.get("demands"), f"{path}.demands", ctx):
        if demand.name in loc.demands:
            raise SchemaError(p, f"duplicate demand name {demand.name!r}")
        loc.demands[demand.name] = demand
    return loc


def parse(text: str, base_dir=".") -> EnergySystem:
    """Build an EnergySystem from a YAML document; file references resolve against ``base_dir``."""
    try:
        doc = yaml.load(text, Loader=_StrictLoader)
    except yaml.YAMLError as err:
        raise SchemaError("", f"invalid YAML: {err}") from None
    doc = _expect_map(doc, "")
    _check_keys(doc, ("general", "locations", "links"), "")
    if "general" not in doc:
        raise SchemaError("general", "missing section")
    general = _expect_map(doc["general"], "general")
    _check_keys(general, ("timeindex",), "general")
    ti = _expect_map(general.get("timeindex"), "general.timeindex")
    _check_keys(ti, ("start", "end", "freq"), "general.timeindex")
    missing = [k for k in ("start", "end", "freq") if k not in ti]
    if missing:
        raise SchemaError(f"general.timeindex.{missing[0]}", "missing")
    try:
        time_index = TimeIndex(start=ti["start"], end=ti["end"], freq=str(ti["freq"]))
    except ValueError as err:
        raise SchemaError("general.timeindex", str(err)) from None
    ctx = {"base": Path(base_dir), "time_index": time_index, "n": len(time_index)}
    system = EnergySystem(time_index=time_index)
    for name, body in _expect_map(doc.get("locations"), "locations").items():
        system.locations[str(name)] = _parse_location(name, body, ctx)
    links = doc.get("links") or []
    if not isinstance(links, list):
        raise SchemaError("links", "expected a list")
    for i, entry in enumerate(links):
        link = _build(Link, entry, f"links[{i}]", ctx)
        try:
            system.add_link(link)
        except SpecError as err:
            raise SchemaError(f"links[{i}]", str(err)) from None
    return system


def load(path) -> EnergySystem:
    path = Path(path)
    return parse(path.read_text(encoding="utf-8"), base_dir=path.parent)


# -- export -------------------------------------------------------------------


def _plain(value):
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    return value


def _params(obj, skip=()):
    out = {}
    for f in dataclasses.fields(obj):
        if f.name in skip:
            continue
        value = getattr(obj, f.name)
        if value is not None:
            out[f.name] = _plain(value)
    return out


def to_document(system: EnergySystem) -> dict:
    ti = system.time_index
    locations = {}
    for name in sorted(system.locations):
        loc = system.locations[name]
        body = {}
        if loc.carriers:
            body["carriers"] = {k: _params(loc.carriers[k]) for k in sorted(loc.carriers)}
        if loc.demands:
            body["demands"] = [{d.kind: _params(d)} for d in (loc.demands[k] for k in sorted(loc.demands))]
        if loc.components:
            body["components"] = {k: {"parameters": _params(loc.components[k])} for k in sorted(loc.components)}
        locations[name] = body
    doc = {
        "general": {"timeindex": {"start": ti.start, "end": ti.end, "freq": ti.freq}},
        "locations": locations,
    }
    if system.links:
        doc["links"] = [_params(system.links[k]) for k in sorted(system.links)]
    return doc


def export_yaml(system: EnergySystem) -> str:
    """Canonical, self-contained YAML (series inlined, keys sorted)."""
    return yaml.safe_dump(to_document(system), sort_keys=True, allow_unicode=True, default_flow_style=None)
