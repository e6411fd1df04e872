"""Containers (EnergySystem, Location, Link) and whole-system validation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .carriers import GAS_KINDS
from .technologies import ANERGY_KINDS
from .timeindex import TimeIndex


class SpecError(ValueError):
    pass


class DuplicateLocation(SpecError):
    pass


class DuplicateCarrier(SpecError):
    pass


class DuplicateComponent(SpecError):
    pass


class DuplicateDemandName(SpecError):
    pass


@dataclass
class Location:
    """Carriers, components and demands sharing automatic wiring.

    Each carrier kind and component kind may appear once; demand names are
    unique within the location.
    """

    name: str
    carriers: dict = field(default_factory=dict)
    components: dict = field(default_factory=dict)
    demands: dict = field(default_factory=dict)

    def add_carrier(self, carrier):
        if carrier.kind in self.carriers:
            raise DuplicateCarrier(f"location {self.name!r} already has a {carrier.kind} carrier")
        self.carriers[carrier.kind] = carrier
        return self

    def add_component(self, component):
        if component.kind in self.components:
            raise DuplicateComponent(f"location {self.name!r} already has a {component.kind}")
        self.components[component.kind] = component
        return self

    def add_demand(self, demand):
        if demand.name in self.demands:
            raise DuplicateDemandName(f"location {self.name!r} already has a demand named {demand.name!r}")
        self.demands[demand.name] = demand
        return self

    def add(self, item):
        from .carriers import CARRIER_TYPES
        from .technologies import COMPONENT_TYPES

        if isinstance(item, tuple(CARRIER_TYPES.values())):
            return self.add_carrier(item)
        if isinstance(item, tuple(COMPONENT_TYPES.values())):
            return self.add_component(item)
        return self.add_demand(item)


@dataclass(frozen=True)
class Link:
    """Lossless bidirectional connection of one carrier between two locations.

    Heat and gas links run at a single ``level`` (°C or bar). ``capacity``
    limits each direction separately.
    """

    location_a: str
    location_b: str
    carrier: str
    capacity: float | None = None
    level: float | None = None

    def __post_init__(self):
        if self.capacity is not None:
            object.__setattr__(self, "capacity", float(self.capacity))
        if self.level is not None:
            object.__setattr__(self, "level", float(self.level))

    @property
    def key(self):
        return (self.location_a, self.location_b, self.carrier)


@dataclass
class EnergySystem:
    time_index: TimeIndex
    locations: dict = field(default_factory=dict)
    links: dict = field(default_factory=dict)

    def __post_init__(self):
        if isinstance(self.time_index, dict):
            self.time_index = TimeIndex(**self.time_index)
        if isinstance(self.locations, (list, tuple)):
            locations, self.locations = self.locations, {}
            for location in locations:
                self.add(location)
        if isinstance(self.links, (list, tuple)):
            links, self.links = self.links, {}
            for link in links:
                self.add_link(link)

    def add(self, location: Location):
        if location.name in self.locations:
            raise DuplicateLocation(f"location {location.name!r} already registered")
        self.locations[location.name] = location
        return self

    def add_link(self, link: Link):
        if link.key in self.links:
            raise SpecError(f"link {link.key} already registered")
        self.links[link.key] = link
        return self

    def validate(self):
        return validate(self)

    def optimise(self, **options):
        from ..lowering import LoweringOptions, lower
        from ..solver import solve_milp

        model = lower(self, LoweringOptions(**options))
        return model, solve_milp(model)


@dataclass(frozen=True)
class ValidationIssue:
    path: str
    message: str

    def __str__(self):
        return f"{self.path}: {self.message}"


@dataclass
class ValidationReport:
    issues: list = field(default_factory=list)

    def add(self, path, message):
        self.issues.append(ValidationIssue(path, message))

    @property
    def ok(self) -> bool:
        return not self.issues

    def __bool__(self):
        return bool(self.issues)

    def __len__(self):
        return len(self.issues)

    def __iter__(self):
        return iter(self.issues)

    def __str__(self):
        return "\n".join(str(issue) for issue in self.issues)


def _fmt(values):
    return "[" + ", ".join(f"{v:g}" for v in values) + "]"


def _level_count_check(report, path, name, limits, levels):
    if isinstance(limits, tuple) and len(limits) != len(levels):
        report.add(f"{path}.{name}", f"{len(limits)} values given for {len(levels)} levels")


def _validate_location(loc: Location, n: int, report: ValidationReport):
    base = f"locations.{loc.name}"
    carriers = loc.carriers
    heat = carriers.get("Heat")

    for kind, carrier in sorted(carriers.items()):
        for name, msg in carrier.problems(n):
            report.add(f"{base}.carriers.{kind}.{name}", msg)

    def need(path, kind, who):
        if kind not in carriers:
            report.add(path, f"{who} requires a {kind} carrier")
            return False
        return True

    for dname, demand in sorted(loc.demands.items()):
        path = f"{base}.demands[{dname}]"
        for name, msg in demand.problems(n):
            report.add(f"{path}.{name}", msg)
        if demand.kind == "Electricity":
            need(path, "Electricity", "electricity demand")
        elif demand.kind == "FixedTemperatureHeat":
            if need(path, "Heat", "heat demand") and not heat.problems():
                if demand.flow_temperature not in heat.levels:
                    report.add(
                        f"{path}.flow_temperature",
                        f"temperature {demand.flow_temperature:g} not among carrier levels {_fmt(heat.levels)}",
                    )
                allowed = heat.levels + (heat.reference_temperature,)
                if demand.return_temperature not in allowed:
                    report.add(
                        f"{path}.return_temperature",
                        f"temperature {demand.return_temperature:g} not among carrier levels "
                        f"{_fmt(heat.levels)} or the reference temperature",
                    )
        elif demand.kind == "GasDemand" and demand.gas in GAS_KINDS:
            if need(path, demand.gas, "gas demand") and demand.pressure not in carriers[demand.gas].levels:
                report.add(
                    f"{path}.pressure",
                    f"pressure {demand.pressure:g} not among carrier levels {_fmt(carriers[demand.gas].levels)}",
                )

    comps = loc.components
    for kind, comp in sorted(comps.items()):
        path = f"{base}.components.{kind}"
        for name, msg in comp.problems(n):
            report.add(f"{path}.{name}", msg)
        if kind == "HeatPump":
            need(path, "Heat", "heat pump")
            need(path, "Electricity", "heat pump")
            if not any(k in comps for k in ANERGY_KINDS):
                report.add(path, "heat pump has no anergy source")
        elif kind == "CHP":
            ok = need(path, comp.gas, "CHP") if comp.gas in GAS_KINDS else False
            need(path, "Electricity", "CHP")
            if need(path, "Heat", "CHP") and comp.outlet_temperature not in heat.levels:
                report.add(
                    f"{path}.outlet_temperature",
                    f"temperature {comp.outlet_temperature:g} not among carrier levels {_fmt(heat.levels)}",
                )
            if ok and comp.gas_pressure is not None and comp.gas_pressure not in carriers[comp.gas].levels:
                report.add(f"{path}.gas_pressure", f"pressure {comp.gas_pressure:g} not among carrier levels")
        elif kind in ("RenewableSource", "Battery"):
            need(path, "Electricity", kind)
        elif kind in ("MixedHeatStorage", "LayeredHeatStorage"):
            if need(path, "Heat", kind) and kind == "MixedHeatStorage":
                for name in ("input_limits", "output_limits", "weights"):
                    _level_count_check(report, path, name, getattr(comp, name), heat.levels)
        elif kind == "GasStorage" and comp.gas in GAS_KINDS:
            if need(path, comp.gas, kind):
                for name in ("input_limits", "output_limits", "weights"):
                    _level_count_check(report, path, name, getattr(comp, name), carriers[comp.gas].levels)
        elif kind == "Electrolyzer":
            need(path, "Electricity", kind)
            if need(path, "Hydrogen", kind):
                if not any(p <= comp.output_pressure for p in carriers["Hydrogen"].levels):
                    report.add(
                        f"{path}.output_pressure",
                        f"no hydrogen pressure level at or below {comp.output_pressure:g} bar",
                    )
        elif kind == "Compressor" and comp.gas in GAS_KINDS:
            need(path, "Electricity", kind)
            if need(path, comp.gas, kind):
                levels = carriers[comp.gas].levels
                if comp.stages is None and len(levels) < 2:
                    report.add(path, "compressor needs at least two pressure levels")
                for i, stage in enumerate(comp.stages or ()):
                    missing = [p for p in stage if p not in levels]
                    if missing:
                        report.add(f"{path}.stages[{i}]", f"pressure {missing[0]:g} not among carrier levels")


def validate(system: EnergySystem) -> ValidationReport:
    """Collect every problem that would prevent lowering; never mutates ``system``."""
    report = ValidationReport()
    n = len(system.time_index)
    for name in sorted(system.locations):
        _validate_location(system.locations[name], n, report)
    for key in sorted(system.links):
        link = system.links[key]
        path = f"links[{link.location_a}-{link.location_b}:{link.carrier}]"
        if link.location_a == link.location_b:
            report.add(path, "a link must connect two different locations")
        for end in (link.location_a, link.location_b):
            loc = system.locations.get(end)
            if loc is None:
                report.add(path, f"unknown location {end!r}")
            elif link.carrier not in loc.carriers:
                report.add(path, f"location {end!r} has no {link.carrier} carrier")
            elif link.carrier != "Electricity" and link.level not in loc.carriers[link.carrier].levels:
                report.add(path, f"link level {link.level} not among the levels of {end!r}")
        if link.capacity is not None and not (math.isfinite(link.capacity) and link.capacity >= 0):
            report.add(path, "capacity must be a finite value >= 0")
    return report
