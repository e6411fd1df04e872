"""Energy carriers: electricity, heat with temperature levels, gases with pressure levels."""

from __future__ import annotations

import math
from dataclasses import InitVar, dataclass

from ._fields import as_float, as_floats, as_series, series_problems, strictly_increasing


def _price_problems(name, price, n):
    if price is None:
        return []
    return series_problems(name, price, n, nonnegative=False)


@dataclass(frozen=True)
class Electricity:
    """Electricity carrier, split into a local-production and a grid bus.

    Without any price the location runs as an island. ``costs`` accepts the
    dictionary form ``{"working_price": .., "demand_rate": ..}``.
    """

    working_price: float | tuple[float, ...] | None = None
    demand_rate: float | None = None
    feed_in_price: float | tuple[float, ...] | None = None
    costs: InitVar[dict | None] = None

    kind = "Electricity"

    def __post_init__(self, costs):
        if costs:
            unknown = set(costs) - {"working_price", "demand_rate", "feed_in_price"}
            if unknown:
                raise TypeError(f"unknown cost keys {sorted(unknown)}")
            for key, value in costs.items():
                object.__setattr__(self, key, value)
        object.__setattr__(self, "working_price", as_series(self.working_price))
        object.__setattr__(self, "demand_rate", as_float(self.demand_rate))
        object.__setattr__(self, "feed_in_price", as_series(self.feed_in_price))

    def problems(self, n):
        out = _price_problems("working_price", self.working_price, n)
        out += _price_problems("feed_in_price", self.feed_in_price, n)
        if self.demand_rate is not None and not math.isfinite(self.demand_rate):
            out.append(("demand_rate", "demand rate is not finite"))
        return out


@dataclass(frozen=True)
class Heat:
    temperature_levels: tuple[float, ...]
    reference_temperature: float = 0.0

    kind = "Heat"

    def __post_init__(self):
        object.__setattr__(self, "temperature_levels", as_floats(self.temperature_levels))
        object.__setattr__(self, "reference_temperature", as_float(self.reference_temperature))

    @property
    def levels(self):
        return self.temperature_levels

    def problems(self, n=None):
        levels = self.temperature_levels
        if not levels:
            return [("temperature_levels", "at least one temperature level is required")]
        out = []
        if not strictly_increasing(levels):
            out.append(("temperature_levels", f"levels {list(levels)} are not strictly increasing"))
        if self.reference_temperature >= min(levels):
            out.append(
                (
                    "reference_temperature",
                    f"reference temperature {self.reference_temperature:g} is not below "
                    f"the lowest level {min(levels):g}",
                )
            )
        return out


@dataclass(frozen=True)
class GasCarrier:
    """Gas at discrete pressure levels (bar); expansion downwards is free.

    Grid gas, if priced, enters at ``grid_pressure`` (default: lowest level).
    """

    pressure_levels: tuple[float, ...]
    working_price: float | tuple[float, ...] | None = None
    grid_pressure: float | None = None

    kind = "Gas"

    def __post_init__(self):
        object.__setattr__(self, "pressure_levels", as_floats(self.pressure_levels))
        object.__setattr__(self, "working_price", as_series(self.working_price))
        object.__setattr__(self, "grid_pressure", as_float(self.grid_pressure))

    @property
    def levels(self):
        return self.pressure_levels

    @property
    def grid_level(self):
        if self.grid_pressure is not None:
            return self.grid_pressure
        return self.pressure_levels[0]

    def problems(self, n):
        levels = self.pressure_levels
        if not levels:
            return [("pressure_levels", "at least one pressure level is required")]
        out = []
        if not strictly_increasing(levels):
            out.append(("pressure_levels", f"levels {list(levels)} are not strictly increasing"))
        if min(levels) < 0:
            out.append(("pressure_levels", "pressure levels must be nonnegative"))
        if self.grid_pressure is not None and self.grid_pressure not in levels:
            out.append(("grid_pressure", f"grid pressure {self.grid_pressure:g} not among pressure levels"))
        out += _price_problems("working_price", self.working_price, n)
        return out


@dataclass(frozen=True)
class NaturalGas(GasCarrier):
    kind = "NaturalGas"


@dataclass(frozen=True)
class Hydrogen(GasCarrier):
    kind = "Hydrogen"


CARRIER_TYPES = {cls.kind: cls for cls in (Electricity, Heat, NaturalGas, Hydrogen)}
GAS_KINDS = ("NaturalGas", "Hydrogen")
