"""Demands: fixed time series of power drawn from a carrier."""

from __future__ import annotations

from dataclasses import dataclass

from ._fields import as_float, as_series, series_problems
from .carriers import GAS_KINDS


@dataclass(frozen=True)
class Electricity:
    name: str
    time_series: tuple[float, ...]

    kind = "Electricity"
    carrier = "Electricity"

    def __post_init__(self):
        object.__setattr__(self, "time_series", as_series(self.time_series))

    def problems(self, n):
        return series_problems("time_series", self.time_series, n)


@dataclass(frozen=True)
class FixedTemperatureHeat:
    """Heat drawn at ``flow_temperature`` with water returned at ``return_temperature``.

    ``time_series`` is the net power delivered (draw minus return).
    """

    name: str
    flow_temperature: float
    return_temperature: float
    time_series: tuple[float, ...]

    kind = "FixedTemperatureHeat"
    carrier = "Heat"

    def __post_init__(self):
        object.__setattr__(self, "flow_temperature", as_float(self.flow_temperature))
        object.__setattr__(self, "return_temperature", as_float(self.return_temperature))
        object.__setattr__(self, "time_series", as_series(self.time_series))

    def problems(self, n):
        out = series_problems("time_series", self.time_series, n)
        if self.flow_temperature <= self.return_temperature:
            out.append(
                (
                    "return_temperature",
                    f"return temperature {self.return_temperature:g} is not below "
                    f"flow temperature {self.flow_temperature:g}",
                )
            )
        return out


@dataclass(frozen=True)
class GasDemand:
    name: str
    pressure: float
    time_series: tuple[float, ...]
    gas: str = "Hydrogen"

    kind = "GasDemand"

    def __post_init__(self):
        object.__setattr__(self, "pressure", as_float(self.pressure))
        object.__setattr__(self, "time_series", as_series(self.time_series))

    @property
    def carrier(self):
        return self.gas

    def problems(self, n):
        out = series_problems("time_series", self.time_series, n)
        if self.gas not in GAS_KINDS:
            out.append(("gas", f"unknown gas {self.gas!r}, expected one of {list(GAS_KINDS)}"))
        return out


DEMAND_TYPES = {cls.kind: cls for cls in (Electricity, FixedTemperatureHeat, GasDemand)}
