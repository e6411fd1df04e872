"""Components: converters, sources and storages placed at a location.

``None`` as a power or energy limit means unlimited.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ._fields import as_float, as_series, series_problems, strictly_increasing
from .carriers import GAS_KINDS


def _nonneg(name, value):
    if value is None:
        return []
    if not math.isfinite(value) or value < 0:
        return [(name, f"{name} must be a finite value >= 0, got {value:g}")]
    return []


def _positive(name, value):
    if value is None or not math.isfinite(value) or value <= 0:
        return [(name, f"{name} must be > 0, got {value!r}")]
    return []


def _fraction(name, value, allow_zero=False):
    lo_ok = value is not None and (value >= 0 if allow_zero else value > 0)
    if not (lo_ok and value <= 1):
        bound = "[0, 1]" if allow_zero else "(0, 1]"
        return [(name, f"{name} must lie in {bound}, got {value!r}")]
    return []


def _level_limits(name, limits):
    if limits is None:
        return []
    values = (limits,) if isinstance(limits, float) else limits
    if any(v < 0 or math.isnan(v) for v in values):
        return [(name, "limits must be >= 0")]
    return []


@dataclass(frozen=True)
class HeatPump:
    cop_0_35: float
    thermal_power_limit: float | None = None

    kind = "HeatPump"

    def __post_init__(self):
        object.__setattr__(self, "cop_0_35", as_float(self.cop_0_35))
        object.__setattr__(self, "thermal_power_limit", as_float(self.thermal_power_limit))

    def problems(self, n):
        out = _nonneg("thermal_power_limit", self.thermal_power_limit)
        if not self.cop_0_35 > 1:
            out.append(("cop_0_35", f"cop_0_35 must be > 1, got {self.cop_0_35:g}"))
        return out


@dataclass(frozen=True)
class AirHeatExchanger:
    air_temperature: tuple[float, ...]
    power_limit: tuple[float, ...] | None = None

    kind = "AirHeatExchanger"
    anergy = True

    def __post_init__(self):
        object.__setattr__(self, "air_temperature", as_series(self.air_temperature))
        object.__setattr__(self, "power_limit", as_series(self.power_limit))

    @property
    def temperature(self):
        return self.air_temperature

    total_limit = None

    def problems(self, n):
        return series_problems("air_temperature", self.air_temperature, n, nonnegative=False) + series_problems(
            "power_limit", self.power_limit, n
        )


@dataclass(frozen=True)
class GeothermalSource:
    """Ground source; ``total_limit`` caps the energy drawn over the horizon (kWh)."""

    temperature: tuple[float, ...]
    power_limit: tuple[float, ...] | None = None
    total_limit: float | None = None

    kind = "GeothermalSource"
    anergy = True

    def __post_init__(self):
        object.__setattr__(self, "temperature", as_series(self.temperature))
        object.__setattr__(self, "power_limit", as_series(self.power_limit))
        object.__setattr__(self, "total_limit", as_float(self.total_limit))

    def problems(self, n):
        return (
            series_problems("temperature", self.temperature, n, nonnegative=False)
            + series_problems("power_limit", self.power_limit, n)
            + _nonneg("total_limit", self.total_limit)
        )


@dataclass(frozen=True)
class CHP:
    """Gas-fired combined heat and power unit.

    ``model="constant"`` uses fixed efficiencies. ``model="offset-linear"`` adds
    an on/off binary and fits a line through the part-load point
    (``min_load``, ``*_efficiency_min``) and the full-load point.
    """

    nominal_power: float
    electrical_efficiency: float
    thermal_efficiency: float
    outlet_temperature: float
    model: str = "constant"
    min_load: float = 0.5
    electrical_efficiency_min: float | None = None
    thermal_efficiency_min: float | None = None
    gas: str = "NaturalGas"
    gas_pressure: float | None = None

    kind = "CHP"

    def __post_init__(self):
        for name in (
            "nominal_power",
            "electrical_efficiency",
            "thermal_efficiency",
            "outlet_temperature",
            "min_load",
            "electrical_efficiency_min",
            "thermal_efficiency_min",
            "gas_pressure",
        ):
            object.__setattr__(self, name, as_float(getattr(self, name)))

    def problems(self, n):
        out = _positive("nominal_power", self.nominal_power)
        eff = _fraction("electrical_efficiency", self.electrical_efficiency)
        eff += _fraction("thermal_efficiency", self.thermal_efficiency)
        out += eff
        if not eff and self.electrical_efficiency + self.thermal_efficiency > 1:
            out.append(("thermal_efficiency", "electrical plus thermal efficiency exceeds 1"))
        if self.model not in ("constant", "offset-linear"):
            out.append(("model", f"unknown CHP model {self.model!r}"))
        elif self.model == "offset-linear":
            if not 0 <= self.min_load < 1:
                out.append(("min_load", f"min_load must lie in [0, 1), got {self.min_load:g}"))
            for name in ("electrical_efficiency_min", "thermal_efficiency_min"):
                value = getattr(self, name)
                if value is not None:
                    out += _fraction(name, value)
        if self.gas not in GAS_KINDS:
            out.append(("gas", f"unknown gas {self.gas!r}"))
        return out

    def part_load_line(self):
        """(slope, offset) pairs for electricity and heat as functions of gas input and status."""
        nominal = self.nominal_power
        if self.model != "offset-linear":
            return (self.electrical_efficiency, 0.0), (self.thermal_efficiency, 0.0)
        m = self.min_load
        lines = []
        for full, low in (
            (self.electrical_efficiency, self.electrical_efficiency_min),
            (self.thermal_efficiency, self.thermal_efficiency_min),
        ):
            low = full if low is None else low
            slope = (full - m * low) / (1 - m)
            lines.append((slope, full * nominal - slope * nominal))
        return tuple(lines)


@dataclass(frozen=True)
class RenewableSource:
    max_power: tuple[float, ...]
    source_kind: str = "pv"

    kind = "RenewableSource"

    def __post_init__(self):
        object.__setattr__(self, "max_power", as_series(self.max_power))

    def problems(self, n):
        out = series_problems("max_power", self.max_power, n)
        if self.source_kind not in ("pv", "wind", "hydro"):
            out.append(("source_kind", f"unknown renewable kind {self.source_kind!r}"))
        return out


def _storage_problems(obj, capacity_name="capacity"):
    out = _positive(capacity_name, getattr(obj, capacity_name))
    out += _nonneg("loss_rate", obj.loss_rate)
    out += _nonneg("initial_content", obj.initial_content)
    return out


@dataclass(frozen=True)
class Battery:
    """Battery with optional state-of-charge dependent charging.

    ``charge_levels`` are SOC fractions; ``charge_rates[i]`` is the charging
    power available while the end-of-step SOC stays at or below
    ``charge_levels[i]``. The total is still capped by ``charge_limit``.
    """

    capacity: float
    charge_limit: float | None = None
    discharge_limit: float | None = None
    charge_levels: tuple[float, ...] | None = None
    charge_rates: tuple[float, ...] | None = None
    initial_content: float = 0.0
    loss_rate: float = 0.0

    kind = "Battery"

    def __post_init__(self):
        for name in ("capacity", "charge_limit", "discharge_limit", "initial_content", "loss_rate"):
            object.__setattr__(self, name, as_float(getattr(self, name)))
        for name in ("charge_levels", "charge_rates"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, tuple(float(v) for v in value))

    def problems(self, n):
        out = _storage_problems(self)
        out += _nonneg("charge_limit", self.charge_limit) + _nonneg("discharge_limit", self.discharge_limit)
        if self.initial_content > self.capacity:
            out.append(("initial_content", "initial content exceeds capacity"))
        if (self.charge_levels is None) != (self.charge_rates is None):
            out.append(("charge_rates", "charge_levels and charge_rates must be given together"))
        elif self.charge_levels is not None:
            if len(self.charge_levels) != len(self.charge_rates):
                out.append(("charge_rates", "one charge rate per charge level is required"))
            if not strictly_increasing(self.charge_levels) or not all(0 <= s <= 1 for s in self.charge_levels):
                out.append(("charge_levels", "SOC levels must be strictly increasing fractions in [0, 1]"))
            out += _level_limits("charge_rates", self.charge_rates)
        return out


@dataclass(frozen=True)
class MixedHeatStorage:
    """Fully mixed heat storage using binary level indicators.

    ``capacity`` is the content (kWh) when the storage is at the highest heat
    level; each level's content threshold scales with its temperature above
    the reference.
    """

    capacity: float
    loss_rate: float = 0.0
    initial_content: float = 0.0
    input_limits: float | tuple[float, ...] | None = None
    output_limits: float | tuple[float, ...] | None = None
    input_limit: float | None = None
    output_limit: float | None = None
    weights: tuple[float, ...] | None = None

    kind = "MixedHeatStorage"

    def __post_init__(self):
        for name in ("capacity", "loss_rate", "initial_content", "input_limit", "output_limit"):
            object.__setattr__(self, name, as_float(getattr(self, name)))
        for name in ("input_limits", "output_limits", "weights"):
            object.__setattr__(self, name, as_series(getattr(self, name)))

    def problems(self, n):
        out = _storage_problems(self)
        if self.initial_content > self.capacity:
            out.append(("initial_content", "initial content exceeds capacity"))
        out += _nonneg("input_limit", self.input_limit) + _nonneg("output_limit", self.output_limit)
        out += _level_limits("input_limits", self.input_limits) + _level_limits("output_limits", self.output_limits)
        out += _level_limits("weights", self.weights)
        return out


@dataclass(frozen=True)
class LayeredHeatStorage:
    """Stratified heat storage: one content per temperature layer, shared volume, no binaries.

    ``initial_content`` is placed in the top layer.
    """

    capacity: float
    loss_rate: float = 0.0
    initial_content: float = 0.0
    input_limit: float | None = None
    output_limit: float | None = None

    kind = "LayeredHeatStorage"

    def __post_init__(self):
        for name in ("capacity", "loss_rate", "initial_content", "input_limit", "output_limit"):
            object.__setattr__(self, name, as_float(getattr(self, name)))

    def problems(self, n):
        out = _storage_problems(self)
        if self.initial_content > self.capacity:
            out.append(("initial_content", "initial content exceeds capacity"))
        return out + _nonneg("input_limit", self.input_limit) + _nonneg("output_limit", self.output_limit)


@dataclass(frozen=True)
class GasStorage:
    """Pressure vessel; content is ``c_e * pressure`` (kWh/bar * bar)."""

    c_e: float
    max_pressure: float
    input_limits: float | tuple[float, ...] | None = None
    output_limits: float | tuple[float, ...] | None = None
    input_limit: float | None = None
    output_limit: float | None = None
    weights: tuple[float, ...] | None = None
    initial_pressure: float = 0.0
    loss_rate: float = 0.0
    gas: str = "Hydrogen"

    kind = "GasStorage"

    def __post_init__(self):
        for name in ("c_e", "max_pressure", "input_limit", "output_limit", "initial_pressure", "loss_rate"):
            object.__setattr__(self, name, as_float(getattr(self, name)))
        for name in ("input_limits", "output_limits", "weights"):
            object.__setattr__(self, name, as_series(getattr(self, name)))

    @property
    def capacity(self):
        return self.c_e * self.max_pressure

    @property
    def initial_content(self):
        return self.c_e * self.initial_pressure

    def problems(self, n):
        out = _positive("c_e", self.c_e) + _positive("max_pressure", self.max_pressure)
        out += _nonneg("initial_pressure", self.initial_pressure) + _nonneg("loss_rate", self.loss_rate)
        if self.initial_pressure > self.max_pressure:
            out.append(("initial_pressure", "initial pressure exceeds max_pressure"))
        out += _nonneg("input_limit", self.input_limit) + _nonneg("output_limit", self.output_limit)
        out += _level_limits("input_limits", self.input_limits) + _level_limits("output_limits", self.output_limits)
        out += _level_limits("weights", self.weights)
        if self.gas not in GAS_KINDS:
            out.append(("gas", f"unknown gas {self.gas!r}"))
        return out


@dataclass(frozen=True)
class Electrolyzer:
    """PEM electrolyzer producing hydrogen (LHV energy) plus usable waste heat."""

    nominal_power: float
    hydrogen_efficiency: float
    heat_efficiency: float = 0.0
    output_pressure: float = 30.0
    waste_heat_temperature: float = 77.0

    kind = "Electrolyzer"

    def __post_init__(self):
        for name in (
            "nominal_power",
            "hydrogen_efficiency",
            "heat_efficiency",
            "output_pressure",
            "waste_heat_temperature",
        ):
            object.__setattr__(self, name, as_float(getattr(self, name)))

    def problems(self, n):
        out = _positive("nominal_power", self.nominal_power)
        eff = _fraction("hydrogen_efficiency", self.hydrogen_efficiency)
        eff += _fraction("heat_efficiency", self.heat_efficiency, allow_zero=True)
        out += eff
        if not eff and self.hydrogen_efficiency + self.heat_efficiency > 1:
            out.append(("heat_efficiency", "hydrogen plus heat efficiency exceeds 1"))
        return out


@dataclass(frozen=True)
class Compressor:
    """Gas compressor with isothermal work ``specific_work * ln(p_out/p_in)`` per unit of gas energy.

    ``stages`` lists (p_in, p_out) pairs; by default every pair of adjacent
    carrier levels is served.
    """

    specific_work: float
    power_limit: float | None = None
    stages: tuple[tuple[float, float], ...] | None = None
    gas: str = "Hydrogen"

    kind = "Compressor"

    def __post_init__(self):
        object.__setattr__(self, "specific_work", as_float(self.specific_work))
        object.__setattr__(self, "power_limit", as_float(self.power_limit))
        if self.stages is not None:
            object.__setattr__(self, "stages", tuple((float(a), float(b)) for a, b in self.stages))

    def problems(self, n):
        out = _positive("specific_work", self.specific_work) + _nonneg("power_limit", self.power_limit)
        for i, (p_in, p_out) in enumerate(self.stages or ()):
            if p_out <= p_in:
                out.append((f"stages[{i}]", f"outlet pressure {p_out:g} is not above inlet pressure {p_in:g}"))
        if self.gas not in GAS_KINDS:
            out.append(("gas", f"unknown gas {self.gas!r}"))
        return out


COMPONENT_TYPES = {
    cls.kind: cls
    for cls in (
        HeatPump,
        AirHeatExchanger,
        GeothermalSource,
        CHP,
        RenewableSource,
        Battery,
        MixedHeatStorage,
        LayeredHeatStorage,
        GasStorage,
        Electrolyzer,
        Compressor,
    )
}
ANERGY_KINDS = ("AirHeatExchanger", "GeothermalSource")
