"""Multi-level storage constraints with binary level indicators.

A storage with content ``E`` and discrete levels ``E_n`` may release energy at
level ``n`` only while ``E >= E_n`` (indicator ``y``) and accept energy at
level ``n`` only while ``E <= E_n`` (inverse indicator ``ybar``). Levels with
``E_n = 0`` are always active and never chargeable; levels with
``E_n = E_max`` are never withdrawable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .milp import MilpModel


class ZeroLevelEnergy(ValueError):
    pass


class NegativeLoss(ValueError):
    pass


def _g(value: float) -> str:
    return f"{value:g}"


@dataclass(frozen=True)
class LevelSet:
    """Ordered levels ``p_n`` with energy thresholds ``E_n = c_e * (p_n - datum)``."""

    levels: tuple[float, ...]
    c_e: float
    e_max: float
    datum: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(float(p) for p in self.levels))
        if not self.levels:
            raise ValueError("a level set needs at least one level")
        if any(a >= b for a, b in zip(self.levels, self.levels[1:])):
            raise ValueError(f"levels {self.levels} are not strictly increasing")
        if not self.c_e > 0:
            raise ValueError("c_e must be positive")
        energies = self.energies
        if energies[0] < -1e-12 or energies[-1] > self.e_max * (1 + 1e-12):
            raise ValueError(f"level energies {energies} fall outside [0, {self.e_max}]")

    @classmethod
    def from_fractions(cls, fractions, e_max):
        return cls(tuple(fractions), c_e=float(e_max), e_max=float(e_max))

    @property
    def energies(self) -> tuple[float, ...]:
        return tuple(self.c_e * (p - self.datum) for p in self.levels)

    def is_bottom(self, n: int) -> bool:
        return self.energies[n] <= 0.0

    def is_top(self, n: int) -> bool:
        return self.energies[n] >= self.e_max

    def interior(self) -> list[int]:
        return [n for n in range(len(self.levels)) if not self.is_bottom(n) and not self.is_top(n)]

    def label(self, n: int) -> str:
        return _g(self.levels[n])


@dataclass
class StorageVars:
    """Variable ids of one storage. ``inputs``/``outputs`` map a level index
    (or ``None`` for flows not tied to a level) to one variable per interval."""

    prefix: str
    levels: LevelSet
    durations: tuple[float, ...]
    content: list[str]
    inputs: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    y: dict = field(default_factory=dict)
    yhat: dict = field(default_factory=dict)
    ybar: dict = field(default_factory=dict)
    time_discrete: bool = True

    @property
    def n_intervals(self) -> int:
        return len(self.durations)

    def anchor(self, t: int) -> str:
        return self.content[t + 1] if self.time_discrete else self.content[t]


def allocate_storage_vars(
    model: MilpModel, prefix, levels: LevelSet, durations, inputs=None, outputs=None
) -> StorageVars:
    """Create content variables; flows not supplied by the caller are created per level."""
    durations = tuple(float(d) for d in durations)
    n_int = len(durations)
    content = [model.add_variable(f"{prefix}.content.{k}", lb=0.0, ub=levels.e_max) for k in range(n_int + 1)]

    def make(direction):
        return {
            n: [model.add_variable(f"{prefix}.{direction}[{levels.label(n)}].{t}") for t in range(n_int)]
            for n in range(len(levels.levels))
        }

    return StorageVars(
        prefix=prefix,
        levels=levels,
        durations=durations,
        content=content,
        inputs=make("in") if inputs is None else dict(inputs),
        outputs=make("out") if outputs is None else dict(outputs),
    )


def build_level_indicators(model: MilpModel, sv: StorageVars, strict=False, time_discrete=True, levels=None):
    """Emit ``y <= E/E_n``, ``yhat >= (E - E_n)/E_max``, ``ybar = 1 - yhat`` (and ``y + ybar = 1`` if strict).

    ``E`` is the content at the start of the interval, or at its end when
    ``time_discrete`` is set, which stops a flow from crossing its own level
    within one step.
    """
    sv.time_discrete = time_discrete
    ls = sv.levels
    if levels is None:
        levels = ls.interior()
    else:
        for n in levels:
            if ls.is_bottom(n):
                raise ZeroLevelEnergy(f"level {ls.label(n)} of {sv.prefix} has zero energy")
    e = ls.energies
    for n in levels:
        if ls.is_top(n):
            continue
        lab = ls.label(n)
        sv.y[n], sv.yhat[n], sv.ybar[n] = [], [], []
        for t in range(sv.n_intervals):
            y = model.add_binary(f"{sv.prefix}.y[{lab}].{t}")
            yhat = model.add_binary(f"{sv.prefix}.yhat[{lab}].{t}")
            ybar = model.add_binary(f"{sv.prefix}.ybar[{lab}].{t}")
            anchor = sv.anchor(t)
            base = f"{sv.prefix}.level[{lab}]"
            model.add_constraint(f"{base}.active.{t}", [(y, e[n]), (anchor, -1.0)], "<=", 0.0)
            model.add_constraint(f"{base}.full.{t}", [(yhat, ls.e_max), (anchor, -1.0)], ">=", -e[n])
            model.add_constraint(f"{base}.inverse.{t}", [(ybar, 1.0), (yhat, 1.0)], "=", 1.0)
            if strict:
                model.add_constraint(f"{base}.exclusive.{t}", [(y, 1.0), (ybar, 1.0)], "=", 1.0)
            sv.y[n].append(y)
            sv.yhat[n].append(yhat)
            sv.ybar[n].append(ybar)


def _limit(limits, n):
    if limits is None:
        return math.inf
    if isinstance(limits, (int, float)):
        return float(limits)
    value = limits[n]
    return math.inf if value is None else float(value)


def _tighten(model, var, ub):
    if math.isfinite(ub):
        model.set_bounds(var, ub=min(model.variables[var].ub, ub))


def build_power_limits(model: MilpModel, sv: StorageVars, out_max=None, in_max=None):
    """``P_out <= y * P_out_max`` and ``P_in <= ybar * P_in_max`` per level and interval.

    Unlimited levels use ``E_max / dt`` as big-M, i.e. one full charge or
    discharge per step.
    """
    ls = sv.levels
    for direction, flows, limits, status in (
        ("out", sv.outputs, out_max, sv.y),
        ("in", sv.inputs, in_max, sv.ybar),
    ):
        for n, vars_ in flows.items():
            if n is None:
                continue
            cap = _limit(limits, n)
            closed = ls.is_top(n) if direction == "out" else ls.is_bottom(n)
            for t, var in enumerate(vars_):
                if closed:
                    model.set_bounds(var, ub=0.0)
                elif n in status:
                    big_m = cap if math.isfinite(cap) else ls.e_max / sv.durations[t]
                    model.add_constraint(
                        f"{sv.prefix}.{direction}_limit[{ls.label(n)}].{t}",
                        [(var, 1.0), (status[n][t], -big_m)],
                        "<=",
                        0.0,
                    )
                else:
                    _tighten(model, var, cap)


def build_weighted_aggregate_limit(model: MilpModel, sv: StorageVars, out_total=None, in_total=None, weights=None):
    """``sum_n w_n * P_n(t) <= P_total`` for each direction that has a total."""
    for direction, flows, total in (("out", sv.outputs, out_total), ("in", sv.inputs, in_total)):
        if total is None or not math.isfinite(total):
            continue
        for t in range(sv.n_intervals):
            terms = [(vars_[t], 1.0 if n is None else _weight(weights, n)) for n, vars_ in flows.items()]
            model.add_constraint(f"{sv.prefix}.{direction}_total.{t}", terms, "<=", float(total))


def _weight(weights, n):
    if weights is None:
        return 1.0
    if isinstance(weights, (int, float)):
        return float(weights)
    return float(weights[n])


def build_storage_balance(model: MilpModel, sv: StorageVars, loss_rate=0.0, initial=0.0, cyclic=False):
    """``E(t+1) = (1 - loss*dt) E(t) + dt (sum P_in - sum P_out)`` with fixed ``E(0)``."""
    if loss_rate < 0:
        raise NegativeLoss(f"loss rate {loss_rate} of {sv.prefix} is negative")
    if not 0 <= initial <= sv.levels.e_max * (1 + 1e-12):
        raise ValueError(f"initial content {initial} of {sv.prefix} outside [0, {sv.levels.e_max}]")
    model.fix(sv.content[0], min(initial, sv.levels.e_max))
    for t, dt in enumerate(sv.durations):
        keep = 1.0 - loss_rate * dt
        if keep < 0:
            raise NegativeLoss(f"loss rate {loss_rate} empties {sv.prefix} faster than one step")
        terms = [(sv.content[t + 1], 1.0), (sv.content[t], -keep)]
        terms += [(vars_[t], -dt) for vars_ in sv.inputs.values()]
        terms += [(vars_[t], dt) for vars_ in sv.outputs.values()]
        model.add_constraint(f"{sv.prefix}.balance.{t}", terms, "=", 0.0)
    if cyclic:
        model.add_constraint(f"{sv.prefix}.cyclic", [(sv.content[-1], 1.0), (sv.content[0], -1.0)], "=", 0.0)


def build_multilevel_storage(
    model: MilpModel,
    prefix,
    levels: LevelSet,
    durations,
    inputs=None,
    outputs=None,
    *,
    in_max=None,
    out_max=None,
    in_total=None,
    out_total=None,
    weights=None,
    loss_rate=0.0,
    initial=0.0,
    cyclic=False,
    strict=False,
    time_discrete=True,
) -> StorageVars:
    sv = allocate_storage_vars(model, prefix, levels, durations, inputs, outputs)
    build_level_indicators(model, sv, strict=strict, time_discrete=time_discrete)
    build_power_limits(model, sv, out_max=out_max, in_max=in_max)
    build_weighted_aggregate_limit(model, sv, out_total=out_total, in_total=in_total, weights=weights)
    build_storage_balance(model, sv, loss_rate=loss_rate, initial=initial, cyclic=cyclic)
    return sv


@dataclass
class LayeredStorageVars:
    prefix: str
    levels: tuple[float, ...]
    scale: tuple[float, ...]
    content: dict
    inputs: dict
    outputs: dict


def build_layered_heat_storage(
    model: MilpModel,
    prefix,
    heat_levels,
    reference_temperature,
    capacity,
    durations,
    inputs=None,
    outputs=None,
    *,
    loss_rate=0.0,
    initial=0.0,
    cyclic=False,
    in_total=None,
    out_total=None,
) -> LayeredStorageVars:
    """Binary-free stratified storage.

    Each layer ``n`` holds energy ``E_n`` at temperature ``T_n``; the volume it
    occupies is ``E_n / s_n`` in top-level units, with
    ``s_n = (T_n - T_ref) / (T_top - T_ref)``. All layers share ``capacity``.
    """
    if not heat_levels:
        raise ValueError("layered storage needs at least one heat level")
    if loss_rate < 0:
        raise NegativeLoss(f"loss rate {loss_rate} of {prefix} is negative")
    durations = tuple(float(d) for d in durations)
    n_int = len(durations)
    top = heat_levels[-1] - reference_temperature
    scale = tuple((T - reference_temperature) / top for T in heat_levels)
    labels = [_g(T) for T in heat_levels]
    content = {
        n: [
            model.add_variable(f"{prefix}.content[{labels[n]}].{k}", lb=0.0, ub=capacity * scale[n])
            for k in range(n_int + 1)
        ]
        for n in range(len(heat_levels))
    }
    if inputs is None:
        inputs = {
            n: [model.add_variable(f"{prefix}.in[{labels[n]}].{t}") for t in range(n_int)]
            for n in range(len(heat_levels))
        }
    if outputs is None:
        outputs = {
            n: [model.add_variable(f"{prefix}.out[{labels[n]}].{t}") for t in range(n_int)]
            for n in range(len(heat_levels))
        }
    for k in range(n_int + 1):
        model.add_constraint(
            f"{prefix}.volume.{k}",
            [(content[n][k], 1.0 / scale[n]) for n in range(len(heat_levels))],
            "<=",
            float(capacity),
        )
    top_n = len(heat_levels) - 1
    for n in range(len(heat_levels)):
        model.fix(content[n][0], float(initial) if n == top_n else 0.0)
        for t, dt in enumerate(durations):
            terms = [(content[n][t + 1], 1.0), (content[n][t], -(1.0 - loss_rate * dt))]
            if n in inputs:
                terms.append((inputs[n][t], -dt))
            if n in outputs:
                terms.append((outputs[n][t], dt))
            model.add_constraint(f"{prefix}.balance[{labels[n]}].{t}", terms, "=", 0.0)
        if cyclic:
            model.add_constraint(
                f"{prefix}.cyclic[{labels[n]}]", [(content[n][-1], 1.0), (content[n][0], -1.0)], "=", 0.0
            )
    for direction, flows, total in (("in", inputs, in_total), ("out", outputs, out_total)):
        if total is None:
            continue
        for t in range(n_int):
            model.add_constraint(
                f"{prefix}.{direction}_total.{t}", [(vars_[t], 1.0) for vars_ in flows.values()], "<=", float(total)
            )
    return LayeredStorageVars(prefix, tuple(heat_levels), scale, content, inputs, outputs)


def build_soc_dependent_charging(
    model: MilpModel,
    prefix,
    capacity,
    soc_levels,
    charge_rates,
    durations,
    inputs=None,
    outputs=None,
    *,
    charge_limit=None,
    discharge_limit=None,
    loss_rate=0.0,
    initial=0.0,
    cyclic=False,
    strict=False,
    time_discrete=True,
) -> StorageVars:
    """Battery whose charging power per SOC band is limited by level indicators.

    Charging flow ``n`` (rate ``charge_rates[n]``) is open only while the SOC
    stays at or below ``soc_levels[n]``; the sum is capped by ``charge_limit``.
    """
    levels = LevelSet.from_fractions(soc_levels, capacity)
    sv = allocate_storage_vars(model, prefix, levels, durations, inputs, outputs)
    build_level_indicators(model, sv, strict=strict, time_discrete=time_discrete)
    build_power_limits(model, sv, in_max=tuple(charge_rates))
    build_weighted_aggregate_limit(model, sv, out_total=discharge_limit, in_total=charge_limit)
    build_storage_balance(model, sv, loss_rate=loss_rate, initial=initial, cyclic=cyclic)
    return sv
