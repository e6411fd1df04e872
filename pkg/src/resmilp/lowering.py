"""Compile a validated EnergySystem into a MilpModel.

Every physical power flow is a variable on a tagged graph edge; bus balances
are generated from the edge registry once all components are wired.
Variable ids follow ``{location}.{node}.{detail}.{t}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .milp import MilpModel
from .model.carriers import GAS_KINDS
from .model.system import EnergySystem, Location, ValidationReport, validate
from .model.technologies import ANERGY_KINDS, COMPONENT_TYPES
from .model._fields import expand
from .storage import (
    LevelSet,
    StorageVars,
    build_layered_heat_storage,
    build_multilevel_storage,
    build_soc_dependent_charging,
    build_storage_balance,
)

KELVIN = 273.15


class UnvalidatedSystem(ValueError):
    def __init__(self, report: ValidationReport):
        super().__init__("system does not validate:\n" + str(report))
        self.report = report


class DegenerateLift(ValueError):
    pass


class NoAnergySource(ValueError):
    pass


class MissingCarrier(ValueError):
    pass


class NonIncreasingPressure(ValueError):
    pass


@dataclass(frozen=True)
class LoweringOptions:
    time_discrete: bool = True
    strict: bool = False
    cyclic: bool = False
    explicit_zero_returns: bool = False


def cop(source_temperature: float, sink_temperature: float, cop_0_35: float) -> float:
    """Carnot COP scaled by a quality grade so that ``cop(0, 35, c) == c``."""
    if sink_temperature <= source_temperature:
        raise DegenerateLift(f"sink {sink_temperature:g} °C is not above source {source_temperature:g} °C")
    quality = cop_0_35 * (35.0 - 0.0) / (35.0 + KELVIN)
    return quality * (sink_temperature + KELVIN) / (sink_temperature - source_temperature)


def _g(value: float) -> str:
    return f"{value:g}"


class _Context:
    def __init__(self, system: EnergySystem, options: LoweringOptions):
        self.system = system
        self.options = options
        self.model = MilpModel("energy_system")
        self.model.timestamps = tuple(start for start, _ in system.time_index.intervals)
        self.model.durations = system.time_index.durations
        self.T = range(len(self.model.durations))
        self.dt = self.model.durations

    @staticmethod
    def tags(loc, **kw):
        out = {f"location:{loc.name}"}
        for key, value in kw.items():
            if value is None:
                continue
            values = value if isinstance(value, (list, tuple)) else [value]
            out.update(f"{key}:{_g(v) if isinstance(v, float) else v}" for v in values)
        return out

    # node ids
    @staticmethod
    def elec_bus(loc, which="grid"):
        return f"{loc.name}.Electricity.{which}"

    @staticmethod
    def heat_bus(loc, T):
        return f"{loc.name}.Heat.{_g(T)}"

    @staticmethod
    def gas_bus(loc, gas, p):
        return f"{loc.name}.{gas}.{_g(p)}"

    def flow(self, name, source, target, t, tags, lb=0.0, ub=math.inf):
        return self.model.add_flow(f"{name}.{t}", source, target, t, tags, lb, ub)


# -- carriers ---------------------------------------------------------------


def build_electricity_carrier(ctx: _Context, loc: Location):
    """Local-production bus feeding the grid (consumption) bus; optional purchase, feed-in and peak charge."""
    carrier = loc.carriers["Electricity"]
    m = ctx.model
    local, grid = ctx.elec_bus(loc, "local"), ctx.elec_bus(loc, "grid")
    cluster = (loc.name, "Electricity")
    m.add_node(local, "bus", "electricity (local)", cluster, bus="electricity-local")
    m.add_node(grid, "bus", "electricity (grid)", cluster, bus="electricity-grid")
    for t in ctx.T:
        ctx.flow(f"{loc.name}.Electricity.local_to_grid", local, grid, t,
                 ctx.tags(loc, carrier="Electricity", origin="local"))
    if carrier.working_price is not None:
        source = m.add_node(f"{loc.name}.Electricity.grid_source", "source", "grid supply", cluster)
        prices = expand(carrier.working_price, len(ctx.dt))
        purchases = []
        for t in ctx.T:
            var = ctx.flow(f"{loc.name}.Electricity.grid_purchase", source, grid, t,
                           ctx.tags(loc, carrier="Electricity", origin="grid"))
            m.add_objective(var, prices[t] * ctx.dt[t])
            purchases.append(var)
        if carrier.demand_rate:
            peak = m.add_variable(f"{loc.name}.Electricity.peak")
            for t, var in enumerate(purchases):
                m.add_constraint(f"{loc.name}.Electricity.peak.{t}", [(var, 1.0), (peak, -1.0)], "<=", 0.0)
            m.add_objective(peak, carrier.demand_rate)
    if carrier.feed_in_price is not None:
        sink = m.add_node(f"{loc.name}.Electricity.feed_in", "sink", "grid feed-in", cluster)
        prices = expand(carrier.feed_in_price, len(ctx.dt))
        for t in ctx.T:
            var = ctx.flow(f"{loc.name}.Electricity.feed_in", local, sink, t,
                           ctx.tags(loc, carrier="Electricity", origin="local"))
            m.add_objective(var, -prices[t] * ctx.dt[t])


def build_heat_carrier(ctx: _Context, loc: Location):
    """One bus per temperature level plus free drop edges to the next lower level."""
    heat = loc.carriers["Heat"]
    m = ctx.model
    cluster = (loc.name, "Heat")
    for T in heat.levels:
        m.add_node(ctx.heat_bus(loc, T), "bus", f"{_g(T)} °C", cluster, bus=f"heat-{_g(T)}")
    for lo, hi in zip(heat.levels, heat.levels[1:]):
        for t in ctx.T:
            ctx.flow(f"{loc.name}.Heat.drop[{_g(hi)}->{_g(lo)}]", ctx.heat_bus(loc, hi), ctx.heat_bus(loc, lo), t,
                     ctx.tags(loc, carrier="Heat", level=[hi, lo]))


def build_gas_carrier(ctx: _Context, loc: Location, gas: str):
    """One bus per pressure level, free expansion between adjacent levels, optional grid supply."""
    carrier = loc.carriers[gas]
    m = ctx.model
    cluster = (loc.name, gas)
    for p in carrier.levels:
        m.add_node(ctx.gas_bus(loc, gas, p), "bus", f"{_g(p)} bar", cluster, bus=f"gas-{_g(p)}")
    for lo, hi in zip(carrier.levels, carrier.levels[1:]):
        for t in ctx.T:
            ctx.flow(f"{loc.name}.{gas}.expand[{_g(hi)}->{_g(lo)}]", ctx.gas_bus(loc, gas, hi),
                     ctx.gas_bus(loc, gas, lo), t, ctx.tags(loc, carrier=gas, level=[hi, lo]))
    if carrier.working_price is not None:
        source = m.add_node(f"{loc.name}.{gas}.grid_source", "source", f"{gas} grid", cluster)
        prices = expand(carrier.working_price, len(ctx.dt))
        level = carrier.grid_level
        for t in ctx.T:
            var = ctx.flow(f"{loc.name}.{gas}.grid_purchase", source, ctx.gas_bus(loc, gas, level), t,
                           ctx.tags(loc, carrier=gas, level=level, origin="grid"))
            m.add_objective(var, prices[t] * ctx.dt[t])


def _heat_injection(ctx: _Context, loc: Location, node: str, component: str, T: float, lift: list[list],
                    feed_caps: dict | None = None):
    """Deliver heat at level ``T`` from ``node``.

    ``lift[t]`` are the terms of freshly generated heat. The node may also
    take return water from lower levels and reheat it, which needs at least
    ``feed * (T - L) / (L - T_ref)`` of the fresh heat. ``feed_caps`` maps a
    lower level to per-interval upper bounds and restricts feeds to those levels.
    """
    heat = loc.carriers["Heat"]
    m = ctx.model
    ref = heat.reference_temperature
    if feed_caps is None:
        lower = [L for L in heat.levels if L < T]
    else:
        lower = sorted(feed_caps)
    for t in ctx.T:
        out = ctx.flow(f"{node}.heat[{_g(T)}]", node, ctx.heat_bus(loc, T), t,
                       ctx.tags(loc, carrier="Heat", component=component, level=T))
        feeds = [
            (ctx.flow(f"{node}.feed[{_g(L)}->{_g(T)}]", ctx.heat_bus(loc, L), node, t,
                      ctx.tags(loc, carrier="Heat", component=component, level=L),
                      ub=math.inf if feed_caps is None else feed_caps[L][t]), L)
            for L in lower
        ]
        m.add_constraint(f"{node}.heat[{_g(T)}].{t}",
                         [(out, 1.0)] + [(v, -c) for v, c in lift[t]] + [(v, -1.0) for v, _ in feeds], "=", 0.0)
        if feeds:
            m.add_constraint(f"{node}.reheat[{_g(T)}].{t}",
                             [(v, (T - L) / (L - ref)) for v, L in feeds] + [(v, -c) for v, c in lift[t]],
                             "<=", 0.0)


# -- components -------------------------------------------------------------


def build_anergy_source(ctx: _Context, loc: Location, kind: str):
    ctx.model.add_node(f"{loc.name}.{kind}", "source", kind, (loc.name, kind))


def _anergy_limits(ctx: _Context, loc: Location, kind: str, draws: list[list[str]]):
    """``draws[t]`` are the anergy flows of one source in interval ``t``."""
    src = loc.components[kind]
    m = ctx.model
    limits = expand(src.power_limit, len(ctx.dt))
    for t in ctx.T:
        if math.isfinite(limits[t]):
            m.add_constraint(f"{loc.name}.{kind}.power_limit.{t}", [(v, 1.0) for v in draws[t]], "<=", limits[t])
    if src.total_limit is not None:
        m.add_constraint(f"{loc.name}.{kind}.total_limit",
                         [(v, ctx.dt[t]) for t in ctx.T for v in draws[t]], "<=", src.total_limit)


def _return_water(ctx: _Context, loc: Location) -> dict:
    """``{flow level: {return level: [power per interval]}}`` summed over the heat demands.

    The heat pump reheats return water only up to the flow temperature it came
    from, so each kWh delivered at a level is lifted at that level's COP.
    """
    heat = loc.carriers["Heat"]
    out: dict = {}
    for name in sorted(loc.demands):
        demand = loc.demands[name]
        if demand.kind != "FixedTemperatureHeat" or demand.return_temperature <= heat.reference_temperature:
            continue
        series = expand(demand.time_series, len(ctx.dt))
        row = out.setdefault(demand.flow_temperature, {}).setdefault(demand.return_temperature, [0.0] * len(ctx.dt))
        for t in ctx.T:
            row[t] += heat_demand_split(series[t], demand.flow_temperature, demand.return_temperature,
                                        heat.reference_temperature)[1]
    return out


def build_heat_pump(ctx: _Context, loc: Location):
    """One converter group per (anergy source, temperature level) with a per-interval COP."""
    hp = loc.components["HeatPump"]
    heat = loc.carriers["Heat"]
    sources = [k for k in ANERGY_KINDS if k in loc.components]
    if not sources:
        raise NoAnergySource(f"heat pump at {loc.name!r} has no anergy source")
    m = ctx.model
    node = m.add_node(f"{loc.name}.HeatPump", "converter", "heat pump", (loc.name, "HeatPump"))
    lifts = {T: [[] for _ in ctx.T] for T in heat.levels}
    for kind in sources:
        src = loc.components[kind]
        temps = expand(src.temperature, len(ctx.dt))
        draws = [[] for _ in ctx.T]
        for T in heat.levels:
            key = f"[{kind},{_g(T)}]"
            for t in ctx.T:
                el = ctx.flow(f"{node}.el{key}", ctx.elec_bus(loc), node, t,
                              ctx.tags(loc, carrier="Electricity", component="HeatPump", level=T))
                anergy = ctx.flow(f"{loc.name}.{kind}.anergy[{_g(T)}]", f"{loc.name}.{kind}", node, t,
                                  ctx.tags(loc, component=[kind, "HeatPump"], level=T))
                q = m.add_variable(f"{node}.lift{key}.{t}")
                if temps[t] < T:
                    m.add_constraint(f"{node}.cop{key}.{t}", [(q, 1.0), (el, -cop(temps[t], T, hp.cop_0_35))],
                                     "=", 0.0)
                else:
                    for var in (el, q):
                        m.set_bounds(var, ub=0.0)
                m.add_constraint(f"{node}.anergy{key}.{t}", [(anergy, 1.0), (q, -1.0), (el, 1.0)], "=", 0.0)
                lifts[T][t].append((q, 1.0))
                draws[t].append(anergy)
        _anergy_limits(ctx, loc, kind, draws)
    caps = _return_water(ctx, loc)
    for T in heat.levels:
        _heat_injection(ctx, loc, node, "HeatPump", T, lifts[T], caps.get(T, {}))
    if hp.thermal_power_limit is not None:
        for t in ctx.T:
            m.add_constraint(f"{node}.thermal_limit.{t}",
                             [(v, 1.0) for T in heat.levels for v, _ in lifts[T][t]], "<=", hp.thermal_power_limit)


def build_chp(ctx: _Context, loc: Location):
    chp = loc.components["CHP"]
    for kind in (chp.gas, "Heat", "Electricity"):
        if kind not in loc.carriers:
            raise MissingCarrier(f"CHP at {loc.name!r} needs a {kind} carrier")
    m = ctx.model
    node = m.add_node(f"{loc.name}.CHP", "converter", "CHP", (loc.name, "CHP"))
    pressure = chp.gas_pressure if chp.gas_pressure is not None else loc.carriers[chp.gas].levels[0]
    (a_el, c_el), (a_th, c_th) = chp.part_load_line()
    lifts = []
    for t in ctx.T:
        gas = ctx.flow(f"{node}.gas", ctx.gas_bus(loc, chp.gas, pressure), node, t,
                       ctx.tags(loc, carrier=chp.gas, component="CHP", level=pressure), ub=chp.nominal_power)
        el = ctx.flow(f"{node}.el", node, ctx.elec_bus(loc, "local"), t,
                      ctx.tags(loc, carrier="Electricity", component="CHP", origin="local"))
        q = m.add_variable(f"{node}.thermal.{t}")
        el_terms, th_terms = [(el, 1.0), (gas, -a_el)], [(q, 1.0), (gas, -a_th)]
        if chp.model == "offset-linear":
            b = m.add_binary(f"{node}.status.{t}")
            m.add_constraint(f"{node}.max_load.{t}", [(gas, 1.0), (b, -chp.nominal_power)], "<=", 0.0)
            m.add_constraint(f"{node}.min_load.{t}", [(gas, 1.0), (b, -chp.min_load * chp.nominal_power)],
                             ">=", 0.0)
            el_terms.append((b, -c_el))
            th_terms.append((b, -c_th))
        m.add_constraint(f"{node}.electric.{t}", el_terms, "=", 0.0)
        m.add_constraint(f"{node}.thermal.{t}", th_terms, "=", 0.0)
        lifts.append([(q, 1.0)])
    _heat_injection(ctx, loc, node, "CHP", chp.outlet_temperature, lifts)


def build_renewable_source(ctx: _Context, loc: Location):
    src = loc.components["RenewableSource"]
    m = ctx.model
    node = m.add_node(f"{loc.name}.RenewableSource", "source", src.source_kind, (loc.name, "RenewableSource"))
    limits = expand(src.max_power, len(ctx.dt))
    for t in ctx.T:
        ctx.flow(f"{node}.el", node, ctx.elec_bus(loc, "local"), t,
                 ctx.tags(loc, carrier="Electricity", component="RenewableSource", origin="local"),
                 ub=limits[t])


def build_battery(ctx: _Context, loc: Location):
    bat = loc.components["Battery"]
    m = ctx.model
    node = m.add_node(f"{loc.name}.Battery", "converter", "battery", (loc.name, "Battery"))
    opts = ctx.options
    cap = math.inf if bat.discharge_limit is None else bat.discharge_limit
    tags = ctx.tags(loc, carrier="Electricity", component="Battery")
    discharge = [ctx.flow(f"{node}.discharge", node, ctx.elec_bus(loc, "local"), t, tags | {"origin:local"}, ub=cap)
                 for t in ctx.T]
    if bat.charge_levels is None:
        cap = math.inf if bat.charge_limit is None else bat.charge_limit
        charge = [ctx.flow(f"{node}.charge", ctx.elec_bus(loc), node, t, tags, ub=cap) for t in ctx.T]
        sv = StorageVars(node, LevelSet((1.0,), bat.capacity, bat.capacity), ctx.dt,
                         [m.add_variable(f"{node}.content.{k}", ub=bat.capacity) for k in range(len(ctx.dt) + 1)],
                         inputs={None: charge}, outputs={None: discharge})
        build_storage_balance(m, sv, bat.loss_rate, bat.initial_content, opts.cyclic)
        return
    inputs = {
        n: [ctx.flow(f"{node}.charge[{_g(s)}]", ctx.elec_bus(loc), node, t, tags | {f"level:{_g(s)}"})
            for t in ctx.T]
        for n, s in enumerate(bat.charge_levels)
        if s > 0
    }
    build_soc_dependent_charging(
        m, node, bat.capacity, bat.charge_levels, bat.charge_rates, ctx.dt, inputs, {None: discharge},
        charge_limit=bat.charge_limit, loss_rate=bat.loss_rate, initial=bat.initial_content,
        cyclic=opts.cyclic, strict=opts.strict, time_discrete=opts.time_discrete,
    )


def _pick(values, indices):
    if isinstance(values, tuple):
        return tuple(values[i] for i in indices)
    return values


def _level_flows(ctx, loc, node, component, carrier, levels: LevelSet, bus_of, indices):
    """Per-level input and output flows of a storage, omitting always-closed ones."""
    inputs, outputs = {}, {}
    for k, n in enumerate(indices):
        p = levels.levels[k]
        tags = ctx.tags(loc, carrier=carrier, component=component, level=p)
        if not levels.is_bottom(k):
            inputs[k] = [ctx.flow(f"{node}.in[{_g(p)}]", bus_of(p), node, t, tags) for t in ctx.T]
        if not levels.is_top(k):
            outputs[k] = [ctx.flow(f"{node}.out[{_g(p)}]", node, bus_of(p), t, tags) for t in ctx.T]
    return inputs, outputs


def build_mixed_heat_storage(ctx: _Context, loc: Location):
    st = loc.components["MixedHeatStorage"]
    heat = loc.carriers["Heat"]
    node = ctx.model.add_node(f"{loc.name}.MixedHeatStorage", "converter", "heat storage (mixed)",
                              (loc.name, "MixedHeatStorage"))
    ref = heat.reference_temperature
    levels = LevelSet(heat.levels, st.capacity / (heat.levels[-1] - ref), st.capacity, datum=ref)
    idx = list(range(len(heat.levels)))
    inputs, outputs = _level_flows(ctx, loc, node, "MixedHeatStorage", "Heat", levels,
                                   lambda T: ctx.heat_bus(loc, T), idx)
    o = ctx.options
    build_multilevel_storage(
        ctx.model, node, levels, ctx.dt, inputs, outputs,
        in_max=st.input_limits, out_max=st.output_limits, in_total=st.input_limit, out_total=st.output_limit,
        weights=st.weights, loss_rate=st.loss_rate, initial=st.initial_content, cyclic=o.cyclic,
        strict=o.strict, time_discrete=o.time_discrete,
    )


def build_layered_storage(ctx: _Context, loc: Location):
    st = loc.components["LayeredHeatStorage"]
    heat = loc.carriers["Heat"]
    node = ctx.model.add_node(f"{loc.name}.LayeredHeatStorage", "converter", "heat storage (layered)",
                              (loc.name, "LayeredHeatStorage"))
    inputs, outputs = {}, {}
    for n, T in enumerate(heat.levels):
        tags = ctx.tags(loc, carrier="Heat", component="LayeredHeatStorage", level=T)
        inputs[n] = [ctx.flow(f"{node}.in[{_g(T)}]", ctx.heat_bus(loc, T), node, t, tags) for t in ctx.T]
        outputs[n] = [ctx.flow(f"{node}.out[{_g(T)}]", node, ctx.heat_bus(loc, T), t, tags) for t in ctx.T]
    build_layered_heat_storage(
        ctx.model, node, heat.levels, heat.reference_temperature, st.capacity, ctx.dt, inputs, outputs,
        loss_rate=st.loss_rate, initial=st.initial_content, cyclic=ctx.options.cyclic,
        in_total=st.input_limit, out_total=st.output_limit,
    )


def build_gas_storage(ctx: _Context, loc: Location):
    st = loc.components["GasStorage"]
    carrier = loc.carriers[st.gas]
    node = ctx.model.add_node(f"{loc.name}.GasStorage", "converter", f"{st.gas} storage", (loc.name, "GasStorage"))
    idx = [i for i, p in enumerate(carrier.levels) if p <= st.max_pressure]
    levels = LevelSet(tuple(carrier.levels[i] for i in idx), st.c_e, st.capacity)
    inputs, outputs = _level_flows(ctx, loc, node, "GasStorage", st.gas, levels,
                                   lambda p: ctx.gas_bus(loc, st.gas, p), idx)
    o = ctx.options
    build_multilevel_storage(
        ctx.model, node, levels, ctx.dt, inputs, outputs,
        in_max=_pick(st.input_limits, idx), out_max=_pick(st.output_limits, idx),
        in_total=st.input_limit, out_total=st.output_limit, weights=_pick(st.weights, idx),
        loss_rate=st.loss_rate, initial=st.initial_content, cyclic=o.cyclic,
        strict=o.strict, time_discrete=o.time_discrete,
    )


def waste_heat_level(levels, temperature):
    """Highest heat level not above ``temperature``, or None."""
    below = [T for T in levels if T <= temperature]
    return max(below) if below else None


def build_electrolyzer(ctx: _Context, loc: Location):
    ely = loc.components["Electrolyzer"]
    for kind in ("Electricity", "Hydrogen"):
        if kind not in loc.carriers:
            raise MissingCarrier(f"electrolyzer at {loc.name!r} needs a {kind} carrier")
    m = ctx.model
    node = m.add_node(f"{loc.name}.Electrolyzer", "converter", "PEM electrolyzer", (loc.name, "Electrolyzer"))
    h2 = loc.carriers["Hydrogen"]
    pressure = max(p for p in h2.levels if p <= ely.output_pressure)
    heat = loc.carriers.get("Heat")
    level = waste_heat_level(heat.levels, ely.waste_heat_temperature) if heat is not None else None
    dump = None
    if ely.heat_efficiency > 0:
        dump = m.add_node(f"{loc.name}.Electrolyzer.waste_heat", "sink", "waste heat", (loc.name, "Electrolyzer"))
    lifts = []
    for t in ctx.T:
        el = ctx.flow(f"{node}.el", ctx.elec_bus(loc), node, t,
                      ctx.tags(loc, carrier="Electricity", component="Electrolyzer"), ub=ely.nominal_power)
        out = ctx.flow(f"{node}.h2", node, ctx.gas_bus(loc, "Hydrogen", pressure), t,
                       ctx.tags(loc, carrier="Hydrogen", component="Electrolyzer", level=pressure))
        m.add_constraint(f"{node}.hydrogen.{t}", [(out, 1.0), (el, -ely.hydrogen_efficiency)], "=", 0.0)
        if dump is None:
            continue
        discard = ctx.flow(f"{node}.waste_heat", node, dump, t,
                           ctx.tags(loc, carrier="Heat", component="Electrolyzer"))
        terms = [(discard, 1.0), (el, -ely.heat_efficiency)]
        if level is not None:
            used = m.add_variable(f"{node}.heat_used.{t}")
            terms.append((used, 1.0))
            lifts.append([(used, 1.0)])
        m.add_constraint(f"{node}.waste_heat.{t}", terms, "=", 0.0)
    if lifts:
        _heat_injection(ctx, loc, node, "Electrolyzer", level, lifts)


def build_compressor(ctx: _Context, loc: Location):
    """Per stage ``P_el = k * ln(p_out/p_in) * P_gas``; gas energy is conserved."""
    comp = loc.components["Compressor"]
    for kind in ("Electricity", comp.gas):
        if kind not in loc.carriers:
            raise MissingCarrier(f"compressor at {loc.name!r} needs a {kind} carrier")
    levels = loc.carriers[comp.gas].levels
    stages = comp.stages if comp.stages is not None else tuple(zip(levels, levels[1:]))
    for p_in, p_out in stages:
        if p_out <= p_in:
            raise NonIncreasingPressure(f"compressor stage {p_in:g} -> {p_out:g} bar does not raise pressure")
    m = ctx.model
    node = m.add_node(f"{loc.name}.Compressor", "converter", "compressor", (loc.name, "Compressor"))
    cap = math.inf if comp.power_limit is None else comp.power_limit
    for t in ctx.T:
        el = ctx.flow(f"{node}.el", ctx.elec_bus(loc), node, t,
                      ctx.tags(loc, carrier="Electricity", component="Compressor"), ub=cap)
        work = [(el, 1.0)]
        for p_in, p_out in stages:
            key = f"[{_g(p_in)}->{_g(p_out)}]"
            g_in = ctx.flow(f"{node}.gas_in{key}", ctx.gas_bus(loc, comp.gas, p_in), node, t,
                            ctx.tags(loc, carrier=comp.gas, component="Compressor", level=p_in))
            g_out = ctx.flow(f"{node}.gas_out{key}", node, ctx.gas_bus(loc, comp.gas, p_out), t,
                             ctx.tags(loc, carrier=comp.gas, component="Compressor", level=p_out))
            m.add_constraint(f"{node}.conserve{key}.{t}", [(g_out, 1.0), (g_in, -1.0)], "=", 0.0)
            work.append((g_in, -comp.specific_work * math.log(p_out / p_in)))
        m.add_constraint(f"{node}.work.{t}", work, "=", 0.0)


# -- demands ----------------------------------------------------------------


def heat_demand_split(power: float, flow_temperature: float, return_temperature: float, reference: float):
    """(draw at flow level, injection at return level) for a net heat demand ``power``."""
    spread = flow_temperature - return_temperature
    return (
        power * (flow_temperature - reference) / spread,
        power * (return_temperature - reference) / spread,
    )


def build_fixed_temperature_heat_demand(ctx: _Context, loc: Location, demand):
    heat = loc.carriers["Heat"]
    m = ctx.model
    node = m.add_node(f"{loc.name}.demand.{demand.name}", "sink", demand.name, (loc.name, demand.name))
    values = expand(demand.time_series, len(ctx.dt))
    ref = heat.reference_temperature
    Tf, Tr = demand.flow_temperature, demand.return_temperature
    return_target = None
    if Tr != ref:
        return_target = ctx.heat_bus(loc, Tr)
    elif ctx.options.explicit_zero_returns:
        return_target = m.add_node(f"{node}.reference", "sink", f"{_g(ref)} °C (reference)", (loc.name, demand.name))
    for t in ctx.T:
        draw, back = heat_demand_split(values[t], Tf, Tr, ref)
        ctx.flow(f"{node}.draw", ctx.heat_bus(loc, Tf), node, t,
                 ctx.tags(loc, carrier="Heat", demand=demand.name, level=Tf), lb=draw, ub=draw)
        if return_target is not None:
            back = 0.0 if Tr == ref else back
            ctx.flow(f"{node}.return", node, return_target, t,
                     ctx.tags(loc, carrier="Heat", demand=demand.name, level=Tr), lb=back, ub=back)


def build_demand(ctx: _Context, loc: Location, demand):
    if demand.kind == "FixedTemperatureHeat":
        return build_fixed_temperature_heat_demand(ctx, loc, demand)
    m = ctx.model
    node = m.add_node(f"{loc.name}.demand.{demand.name}", "sink", demand.name, (loc.name, demand.name))
    values = expand(demand.time_series, len(ctx.dt))
    if demand.kind == "Electricity":
        bus, tags = ctx.elec_bus(loc), ctx.tags(loc, carrier="Electricity", demand=demand.name)
    else:
        bus = ctx.gas_bus(loc, demand.gas, demand.pressure)
        tags = ctx.tags(loc, carrier=demand.gas, demand=demand.name, level=demand.pressure)
    for t in ctx.T:
        ctx.flow(f"{node}.draw", bus, node, t, tags, lb=values[t], ub=values[t])


# -- links & assembly -------------------------------------------------------


def build_link(ctx: _Context, link):
    system = ctx.system
    a, b = system.locations[link.location_a], system.locations[link.location_b]

    def bus(loc):
        if link.carrier == "Electricity":
            return ctx.elec_bus(loc)
        if link.carrier == "Heat":
            return ctx.heat_bus(loc, link.level)
        return ctx.gas_bus(loc, link.carrier, link.level)

    cap = math.inf if link.capacity is None else link.capacity
    tags = {f"location:{a.name}", f"location:{b.name}", f"carrier:{link.carrier}", "origin:link"}
    if link.level is not None:
        tags.add(f"level:{_g(link.level)}")
    for src, dst in ((a, b), (b, a)):
        for t in ctx.T:
            ctx.flow(f"link.{link.carrier}.{src.name}->{dst.name}", bus(src), bus(dst), t, tags, ub=cap)


_COMPONENT_BUILDERS = {
    "HeatPump": build_heat_pump,
    "CHP": build_chp,
    "RenewableSource": build_renewable_source,
    "Battery": build_battery,
    "MixedHeatStorage": build_mixed_heat_storage,
    "LayeredHeatStorage": build_layered_storage,
    "GasStorage": build_gas_storage,
    "Electrolyzer": build_electrolyzer,
    "Compressor": build_compressor,
}


def lower(system: EnergySystem, options: LoweringOptions | None = None) -> MilpModel:
    """Validate ``system`` and build its MILP. Equal systems give identical models."""
    options = options or LoweringOptions()
    report = validate(system)
    if report:
        raise UnvalidatedSystem(report)
    ctx = _Context(system, options)
    for name in sorted(system.locations):
        loc = system.locations[name]
        if "Electricity" in loc.carriers:
            build_electricity_carrier(ctx, loc)
        if "Heat" in loc.carriers:
            build_heat_carrier(ctx, loc)
        for gas in GAS_KINDS:
            if gas in loc.carriers:
                build_gas_carrier(ctx, loc, gas)
        for kind in ANERGY_KINDS:
            if kind in loc.components:
                build_anergy_source(ctx, loc, kind)
        for kind in COMPONENT_TYPES:
            if kind in loc.components and kind in _COMPONENT_BUILDERS:
                _COMPONENT_BUILDERS[kind](ctx, loc)
        for dname in sorted(loc.demands):
            build_demand(ctx, loc, loc.demands[dname])
    for key in sorted(system.links):
        build_link(ctx, system.links[key])
    ctx.model.add_bus_balances()
    return ctx.model
