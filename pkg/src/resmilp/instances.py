"""Reference systems and random instance generators shared by tests and scripts."""

from __future__ import annotations

import math

import numpy as np

from .lowering import LoweringOptions, lower
from .milp import MilpModel
from .model import EnergySystem, Link, Location, carriers, demands, technologies
from .storage import LevelSet, build_multilevel_storage

FIVE_LEVELS = (0.0, 0.3, 0.6, 0.9, 1.0)


def sfh_system() -> EnergySystem:
    """Single-family home with an air-source heat pump over two hourly intervals."""
    energy_system = EnergySystem(time_index={
        "start": "2021-07-10 06:00:00",
        "end": "2021-07-10 08:00:00",
        "freq": "60T",
    })
    house = Location(name="SFH")
    energy_system.add(house)
    house.add_carrier(carriers.Electricity(costs={"working_price": 35, "demand_rate": 0}))
    house.add_demand(demands.Electricity(name="electricity demand", time_series=[7, 8.4]))
    house.add_carrier(carriers.Heat(temperature_levels=[20, 30, 55], reference_temperature=10))
    house.add_demand(demands.FixedTemperatureHeat(
        name="space heating", flow_temperature=30, return_temperature=20, time_series=[13.37, 42]))
    house.add_demand(demands.FixedTemperatureHeat(
        name="hot water", flow_temperature=55, return_temperature=10, time_series=[0, 12]))
    house.add_component(technologies.HeatPump(thermal_power_limit=None, cop_0_35=3.8))
    house.add_component(technologies.AirHeatExchanger(air_temperature=[3, 9]))
    return energy_system


def storage_bench(
    rng: np.random.Generator,
    fractions=FIVE_LEVELS,
    n_intervals: int = 3,
    e_max: float = 10.0,
    *,
    initial: float | None = None,
    strict: bool = False,
    time_discrete: bool = True,
    durations=None,
):
    """One bus, a priced supply, a fixed demand with costly backup, and a multi-level storage.

    Prices, supply limits, demand and the value of stored energy at the end are
    random, so the storage is pushed to charge, hold or discharge. Returns the
    model and the storage variables.
    """
    durations = tuple(durations or rng.choice([0.5, 1.0, 2.0], size=n_intervals))
    m = MilpModel("storage-bench")
    m.durations = durations
    m.timestamps = tuple(range(n_intervals))
    m.add_node("bus", "bus")
    m.add_node("supply", "source")
    m.add_node("backup", "source")
    m.add_node("demand", "sink")
    m.add_node("store", "converter")
    levels = LevelSet.from_fractions(fractions, e_max)
    inputs, outputs = {}, {}
    for n in range(len(fractions)):
        lab = levels.label(n)
        inputs[n] = [m.add_flow(f"store.in[{lab}].{t}", "bus", "store", t, {f"level:{lab}"})
                     for t in range(n_intervals)]
        outputs[n] = [m.add_flow(f"store.out[{lab}].{t}", "store", "bus", t, {f"level:{lab}"})
                      for t in range(n_intervals)]
    for t, dt in enumerate(durations):
        supply = m.add_flow(f"supply.{t}", "supply", "bus", t, {"origin:grid"}, ub=float(rng.uniform(0, 1.5 * e_max)))
        backup = m.add_flow(f"backup.{t}", "backup", "bus", t, {"origin:backup"})
        d = float(rng.uniform(0, e_max))
        m.add_flow(f"demand.{t}", "bus", "demand", t, {"demand:load"}, lb=d, ub=d)
        m.add_objective(supply, float(rng.uniform(0, 10)) * dt)
        m.add_objective(backup, 25.0 * dt)
    if initial is None:
        initial = float(rng.uniform(0, e_max))
    sv = build_multilevel_storage(
        m, "store", levels, durations, inputs, outputs,
        initial=initial, strict=strict, time_discrete=time_discrete,
    )
    m.add_objective(sv.content[-1], -float(rng.uniform(0, 12)))
    m.add_bus_balances()
    return m, sv


def random_storage_system(rng: np.random.Generator, max_binaries: int = 12) -> EnergySystem:
    """Heat-pump house with a mixed heat storage, or an electrolyzer with a hydrogen store.

    Level and interval counts are drawn so that the lowered model has at most
    ``max_binaries`` binaries (three per interior level and interval).
    """
    while True:
        n_levels = int(rng.integers(2, 5))
        n_int = int(rng.integers(2, 5))
        if 3 * (n_levels - 1) * n_int <= max_binaries:
            break
    es = EnergySystem(time_index={"start": "2024-01-01 00:00", "end": f"2024-01-01 {n_int:02d}:00", "freq": "H"})
    loc = Location("site")
    es.add(loc)
    prices = [round(float(v), 3) for v in rng.uniform(5, 40, n_int)]
    loc.add_carrier(carriers.Electricity(working_price=prices))
    if rng.random() < 0.5:
        temps = sorted(rng.choice(np.arange(25, 80, 5), size=n_levels, replace=False).tolist())
        loc.add_carrier(carriers.Heat(temperature_levels=temps, reference_temperature=10))
        for i, T in enumerate(temps[1:]):
            series = [round(float(v), 3) for v in rng.uniform(0, 6, n_int) * (rng.random(n_int) < 0.7)]
            loc.add_demand(demands.FixedTemperatureHeat(
                name=f"heat {i}", flow_temperature=T, return_temperature=temps[0], time_series=series))
        loc.add_component(technologies.HeatPump(cop_0_35=3.5, thermal_power_limit=float(rng.uniform(4, 15))))
        loc.add_component(technologies.AirHeatExchanger(air_temperature=[round(float(v), 2) for v in rng.uniform(-5, 15, n_int)]))
        cap = float(rng.uniform(5, 30))
        loc.add_component(technologies.MixedHeatStorage(capacity=cap, initial_content=float(rng.uniform(0, cap))))
    else:
        pressures = sorted(rng.choice(np.arange(10, 400, 10), size=n_levels, replace=False).tolist())
        loc.add_carrier(carriers.Hydrogen(pressure_levels=pressures))
        loc.add_component(technologies.Electrolyzer(nominal_power=float(rng.uniform(5, 20)), hydrogen_efficiency=0.6,
                                                    output_pressure=pressures[-1]))
        c_e = float(rng.uniform(0.02, 0.1))
        loc.add_component(technologies.GasStorage(c_e=c_e, max_pressure=pressures[-1],
                                                  initial_pressure=float(rng.uniform(0, pressures[-1]))))
        series = [round(float(v), 3) for v in rng.uniform(0, 5, n_int)]
        loc.add_demand(demands.GasDemand(name="fuel", pressure=pressures[0], gas="Hydrogen", time_series=series))
    return es


def random_storage_milp(rng: np.random.Generator, max_binaries: int = 12, **options) -> MilpModel:
    return lower(random_storage_system(rng, max_binaries), LoweringOptions(**options))


def random_spec(rng: np.random.Generator, max_locations: int = 3) -> EnergySystem:
    """A valid system drawing on every carrier, demand and component type.

    Meant for round-trip and validation tests; nothing guarantees the
    lowered model is feasible.
    """
    n = int(rng.integers(1, 5))
    freq = str(rng.choice(["15T", "30T", "60T"]))
    minutes = int(freq[:-1]) * n
    start = f"2024-{int(rng.integers(1, 13)):02d}-{int(rng.integers(1, 28)):02d} 00:00"
    end = f"{start[:10]} {minutes // 60:02d}:{minutes % 60:02d}"
    es = EnergySystem(time_index={"start": start, "end": end, "freq": freq})

    def series(lo, hi):
        return [round(float(v), 3) for v in rng.uniform(lo, hi, n)]

    def maybe(p):
        return rng.random() < p

    names = [f"loc{i}" for i in range(int(rng.integers(1, max_locations + 1)))]
    for name in names:
        loc = Location(name)
        es.add(loc)
        price = series(5, 40) if maybe(0.5) else round(float(rng.uniform(5, 40)), 2)
        loc.add_carrier(carriers.Electricity(
            working_price=price,
            demand_rate=round(float(rng.uniform(0, 20)), 2) if maybe(0.5) else None,
            feed_in_price=round(float(rng.uniform(0, 10)), 2) if maybe(0.3) else None,
        ))
        if maybe(0.7):
            loc.add_demand(demands.Electricity(name="household", time_series=series(0, 8)))
        if maybe(0.4):
            loc.add_component(technologies.RenewableSource(max_power=series(0, 6)))
        if maybe(0.3):
            cap = round(float(rng.uniform(2, 15)), 2)
            levels = (0.0, 0.8, 1.0) if maybe(0.5) else None
            loc.add_component(technologies.Battery(
                capacity=cap,
                initial_content=round(float(rng.uniform(0, cap)), 2),
                charge_levels=levels,
                charge_rates=(0.0, 0.5 * cap, 0.2 * cap) if levels else None,
            ))

        if maybe(0.8):
            temps = sorted(int(t) for t in rng.choice(np.arange(20, 85, 5), size=int(rng.integers(2, 5)), replace=False))
            ref = float(rng.choice([0, 5, 10]))
            loc.add_carrier(carriers.Heat(temperature_levels=temps, reference_temperature=ref))
            for i, T in enumerate(temps[1:]):
                if maybe(0.7):
                    back = ref if maybe(0.3) else float(temps[0])
                    loc.add_demand(demands.FixedTemperatureHeat(
                        name=f"heat {i}", flow_temperature=T, return_temperature=back, time_series=series(0, 10)))
            if maybe(0.6):
                loc.add_component(technologies.HeatPump(cop_0_35=round(float(rng.uniform(3, 5)), 2),
                                                        thermal_power_limit=None if maybe(0.5) else 20.0))
                loc.add_component(technologies.AirHeatExchanger(air_temperature=series(-10, 15)))
                if maybe(0.3):
                    loc.add_component(technologies.GeothermalSource(temperature=[10.0] * n))
            if maybe(0.3):
                loc.add_carrier(carriers.NaturalGas(pressure_levels=[1.0], working_price=6.5))
                loc.add_component(technologies.CHP(nominal_power=5.0, electrical_efficiency=0.3, thermal_efficiency=0.55,
                                                   outlet_temperature=float(temps[-1])))
            if maybe(0.3):
                loc.add_component(technologies.MixedHeatStorage(capacity=round(float(rng.uniform(5, 30)), 2)))
            elif maybe(0.3):
                loc.add_component(technologies.LayeredHeatStorage(capacity=round(float(rng.uniform(5, 30)), 2)))

        if maybe(0.3):
            pressures = [30.0, 350.0] if maybe(0.5) else [30.0, 350.0, 700.0]
            loc.add_carrier(carriers.Hydrogen(pressure_levels=pressures))
            loc.add_component(technologies.Electrolyzer(nominal_power=10.0, hydrogen_efficiency=0.6))
            loc.add_component(technologies.Compressor(specific_work=round(float(rng.uniform(0.05, 0.2)), 3)))
            loc.add_component(technologies.GasStorage(c_e=0.05, max_pressure=pressures[-1]))
            loc.add_demand(demands.GasDemand(name="fuel", pressure=pressures[-1], time_series=series(0, 3)))

    for a, b in zip(names, names[1:]):
        if maybe(0.6):
            es.add_link(Link(location_a=a, location_b=b, carrier="Electricity",
                             capacity=round(float(rng.uniform(1, 20)), 2) if maybe(0.5) else None))
    return es


def finite(x) -> bool:
    return x is not None and math.isfinite(x)
