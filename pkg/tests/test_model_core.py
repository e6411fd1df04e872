import itertools

import pytest

from resmilp.model import (
    DuplicateCarrier,
    DuplicateComponent,
    DuplicateDemandName,
    DuplicateLocation,
    EnergySystem,
    Link,
    Location,
    carriers,
    demands,
    technologies,
    validate,
)

SFH_INDEX = {"start": "2021-07-10 06:00:00", "end": "2021-07-10 08:00:00", "freq": "60T"}


def messages(report):
    return [str(issue) for issue in report]


def test_sfh_is_valid(sfh):
    assert not validate(sfh)
    assert validate(sfh).ok


def test_add_heat_carrier():
    loc = Location("SFH")
    loc.add_carrier(carriers.Heat(temperature_levels=[20, 30, 55], reference_temperature=10))
    assert loc.carriers["Heat"].levels == (20.0, 30.0, 55.0)


def test_duplicate_carrier():
    loc = Location("SFH")
    loc.add_carrier(carriers.Electricity(working_price=35))
    with pytest.raises(DuplicateCarrier):
        loc.add_carrier(carriers.Electricity(working_price=30))


def test_reference_not_below_lowest_level():
    es = EnergySystem(time_index=SFH_INDEX)
    loc = Location("SFH")
    es.add(loc)
    loc.add_carrier(carriers.Heat(temperature_levels=[20, 30, 55], reference_temperature=30))
    report = validate(es)
    assert len(report) == 1
    assert "reference_temperature" in messages(report)[0]


def test_duplicate_component_and_demand_name():
    loc = Location("SFH")
    loc.add_component(technologies.HeatPump(cop_0_35=3.8))
    with pytest.raises(DuplicateComponent):
        loc.add_component(technologies.HeatPump(cop_0_35=4.0))
    loc.add_demand(demands.FixedTemperatureHeat("hot water", 55, 10, [0, 12]))
    with pytest.raises(DuplicateDemandName):
        loc.add_demand(demands.FixedTemperatureHeat("hot water", 30, 20, [1, 1]))


def test_duplicate_location():
    es = EnergySystem(time_index=SFH_INDEX)
    es.add(Location("A"))
    with pytest.raises(DuplicateLocation):
        es.add(Location("A"))


def test_demand_without_carrier_is_deferred_to_validate():
    es = EnergySystem(time_index=SFH_INDEX)
    loc = Location("SFH")
    es.add(loc)
    loc.add_demand(demands.FixedTemperatureHeat("space heating", 30, 20, [1, 2]))
    assert messages(validate(es)) == ["locations.SFH.demands[space heating]: heat demand requires a Heat carrier"]


def test_flow_temperature_not_a_level(sfh):
    loc = sfh.locations["SFH"]
    loc.demands["hot water"] = demands.FixedTemperatureHeat("hot water", 60, 10, [0, 12])
    report = validate(sfh)
    assert len(report) == 1
    issue = next(iter(report))
    assert issue.path == "locations.SFH.demands[hot water].flow_temperature"
    assert "not among carrier levels" in issue.message


def test_heat_pump_without_anergy_source(sfh):
    del sfh.locations["SFH"].components["AirHeatExchanger"]
    assert messages(validate(sfh)) == ["locations.SFH.components.HeatPump: heat pump has no anergy source"]


def test_series_length_mismatch(sfh):
    sfh.locations["SFH"].demands["electricity demand"] = demands.Electricity("electricity demand", [7, 8.4, 3])
    report = validate(sfh)
    assert len(report) == 1
    assert next(iter(report)).path == "locations.SFH.demands[electricity demand].time_series"


def test_link_to_missing_carrier():
    es = EnergySystem(time_index=SFH_INDEX)
    a, b = Location("A"), Location("B")
    a.add_carrier(carriers.Electricity(working_price=30))
    es.add(a)
    es.add(b)
    es.add_link(Link("A", "B", "Electricity", capacity=5))
    assert messages(validate(es)) == ["links[A-B:Electricity]: location 'B' has no Electricity carrier"]


def test_zero_carrier_location_is_valid():
    es = EnergySystem(time_index=SFH_INDEX)
    es.add(Location("empty"))
    assert validate(es).ok


@pytest.mark.parametrize(
    "component, field",
    [
        (technologies.HeatPump(cop_0_35=0.9), "cop_0_35"),
        (technologies.Electrolyzer(nominal_power=10, hydrogen_efficiency=1.2), "hydrogen_efficiency"),
        (technologies.RenewableSource(max_power=[-1, 2]), "max_power"),
    ],
)
def test_component_sanity(component, field):
    es = EnergySystem(time_index=SFH_INDEX)
    loc = Location("X")
    es.add(loc)
    loc.add_carrier(carriers.Electricity(working_price=1))
    loc.add_carrier(carriers.Hydrogen(pressure_levels=[30]))
    loc.add_carrier(carriers.Heat(temperature_levels=[30]))
    loc.add_component(technologies.AirHeatExchanger(air_temperature=[3, 9]))
    loc.add_component(component)
    paths = [issue.path for issue in validate(es)]
    assert paths == [f"locations.X.components.{component.kind}.{field}"]


def test_validate_is_pure(sfh):
    sfh.locations["SFH"].demands["hot water"] = demands.FixedTemperatureHeat("hot water", 60, 10, [0, 12])
    before = repr(sfh)
    assert messages(validate(sfh)) == messages(validate(sfh))
    assert repr(sfh) == before


def test_construction_order_does_not_matter(sfh):
    items = [
        carriers.Electricity(costs={"working_price": 35, "demand_rate": 0}),
        demands.Electricity(name="electricity demand", time_series=[7, 8.4]),
        carriers.Heat(temperature_levels=[20, 30, 55], reference_temperature=10),
        demands.FixedTemperatureHeat("space heating", 30, 20, [13.37, 42]),
        demands.FixedTemperatureHeat("hot water", 55, 10, [0, 12]),
        technologies.HeatPump(cop_0_35=3.8),
        technologies.AirHeatExchanger(air_temperature=[3, 9]),
    ]
    for perm in itertools.islice(itertools.permutations(items), 0, 5040, 97):
        loc = Location("SFH")
        for item in perm:
            loc.add(item)
        es = EnergySystem(time_index=SFH_INDEX)
        es.add(loc)
        assert es == sfh


def test_location_added_before_population(sfh):
    loc = Location("SFH")
    es = EnergySystem(time_index=SFH_INDEX, locations=[loc])
    for item in sfh.locations["SFH"].carriers.values():
        loc.add(item)
    for item in sfh.locations["SFH"].demands.values():
        loc.add(item)
    for item in sfh.locations["SFH"].components.values():
        loc.add(item)
    assert es == sfh


def test_costs_dict_equals_keywords():
    assert carriers.Electricity(costs={"working_price": 35, "demand_rate": 0}) == carriers.Electricity(
        working_price=35, demand_rate=0
    )
