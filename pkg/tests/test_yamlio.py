import numpy as np
import pytest
import yaml
from hypothesis import given, settings
from hypothesis import strategies as st

from resmilp import export_yaml, load, lower, parse, validate
from resmilp.instances import random_spec, sfh_system
from resmilp.model import EnergySystem, TimeIndex
from resmilp.yamlio import (
    ColumnNotFound,
    FileNotFound,
    MissingNaNTerminator,
    NonNumericValue,
    SchemaError,
    SeriesLengthMismatch,
    TimestampMismatch,
    resolve_csv_series,
)

SFH_INDEX = TimeIndex(start="2021-07-10 06:00:00", end="2021-07-10 08:00:00", freq="60T")


def test_listing_equals_builder(sfh_yaml):
    parsed = load(sfh_yaml)
    assert parsed == sfh_system()
    assert not validate(parsed)


def test_listing_lowers_to_identical_model(sfh_yaml):
    assert lower(load(sfh_yaml)).dumps() == lower(sfh_system()).dumps()


def test_trailing_dot_floats(sfh_yaml):
    heat = load(sfh_yaml).locations["SFH"].carriers["Heat"]
    assert heat.temperature_levels == (20.0, 30.0, 55.0)


def test_short_series_rejected(sfh_yaml):
    text = sfh_yaml.read_text().replace("[7, 8.4]", "[7]")
    with pytest.raises(SeriesLengthMismatch) as err:
        parse(text)
    assert err.value.path == "locations.SFH.demands[0].time_series"


def test_duplicate_key_listing_rejected(sfh_yaml):
    # the mapping form with the type repeated as a key is not valid YAML
    doc = """
general:
  timeindex: {start: 2021-07-10 06:00:00, end: 2021-07-10 08:00:00, freq: 60T}
locations:
  SFH:
    demands:
      FixedTemperatureHeat:
        name: a
      FixedTemperatureHeat:
        name: b
"""
    with pytest.raises(SchemaError, match="duplicate key"):
        parse(doc)


def test_name_keyed_demands(sfh_yaml):
    text = sfh_yaml.read_text()
    head, tail = text.split("    demands:\n")
    _, components = tail.split("    components:\n")
    demands = """    demands:
      hot water:
        type: FixedTemperatureHeat
        flow_temperature: 55
        return_temperature: 10
        time_series: [0, 12]
      space heating:
        type: FixedTemperatureHeat
        flow_temperature: 30
        return_temperature: 20
        time_series: [13.37, 42]
      electricity demand:
        type: Electricity
        time_series: [7, 8.4]
"""
    assert parse(head + demands + "    components:\n" + components) == sfh_system()


def test_name_keyed_demand_needs_type():
    doc = """
general:
  timeindex: {start: 2021-07-10 06:00, end: 2021-07-10 08:00, freq: 60T}
locations:
  SFH:
    demands:
      load: {time_series: [1, 2]}
"""
    with pytest.raises(SchemaError) as err:
        parse(doc)
    assert err.value.path == "locations.SFH.demands.load"


@pytest.mark.parametrize(
    "old, new, path",
    [
        ("flow_temperature: 30", "flow_temperature: warm", "locations.SFH.demands[1].flow_temperature"),
        ("flow_temperature: 30", "flow_temprature: 30", "locations.SFH.demands[1].flow_temprature"),
        ("cop_0_35: 3.8", "cop: 3.8", "locations.SFH.components.HeatPump.parameters.cop"),
        ("HeatPump:", "HeatPumpX:", "locations.SFH.components.HeatPumpX"),
        ("      Electricity:\n        demand_rate", "      Electrity:\n        demand_rate", "locations.SFH.carriers.Electrity"),
        ("general:", "generel:", "generel"),
        ("    freq: 60T", "    freq: 60T\n    tz: UTC", "general.timeindex.tz"),
        ("[3, 9]", "[3, x]", "locations.SFH.components.AirHeatExchanger.parameters.air_temperature"),
    ],
)
def test_schema_errors_carry_paths(sfh_yaml, old, new, path):
    text = sfh_yaml.read_text()
    assert old in text
    with pytest.raises(SchemaError) as err:
        parse(text.replace(old, new, 1))
    assert err.value.path == path


def test_invalid_yaml_is_a_schema_error():
    with pytest.raises(SchemaError, match="invalid YAML"):
        parse("general: [unclosed")


def test_validation_paths_after_parse(sfh_yaml):
    text = sfh_yaml.read_text().replace("flow_temperature: 30", "flow_temperature: 60")
    report = validate(parse(text))
    assert [i.path for i in report] == ["locations.SFH.demands[space heating].flow_temperature"]


# -- CSV ----------------------------------------------------------------------


def write_csv(tmp_path, rows, header="time,temperature (°C)"):
    path = tmp_path / "weather.csv"
    path.write_text(header + "\n" + "\n".join(rows) + "\n", encoding="utf-8")
    return path


def test_csv_left_indexed(tmp_path):
    path = write_csv(tmp_path, ["2021-07-10 06:00:00,3", "2021-07-10 07:00:00,9", "2021-07-10 08:00:00,NaN"])
    assert resolve_csv_series(path, "temperature (°C)", SFH_INDEX) == (3.0, 9.0)


def test_csv_empty_cell_terminates(tmp_path):
    path = write_csv(tmp_path, ["2021-07-10 06:00:00,3", "2021-07-10 07:00:00,9", "2021-07-10 08:00:00,"])
    assert resolve_csv_series(path, "temperature (°C)", SFH_INDEX) == (3.0, 9.0)


def test_csv_final_value_must_be_nan(tmp_path):
    path = write_csv(tmp_path, ["2021-07-10 06:00:00,3", "2021-07-10 07:00:00,9", "2021-07-10 08:00:00,5.0"])
    with pytest.raises(MissingNaNTerminator):
        resolve_csv_series(path, "temperature (°C)", SFH_INDEX)


def test_csv_missing_boundary_row(tmp_path):
    path = write_csv(tmp_path, ["2021-07-10 06:00:00,3", "2021-07-10 07:00:00,9"])
    with pytest.raises(MissingNaNTerminator):
        resolve_csv_series(path, "temperature (°C)", SFH_INDEX)


def test_csv_timestamp_mismatch(tmp_path):
    path = write_csv(tmp_path, ["2021-07-10 06:00:00,3", "2021-07-10 07:30:00,9", "2021-07-10 08:00:00,NaN"])
    with pytest.raises(TimestampMismatch):
        resolve_csv_series(path, "temperature (°C)", SFH_INDEX)


@pytest.mark.parametrize("cell", ["warm", "NaN"])
def test_csv_non_numeric(tmp_path, cell):
    path = write_csv(tmp_path, ["2021-07-10 06:00:00,3", f"2021-07-10 07:00:00,{cell}", "2021-07-10 08:00:00,NaN"])
    with pytest.raises(NonNumericValue):
        resolve_csv_series(path, "temperature (°C)", SFH_INDEX)


def test_csv_missing_file_and_column(tmp_path):
    with pytest.raises(FileNotFound):
        resolve_csv_series(tmp_path / "nope.csv", "x", SFH_INDEX)
    path = write_csv(tmp_path, ["2021-07-10 06:00:00,3", "2021-07-10 07:00:00,9", "2021-07-10 08:00:00,NaN"])
    with pytest.raises(ColumnNotFound):
        resolve_csv_series(path, "temperature", SFH_INDEX)


def test_file_reference_in_document(models_dir):
    weather = load(models_dir / "sfh_weather.yaml")
    assert weather.locations["SFH"].components["AirHeatExchanger"].air_temperature == (3.0, 9.0)
    assert weather == sfh_system()


def test_file_reference_errors_carry_paths(models_dir, tmp_path):
    text = (models_dir / "sfh_weather.yaml").read_text(encoding="utf-8")
    with pytest.raises(FileNotFound) as err:
        parse(text, base_dir=tmp_path)
    assert err.value.path == "locations.SFH.components.AirHeatExchanger.parameters.air_temperature"
    with pytest.raises(ColumnNotFound):
        parse(text.replace("temperature (°C)", "wind"), base_dir=models_dir)


# -- export -------------------------------------------------------------------


def test_export_inlines_csv_series(models_dir):
    text = export_yaml(load(models_dir / "sfh_weather.yaml"))
    assert "file=" not in text
    assert parse(text) == sfh_system()


def test_export_is_canonical(sfh):
    text = export_yaml(sfh)
    doc = yaml.safe_load(text)
    assert list(doc) == ["general", "locations"]
    names = [next(iter(d.values()))["name"] for d in doc["locations"]["SFH"]["demands"]]
    assert names == sorted(names)
    assert export_yaml(parse(text)) == text


def test_empty_system():
    es = EnergySystem(time_index={"start": "2021-07-10 06:00", "end": "2021-07-10 08:00", "freq": "60T"})
    text = export_yaml(es)
    assert "locations: {}" in text
    assert parse(text) == es


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_round_trip_on_generated_specs(seed):
    spec = random_spec(np.random.default_rng(seed))
    assert not validate(spec)
    text = export_yaml(spec)
    assert parse(text) == spec
    assert export_yaml(parse(text)) == text


def test_parse_is_deterministic(sfh_yaml):
    text = sfh_yaml.read_text()
    assert export_yaml(parse(text)) == export_yaml(parse(text))
