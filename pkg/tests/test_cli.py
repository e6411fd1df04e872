import csv
import shutil
import subprocess
import sys

import pytest

from resmilp import load, parse
from resmilp.cli import main
from resmilp.instances import sfh_system
from resmilp.reporting import parse_dot
from resmilp.solver import parse_lp


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_validate_ok(sfh_yaml, capsys):
    assert main(["validate", str(sfh_yaml)]) == 0
    assert capsys.readouterr().out.strip() == "ok"


def test_validate_invalid(sfh_yaml, tmp_path, capsys):
    bad = write(tmp_path, "bad.yaml", sfh_yaml.read_text().replace("flow_temperature: 30", "flow_temperature: 60"))
    assert main(["validate", str(bad)]) == 1
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and "flow_temperature" in err[0]


def test_validate_malformed(tmp_path, capsys):
    bad = write(tmp_path, "bad.yaml", "general: [unclosed\n")
    assert main(["validate", str(bad)]) == 2
    assert main(["validate", str(tmp_path / "missing.yaml")]) == 2


ISLAND = """
general:
  timeindex: {start: 2021-07-10 06:00:00, end: 2021-07-10 08:00:00, freq: 60T}
locations:
  island:
    carriers:
      Heat: {temperature_levels: [20, 30], reference_temperature: 10}
    demands:
      - FixedTemperatureHeat:
          name: space heating
          flow_temperature: 30
          return_temperature: 20
          time_series: [1, 2]
"""


def test_solve_island_is_infeasible(tmp_path, capsys):
    model = write(tmp_path, "island.yaml", ISLAND)
    assert main(["solve", str(model), "-o", str(tmp_path / "out")]) == 3
    assert "status: Infeasible" in (tmp_path / "out" / "summary.txt").read_text()


def test_solve_writes_results(sfh_yaml, tmp_path, capsys):
    out = tmp_path / "out"
    lp = tmp_path / "model.lp"
    assert main(["solve", str(sfh_yaml), "-o", str(out), "--export-lp", str(lp)]) == 0
    summary = (out / "summary.txt").read_text()
    assert "status: Optimal" in summary and "objective:" in summary
    rows = list(csv.DictReader((out / "solution.csv").open(newline="")))
    delivered = {}
    for row in rows:
        if "carrier:Heat" not in row["tags"] or "demand:" not in row["tags"]:
            continue
        # draw into the demand counts positive, return water out of it negative
        if row["target"].startswith("SFH.demand"):
            key, value = row["target"], float(row["value"])
        else:
            key, value = row["source"], -float(row["value"])
        delivered[key, row["time"]] = delivered.get((key, row["time"]), 0.0) + value
    assert delivered[("SFH.demand.space heating", "2021-07-10 07:00:00")] == pytest.approx(42)
    assert delivered[("SFH.demand.hot water", "2021-07-10 07:00:00")] == pytest.approx(12)
    assert lp.exists() and (tmp_path / "model.lp.names.json").exists()
    assert len(parse_lp(lp.read_text()).constraints) > 0


def test_solve_filter(sfh_yaml, tmp_path):
    out = tmp_path / "out"
    assert main(["solve", str(sfh_yaml), "-o", str(out), "--filter", "carrier=Electricity"]) == 0
    rows = list(csv.DictReader((out / "solution.csv").open(newline="")))
    assert rows and all("carrier:Electricity" in r["tags"] for r in rows)


def test_solve_flags(sfh_yaml, tmp_path):
    for flags in (["--strict-levels"], ["--no-time-discrete"], ["--cyclic-storage"], ["--gap", "1e-3"]):
        assert main(["solve", str(sfh_yaml), "-o", str(tmp_path / "o"), *flags]) == 0


def test_solve_is_byte_identical_without_timestamps(sfh_yaml, tmp_path):
    outs = []
    for name in ("a", "b"):
        main(["solve", str(sfh_yaml), "-o", str(tmp_path / name), "--no-timestamps"])
        outs.append([(tmp_path / name / f).read_bytes() for f in ("summary.txt", "solution.csv")])
    assert outs[0] == outs[1]
    assert b"wall_time" not in outs[0][0]


def test_graph_dot_and_graphml(sfh_yaml, tmp_path, capsys):
    dot = tmp_path / "sfh.dot"
    assert main(["graph", str(sfh_yaml), "-o", str(dot)]) == 0
    nodes, _ = parse_dot(dot.read_text())
    tops = {attrs["clusters"][0] for attrs in nodes.values()}
    assert tops == {"cluster_SFH"}
    gml = tmp_path / "sfh.graphml"
    assert main(["graph", str(sfh_yaml), "--format", "graphml", "-o", str(gml)]) == 0
    assert gml.read_text().startswith("<?xml")


def test_graph_invalid_model(sfh_yaml, tmp_path, capsys):
    bad = write(tmp_path, "bad.yaml", sfh_yaml.read_text().replace("flow_temperature: 30", "flow_temperature: 60"))
    assert main(["graph", str(bad), "-o", str(tmp_path / "g.dot")]) == 1


def test_export_inlines_series(models_dir, capsys):
    assert main(["export", str(models_dir / "sfh_weather.yaml")]) == 0
    text = capsys.readouterr().out
    assert "file=" not in text
    assert parse(text) == sfh_system() == load(models_dir / "sfh_weather.yaml")


def test_piped_export_solves_identically(sfh_yaml, tmp_path, capsys):
    assert main(["export", str(sfh_yaml)]) == 0
    exported = write(tmp_path, "exported.yaml", capsys.readouterr().out)
    for src, name in ((sfh_yaml, "a"), (exported, "b")):
        assert main(["solve", str(src), "-o", str(tmp_path / name), "--no-timestamps"]) == 0
    first, second = ((tmp_path / n / "summary.txt").read_text().splitlines() for n in "ab")
    assert first[1:] == second[1:]
    assert (tmp_path / "a" / "solution.csv").read_bytes() == (tmp_path / "b" / "solution.csv").read_bytes()


def test_console_script(sfh_yaml):
    exe = shutil.which("resmilp")
    cmd = [exe] if exe else [sys.executable, "-m", "resmilp.cli"]
    done = subprocess.run([*cmd, "validate", str(sfh_yaml)], capture_output=True, text=True)
    assert done.returncode == 0 and done.stdout.strip() == "ok"
