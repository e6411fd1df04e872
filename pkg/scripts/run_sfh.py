"""Solve the single-family home and print the per-interval energy balance."""

import sys
from pathlib import Path

from resmilp import flows, load, lower, solve_milp
from resmilp.lowering import cop
from resmilp.reporting import total

ROOT = Path(__file__).resolve().parent.parent


def main(path=ROOT / "models" / "sfh.yaml"):
    system = load(path)
    model = lower(system)
    sol = solve_milp(model)
    print(sol.summary_line())
    if not sol.optimal:
        return 1
    air = system.locations["SFH"].components["AirHeatExchanger"].air_temperature
    for t, stamp in enumerate(model.timestamps):
        records = [r for r in flows(sol, model, {"carrier": "Electricity"}) if r.time == stamp]
        grid = total(r for r in records if "origin:grid" in r.tags)
        hp = total(r for r in records if r.target == "SFH.HeatPump")
        print(f"{stamp}  air {air[t]:5.1f} °C  grid {grid:8.4f} kW  heat pump {hp:8.4f} kW  "
              f"COP(30) {cop(air[t], 30, 3.8):.3f}  COP(55) {cop(air[t], 55, 3.8):.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main(*sys.argv[1:2]))
