"""Command line: ``resmilp validate|solve|graph|export MODEL.yaml``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from datetime import datetime
from pathlib import Path

from . import yamlio
from .lowering import LoweringOptions, lower
from .model.system import SpecError, validate
from .reporting import export_graph, flows, to_csv
from .solver import NumericalBreakdown, export_lp, solve_milp

EXIT_OK, EXIT_INVALID, EXIT_PARSE, EXIT_INFEASIBLE, EXIT_NUMERICAL = 0, 1, 2, 3, 4

log = logging.getLogger("resmilp")


def _load(path):
    """Return (system, exit code); the code is nonzero when parsing or validation fails."""
    try:
        system = yamlio.load(path)
    except FileNotFoundError as err:
        print(f"error: {err}", file=sys.stderr)
        return None, EXIT_PARSE
    except (yamlio.SchemaError, yamlio.MissingNaNTerminator, yamlio.TimestampMismatch,
            yamlio.NonNumericValue, SpecError) as err:
        print(f"parse error: {err}", file=sys.stderr)
        return None, EXIT_PARSE
    report = validate(system)
    if report:
        print(report, file=sys.stderr)
        return system, EXIT_INVALID
    return system, EXIT_OK


def cmd_validate(args) -> int:
    system, code = _load(args.model)
    if code == EXIT_OK:
        print("ok")
    return code


def _filter(pairs):
    out = {}
    for item in pairs or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise SystemExit(f"--filter expects key=value, got {item!r}")
        out.setdefault(key, []).append(value)
    return out


def cmd_solve(args) -> int:
    system, code = _load(args.model)
    if code != EXIT_OK:
        return code
    options = LoweringOptions(time_discrete=args.time_discrete, strict=args.strict_levels, cyclic=args.cyclic_storage)
    model = lower(system, options)
    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    if args.export_lp:
        export_lp(model, args.export_lp)
        log.info("wrote %s", args.export_lp)
    try:
        solution = solve_milp(model, gap=args.gap)
    except NumericalBreakdown as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    summary = [
        f"model: {Path(args.model).name}",
        f"status: {solution.status}",
        f"objective: {solution.objective!r}",
        f"binaries: {len(model.binaries)}",
        f"variables: {len(model.variables)}",
        f"constraints: {len(model.constraints)}",
        f"solver: {solution.summary_line(timestamps=args.timestamps)}",
    ]
    if args.timestamps:
        summary.append(f"finished: {datetime.now().isoformat(timespec='seconds')}")
    (outdir / "summary.txt").write_text("\n".join(summary) + "\n", encoding="utf-8")
    print(solution.summary_line(timestamps=args.timestamps))
    if solution.status == "Infeasible":
        return EXIT_INFEASIBLE
    if not solution.optimal:
        return EXIT_NUMERICAL
    to_csv(flows(solution, model, _filter(args.filter)), outdir / "solution.csv")
    return EXIT_OK


def cmd_graph(args) -> int:
    system, code = _load(args.model)
    if code != EXIT_OK:
        return code
    text = export_graph(lower(system), args.format)
    target = Path(args.output) if args.output else Path(args.model).with_suffix("." + args.format)
    target.write_text(text, encoding="utf-8")
    print(target)
    return EXIT_OK


def cmd_export(args) -> int:
    system, code = _load(args.model)
    if code != EXIT_OK:
        return code
    sys.stdout.write(yamlio.export_yaml(system))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="resmilp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a model file")
    p.add_argument("model")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve", help="lower, solve and write results")
    p.add_argument("model")
    p.add_argument("-o", "--output", default="results", help="output directory")
    p.add_argument("--strict-levels", action="store_true", help="force y + ybar = 1")
    p.add_argument("--no-time-discrete", dest="time_discrete", action="store_false",
                   help="anchor level indicators to the content at interval start")
    p.add_argument("--cyclic-storage", action="store_true", help="require final content = initial content")
    p.add_argument("--gap", type=float, default=1e-6, help="absolute optimality gap")
    p.add_argument("--export-lp", metavar="PATH", help="also write the model in LP format")
    p.add_argument("--filter", action="append", metavar="KEY=VALUE", help="restrict solution.csv to tagged flows")
    p.add_argument("--no-timestamps", dest="timestamps", action="store_false",
                   help="omit wall times from summary.txt")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("graph", help="write the system graph")
    p.add_argument("model")
    p.add_argument("--format", choices=("dot", "graphml"), default="dot")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("export", help="print canonical YAML with series inlined")
    p.add_argument("model")
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("RESMILP_LOG_LEVEL", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
