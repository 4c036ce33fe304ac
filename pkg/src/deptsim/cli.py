"""Command-line interface.

Subcommands: validate a scenario, run replications of one scenario, run the
two staffing experiments as sweeps, and render charts from a results CSV.
All randomness flows from the seed; rerunning any command with the same
inputs reproduces its output files byte for byte.

Exit codes: 0 success, 1 scenario validation failed, 2 usage error (also
unknown KPI), 3 missing input file, 4 output not writable, 5 malformed
results CSV.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Any

import yaml

from . import reporting, scenario
from .presets import PRESETS, preset_mapping

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_MISSING_INPUT = 3
EXIT_OUTPUT = 4
EXIT_BAD_CSV = 5


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="deptsim", description="Retail department floor simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_scenario_args(p: argparse.ArgumentParser, with_output: bool = True) -> None:
        p.add_argument("--config", type=Path, help="scenario YAML file")
        p.add_argument("--preset", choices=sorted(PRESETS), help="shipped department preset")
        p.add_argument("--seed", type=int, help="base random seed (overrides scenario)")
        p.add_argument("--replications", type=int, help="replications per scenario or arm")
        p.add_argument("--weeks", type=int, help="simulated weeks (overrides scenario)")
        p.add_argument("--warmup-weeks", type=int, help="weeks excluded from KPIs (overrides scenario)")
        if with_output:
            p.add_argument("--output", type=Path, required=True, help="output directory")

    p_validate = sub.add_parser("validate", help="validate a scenario and list every violation")
    add_scenario_args(p_validate, with_output=False)

    p_run = sub.add_parser("run", help="run one scenario's replications, write results and summary CSVs")
    add_scenario_args(p_run)

    p_tills = sub.add_parser("sweep-tills", help="vary tills open (cashiers 1..9, ten staff total)")
    add_scenario_args(p_tills)

    p_experts = sub.add_parser("sweep-experts", help="vary expert sellers (0..4, ten staff total)")
    add_scenario_args(p_experts)

    p_report = sub.add_parser("report", help="render a KPI chart and summary table from a results CSV")
    p_report.add_argument("--results", type=Path, required=True, help="results CSV from run or sweep commands")
    p_report.add_argument("--kpi", default="service_level_index", help="KPI column to chart")
    p_report.add_argument("--output", type=Path, required=True, help="output directory")
    p_report.add_argument(
        "--format", default="svg", choices=["svg", "pdf"], help="chart file format (default svg)"
    )
    return parser


def _scenario_mapping(args: argparse.Namespace) -> dict[str, Any]:
    if args.config is not None:
        if not args.config.exists():
            print(f"error: config file not found: {args.config}", file=sys.stderr)
            raise SystemExit(EXIT_MISSING_INPUT)
        raw = yaml.safe_load(args.config.read_text(encoding="utf-8")) or {}
        if not isinstance(raw, dict):
            print(f"error: {args.config}: top level must be a mapping", file=sys.stderr)
            raise SystemExit(EXIT_VALIDATION)
        return raw
    if args.preset is not None:
        return preset_mapping(args.preset)
    print("error: provide --config or --preset", file=sys.stderr)
    raise SystemExit(EXIT_USAGE)


def _load_scenario(args: argparse.Namespace) -> scenario.ScenarioConfig:
    mapping = _scenario_mapping(args)
    for key in ("seed", "replications", "weeks"):
        value = getattr(args, key)
        if value is not None:
            mapping[key] = value
    if args.warmup_weeks is not None:
        mapping["warmup_weeks"] = args.warmup_weeks
    name = args.preset or (args.config.stem if args.config else "custom")
    try:
        return scenario.build_config(mapping, name=name)
    except scenario.ConfigError as exc:
        for violation in exc.violations:
            print(f"invalid: {violation}", file=sys.stderr)
        raise SystemExit(EXIT_VALIDATION)


def _prepare_output(directory: Path) -> None:
    try:
        directory.mkdir(parents=True, exist_ok=True)
        probe = directory / ".write-probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        print(f"error: output directory not writable: {directory} ({exc})", file=sys.stderr)
        raise SystemExit(EXIT_OUTPUT)


def _cmd_validate(args: argparse.Namespace) -> int:
    mapping = _scenario_mapping(args)
    try:
        config = scenario.build_config(mapping, name=args.preset or "custom")
    except scenario.ConfigError as exc:
        for violation in exc.violations:
            print(f"invalid: {violation}")
        print(f"{len(exc.violations)} violation(s) found")
        return EXIT_VALIDATION
    print(f"ok: scenario {config.name!r} is valid "
          f"({config.staffing.total()} staff, {config.weeks} weeks, seed {config.seed})")
    return EXIT_OK


def _cmd_run(args: argparse.Namespace) -> int:
    config = _load_scenario(args)
    _prepare_output(args.output)
    reports = []
    for rep in range(config.replications):
        report = scenario.run_replication(config, rep)
        report.arm_value = config.staffing.cashiers
        reports.append(report)
    results_path = reporting.write_results_csv(reports, args.output / "replications.csv")
    rows = reporting.read_results_csv(results_path)
    reporting.write_summary_csv(rows, args.output / "summary.csv")
    mean_index = sum(r.service_level_index for r in reports) / len(reports)
    mean_tx = sum(r.transactions for r in reports) / len(reports)
    print(f"{config.name}: {config.replications} replication(s), "
          f"mean transactions {mean_tx:.1f}, mean service level index {mean_index:.3f}")
    print(f"wrote {results_path} and {args.output / 'summary.csv'}")
    return EXIT_OK


def _run_sweep_command(args: argparse.Namespace, parameter: str) -> int:
    config = _load_scenario(args)
    _prepare_output(args.output)
    if parameter == "cashiers":
        result = scenario.run_experiment_tills(config, replications=args.replications)
        stem = "sweep_tills"
        label = "cashiers (tills open)"
    else:
        result = scenario.run_experiment_experts(config, replications=args.replications)
        stem = "sweep_experts"
        label = "expert sellers"
    results_path = reporting.write_results_csv(result.reports(), args.output / f"{stem}.csv")
    rows = reporting.read_results_csv(results_path)
    reporting.write_summary_csv(rows, args.output / f"{stem}_summary.csv")
    print(f"{config.name} {stem}: {len(result.arms)} arms x {len(result.arms[0].reports)} replications")
    for arm in result.arms:
        print(f"  {label}={arm.value}: service_level_index mean {arm.mean('service_level_index'):.3f} "
              f"std {arm.std('service_level_index'):.3f}")
    best = result.argmax_arm("service_level_index")
    print(f"  best arm by service_level_index: {label}={best}")
    print(f"wrote {results_path} and {args.output / (stem + '_summary.csv')}")
    return EXIT_OK


def _cmd_report(args: argparse.Namespace) -> int:
    if not args.results.exists():
        print(f"error: results file not found: {args.results}", file=sys.stderr)
        return EXIT_MISSING_INPUT
    _prepare_output(args.output)
    try:
        rows = reporting.read_results_csv(args.results)
    except reporting.MalformedCsvError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_CSV
    chart_path = args.output / f"{args.kpi}.{args.format}"
    try:
        reporting.render_chart(rows, args.kpi, chart_path)
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return EXIT_USAGE
    reporting.write_summary_csv(rows, args.output / f"{args.kpi}_summary.csv")
    print(f"wrote {chart_path} and {args.output / (args.kpi + '_summary.csv')}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "validate":
            return _cmd_validate(args)
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "sweep-tills":
            return _run_sweep_command(args, "cashiers")
        if args.command == "sweep-experts":
            return _run_sweep_command(args, "experts")
        if args.command == "report":
            return _cmd_report(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    parser.error(f"unknown command {args.command!r}")
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
