"""Command-line entry point.

Subcommands:
  run      one quadrant config, one scenario (or all three), CSVs + charts
  sweep    five-multiplier sensitivity sweep over one factor
  compare  all four quadrants x three scenarios, with comparison grids

Exit codes: 0 success, 1 configuration error, 2 control-check failure,
3 I/O error. The STABLESIM_SEED environment variable overrides the
configured seed.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .charts import render_charts, render_compare_grid, render_sensitivity_panels
from .config import QUADRANT_FILES, ExperimentSpec, default_config_path, load_config
from .engine import EnsembleResult, run_ensemble, run_sensitivity
from .errors import ConfigError, ControlFailure, SimulationError
from .model import Scenario, SensitivityFactor, quadrant_label
from .output import write_csv

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_CONTROL = 2
EXIT_IO = 3

SCENARIO_CHOICES = [s.value for s in Scenario] + ["all"]
FACTOR_CHOICES = [f.value for f in SensitivityFactor]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stablesim",
        description="Agent-based Monte Carlo simulator for stablecoin designs")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one experiment")
    run_p.add_argument("--config", required=True, help="experiment config file")
    run_p.add_argument("--scenario", choices=SCENARIO_CHOICES, default=None,
                       help="scenario override (default: from config)")
    run_p.add_argument("--seed", type=int, default=None)
    run_p.add_argument("--out", default=None, help="output directory")
    run_p.add_argument("--no-charts", action="store_true")

    sweep_p = sub.add_parser("sweep", help="five-multiplier sensitivity sweep")
    sweep_p.add_argument("--config", required=True)
    sweep_p.add_argument("--factor", choices=FACTOR_CHOICES, required=True)
    sweep_p.add_argument("--scenario", choices=SCENARIO_CHOICES[:-1],
                         default=None,
                         help="scenario (default: negative for the shock "
                              "factor, otherwise from config)")
    sweep_p.add_argument("--seed", type=int, default=None)
    sweep_p.add_argument("--out", default=None)
    sweep_p.add_argument("--no-charts", action="store_true")

    cmp_p = sub.add_parser(
        "compare", help="all four quadrants x three scenarios")
    cmp_p.add_argument("--seed", type=int, default=None)
    cmp_p.add_argument("--out", default="out")
    cmp_p.add_argument("--paths", type=int, default=None,
                       help="override n_paths for all quadrants")
    cmp_p.add_argument("--steps", type=int, default=None,
                       help="override n_steps for all quadrants")
    cmp_p.add_argument("--no-charts", action="store_true")
    return parser


def _env_seed() -> int | None:
    raw = os.environ.get("STABLESIM_SEED")
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"STABLESIM_SEED is not an integer: {raw!r}") from None


def _report_failures(ensemble: EnsembleResult) -> bool:
    for path_index, message in ensemble.failures:
        print(f"control failure on path {path_index}: {message}",
              file=sys.stderr)
    return bool(ensemble.failures)


def _cmd_run(args) -> int:
    seed = args.seed if args.seed is not None else _env_seed()
    scenario = None
    if args.scenario and args.scenario != "all":
        scenario = Scenario(args.scenario)
    spec = load_config(args.config, scenario=scenario, seed=seed)
    out_dir = Path(args.out if args.out is not None else spec.out_dir)
    scenarios = (list(Scenario) if args.scenario == "all"
                 else [spec.config.scenario])

    had_control_failure = False
    results: dict[Scenario, EnsembleResult] = {}
    for scen in scenarios:
        ensemble = run_ensemble(spec.config.with_scenario(scen))
        results[scen] = ensemble
        had_control_failure |= _report_failures(ensemble)
        target = out_dir / scen.value if len(scenarios) > 1 else out_dir
        for written in write_csv(ensemble, target):
            print(f"wrote {written}")
    if spec.charts and not args.no_charts:
        for written in render_charts(results, out_dir):
            print(f"wrote {written}")
    return EXIT_CONTROL if had_control_failure else EXIT_OK


def _cmd_sweep(args) -> int:
    seed = args.seed if args.seed is not None else _env_seed()
    factor = SensitivityFactor(args.factor)
    if args.scenario:
        scenario = Scenario(args.scenario)
    elif factor is SensitivityFactor.SHOCK_MAGNITUDE:
        scenario = Scenario.NEGATIVE_SHOCK
    else:
        scenario = None
    spec = load_config(args.config, scenario=scenario, seed=seed)
    out_dir = Path(args.out if args.out is not None else spec.out_dir)

    results = run_sensitivity(spec.config, factor)
    had_control_failure = False
    for multiplier, ensemble in results.items():
        had_control_failure |= _report_failures(ensemble)
        for written in write_csv(ensemble, out_dir / f"mult_{multiplier:.2f}"):
            print(f"wrote {written}")
    if spec.charts and not args.no_charts:
        for written in render_sensitivity_panels(factor.value, results, out_dir):
            print(f"wrote {written}")
    return EXIT_CONTROL if had_control_failure else EXIT_OK


def _cmd_compare(args) -> int:
    from dataclasses import replace

    seed = args.seed if args.seed is not None else _env_seed()
    out_dir = Path(args.out)
    had_control_failure = False
    grid: dict[str, dict[Scenario, EnsembleResult]] = {}
    for (source, management), filename in QUADRANT_FILES.items():
        spec = load_config(default_config_path(source, management), seed=seed)
        config = spec.config
        if args.paths is not None:
            config = replace(config, n_paths=args.paths)
        if args.steps is not None:
            config = replace(config, n_steps=args.steps,
                             shock_step=min(config.shock_step,
                                            max(args.steps - 1, 0)))
        config.validate()
        label = quadrant_label(config.spec)
        grid[label] = {}
        for scen in Scenario:
            ensemble = run_ensemble(config.with_scenario(scen))
            had_control_failure |= _report_failures(ensemble)
            grid[label][scen] = ensemble
            target = out_dir / Path(filename).stem / scen.value
            for written in write_csv(ensemble, target):
                print(f"wrote {written}")
    if not args.no_charts:
        for written in render_compare_grid(grid, out_dir):
            print(f"wrote {written}")
    return EXIT_CONTROL if had_control_failure else EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        # argparse exits 2 on usage errors; fold into the config exit code,
        # but let --help (exit 0) through unchanged.
        return EXIT_OK if err.code == 0 else EXIT_CONFIG

    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        return _cmd_compare(args)
    except ConfigError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except ControlFailure as err:
        print(f"control failure: {err}", file=sys.stderr)
        return EXIT_CONTROL
    except SimulationError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_IO
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
