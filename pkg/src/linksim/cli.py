"""Command-line surface: simulate, effects, abtest, and sweep subcommands.

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .config import ConfigError, load_config
from .csvio import write_ab_estimates, write_effect_report, write_trajectories
from .engine import RunMode, Scenario, effect_report, run_many

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="linksim",
        description="Simulate link-recommendation interventions on a "
                    "growing social network and measure their effects.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in (
            ("simulate", "run the configured modes and write trajectories"),
            ("effects", "also decompose total/delayed/direct/indirect effects"),
            ("abtest", "run an A/B assignment and write per-arm estimates"),
            ("sweep", "repeat the run over the configured window list")):
        p = sub.add_parser(name, help=doc)
        p.add_argument("--config", required=True, help="scenario YAML path")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed-base", type=int, default=0,
                       help="offset added to every master seed")
        p.add_argument("--jobs", type=int, default=1,
                       help="concurrent trajectories")
    return parser


def _load(args) -> Scenario:
    scenario = load_config(args.config)
    if args.seed_base:
        scenario = replace(scenario,
                           seed_base=scenario.seed_base + args.seed_base)
    scenario.validate()
    return scenario


def _cmd_simulate(scenario: Scenario, out: Path, jobs: int) -> int:
    runs = run_many(scenario, jobs=jobs)
    trajs = [tr for mode in scenario.run_modes for tr in runs[mode]]
    write_trajectories(trajs, out / "trajectories.csv")
    return EXIT_OK


def _cmd_effects(scenario: Scenario, out: Path, jobs: int) -> int:
    modes = [RunMode.NATURAL, RunMode.INTERVENED, RunMode.UNMEDIATED]
    runs = run_many(scenario, modes=modes, jobs=jobs)
    trajs = [tr for mode in modes for tr in runs[mode]]
    write_trajectories(trajs, out / "trajectories.csv")
    times = scenario.effects_times or (scenario.window.hi, scenario.horizon)
    entries = effect_report(runs[RunMode.NATURAL], runs[RunMode.INTERVENED],
                            runs[RunMode.UNMEDIATED],
                            scenario.effects_metrics, times, scenario.window)
    write_effect_report(entries, out / "effects.csv")
    return EXIT_OK


def _cmd_abtest(scenario: Scenario, out: Path, jobs: int) -> int:
    if scenario.ab is None:
        raise ConfigError("abtest requires an ab section in the config")
    runs = run_many(scenario, modes=[RunMode.AB], jobs=jobs)
    write_trajectories(runs[RunMode.AB], out / "trajectories.csv")
    write_ab_estimates(runs[RunMode.AB], out / "ab_estimates.csv")
    return EXIT_OK


def _cmd_sweep(scenario: Scenario, out: Path, jobs: int) -> int:
    if not scenario.sweep_windows:
        raise ConfigError("sweep requires sweep.windows in the config")
    trajs = []
    for window in scenario.sweep_windows:
        variant = replace(scenario, window=window)
        runs = run_many(variant, jobs=jobs)
        trajs += [tr for mode in variant.run_modes for tr in runs[mode]]
    write_trajectories(trajs, out / "trajectories.csv", window_label=True)
    return EXIT_OK


_COMMANDS = {"simulate": _cmd_simulate, "effects": _cmd_effects,
             "abtest": _cmd_abtest, "sweep": _cmd_sweep}


def run_command(argv) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        scenario = _load(args)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"linksim: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return _COMMANDS[args.command](scenario, out, max(1, args.jobs))
    except ConfigError as exc:
        print(f"linksim: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"linksim: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
