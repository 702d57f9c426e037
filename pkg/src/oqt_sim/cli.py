"""Command-line entry point.

    oqt-sim --experiment fig1 --out out/fig1
    oqt-sim --config scenario.json --workers 8
    oqt-sim --suite quick

Precedence for seed, output directory and mode: command-line flag, then the
``OQT_SEED`` / ``OQT_OUT`` / ``OQT_MODE`` environment variables, then the
config file, then the experiment defaults. Exit status is 0 when every
check passes, 1 when any fails and 2 for an unusable configuration.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from oqt_sim import __version__
from oqt_sim.config.scenario import ExperimentName, ScenarioConfig, parse_config, with_overrides
from oqt_sim.config.settings import Config, RunMode, get_config
from oqt_sim.errors import ConfigurationError
from oqt_sim.runner import run
from oqt_sim.suite import SuiteLevel, suite
from oqt_sim.utils.structured_logging import get_logger, setup_structured_logging

logger = get_logger(__name__)

EXIT_CONFIG = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oqt-sim",
        description="Simulate objective quantum thermalization and the SUV collapse dynamics.",
    )
    parser.add_argument("--config", type=Path, help="JSON scenario file")
    parser.add_argument(
        "--experiment",
        choices=[e.value for e in ExperimentName],
        help="experiment to run with its default parameters",
    )
    parser.add_argument("--seed", type=int, help="master seed")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--workers", type=int, help="worker processes for trajectory ensembles")
    parser.add_argument("--mode", choices=[m.value for m in RunMode], help="dynamics to evaluate")
    parser.add_argument(
        "--suite",
        choices=[level.value for level in SuiteLevel],
        help="run the self-test suite instead of an experiment",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return parser


def resolve_config(args: argparse.Namespace, settings: Config) -> ScenarioConfig:
    """Merge file, environment and flags into one validated scenario."""
    if args.config is None and args.experiment is None:
        raise ConfigurationError("pass --config, --experiment or --suite")

    if args.config is not None:
        config = parse_config(args.config)
        if args.experiment is not None and ExperimentName(args.experiment) is not config.experiment:
            raise ConfigurationError(
                f"--experiment {args.experiment} conflicts with '{config.experiment.value}' "
                f"in {args.config}"
            )
    else:
        config = parse_config({"experiment": args.experiment})

    execution = settings.execution
    env: Dict[str, Any] = {
        "seed": execution.seed,
        "output_dir": execution.output_dir,
        "mode": execution.mode.value if execution.mode is not None else None,
    }
    flags: Dict[str, Any] = {"seed": args.seed, "output_dir": args.out, "mode": args.mode}
    return with_overrides(with_overrides(config, env), flags)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    try:
        settings = get_config()
    except ValueError as e:
        print(f"oqt-sim: invalid environment: {e}", file=sys.stderr)
        return EXIT_CONFIG

    setup_structured_logging(settings.monitoring.log_level, settings.monitoring.json_logging)
    if args.workers is not None and args.workers < 1:
        logger.error("--workers must be a positive integer")
        return EXIT_CONFIG

    if args.suite is not None:
        seed = args.seed if args.seed is not None else (settings.execution.seed or 0)
        out_dir = Path(args.out or settings.execution.output_dir or f"out/suite_{args.suite}")
        outcome = suite(SuiteLevel(args.suite), out_dir, args.workers, seed, settings)
        return outcome.exit_code

    try:
        config = resolve_config(args, settings)
    except ConfigurationError as e:
        logger.error(f"Configuration rejected: {e}")
        return EXIT_CONFIG

    return run(config, settings, args.workers).exit_code


if __name__ == "__main__":
    sys.exit(main())
