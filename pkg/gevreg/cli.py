"""Command-line front end.

Usage: ``gevreg <command> --config FILE [--seed N] [--out DIR] [--threads N] [--format csv|json|both] [-v]``

Exit codes: 0 success, 2 configuration error, 3 runtime or convergence error.
"""

import argparse
import dataclasses
import logging
import sys
from pathlib import Path
from typing import List, Optional

from gevreg import __version__
from gevreg.config import load_config
from gevreg.errors import ConfigError, GevRegError
from gevreg.experiments.base import OUTPUT_FORMATS
from gevreg.experiments.factory import ExperimentFactory, ExperimentType

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gevreg", description="Simulate and analyze a GeV-center electron-nuclear register.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for experiment_type in ExperimentType:
        cmd = sub.add_parser(experiment_type.value, help=f"run the {experiment_type.value} experiment")
        cmd.add_argument("--config", required=True, type=Path, help="YAML config file")
        cmd.add_argument("--seed", type=int, default=None, help="override the config seed")
        cmd.add_argument("--out", type=Path, default=None, help="output directory, overrides output_dir")
        cmd.add_argument("--threads", type=int, default=1, help="worker threads, 0 = one per CPU")
        cmd.add_argument("--format", choices=OUTPUT_FORMATS, default="both", help="artifact formats to write")
        cmd.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    """Parse ``argv``, run the experiment and return the exit code."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    try:
        config = load_config(args.config)
        if config.command != args.command:
            raise ConfigError(f"config is for command '{config.command}', not '{args.command}'", config.line_of("command"))
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError("--seed must be a 64-bit unsigned integer")
            config = dataclasses.replace(config, seed=args.seed)
        if args.threads < 0:
            raise ConfigError("--threads must be non-negative")
        experiment = ExperimentFactory.from_config(config, threads=args.threads, output_format=args.format)
        paths = experiment.run(args.out)
    except ConfigError as exc:
        logger.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except GevRegError as exc:
        logger.error("%s failed: %s", args.command, exc)
        return EXIT_RUNTIME
    for path in paths:
        logger.info("wrote %s", path)
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
