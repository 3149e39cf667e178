"""
Hyperbolic Dirichlet solver: command line entry point.

This module configures logging and error tracking and dispatches to the
registered commands: solve, validate, oracle-compare and report.
"""
import argparse
import logging
import sys
from typing import List, Optional

import sentry_sdk

from commands import register_commands
from utils.config import Config

__version__ = "0.1.0"

logger = logging.getLogger("main")


def configure_logging(quiet: bool = False) -> None:
    """
    Configures the root logger from LOG_LEVEL; --quiet raises it to WARNING.

    Args:
        quiet: Whether to suppress informational output
    """
    level = getattr(logging, Config.LOG_LEVEL.upper(), logging.INFO)
    if quiet:
        level = max(level, logging.WARNING)
    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        force=True,
    )
    # the run's convergence log lowers package loggers to DEBUG; the console stays at its level
    for handler in logging.getLogger().handlers:
        handler.setLevel(level)


def configure_sentry() -> None:
    """Initializes Sentry if configured."""
    if Config.SENTRY_DSN:
        sentry_sdk.init(
            dsn=Config.SENTRY_DSN,
            traces_sample_rate=0.1,
            environment="production" if not Config.DEV_MODE else "development",
            release=f"dirichlet-hyperbolic@{__version__}",
        )
        logger.info("Sentry initialized for error tracking")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dirichlet-hyperbolic",
        description="Constant curvature graphs over planar domains in hyperbolic space",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    subparsers.required = True
    register_commands(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parses arguments and runs a command.

    Args:
        argv: Arguments without the program name; defaults to sys.argv[1:]

    Returns:
        int: Exit status (0 success, 1 numerical failure, 2 configuration error)
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(quiet=args.quiet)
    configure_sentry()
    return int(args.handler(args))


if __name__ == "__main__":
    sys.exit(main())
