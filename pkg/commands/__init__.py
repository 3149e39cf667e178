"""
Command line commands package.

This package contains all command definitions for the application.
Each module defines one command and its handler.
"""
import argparse
import logging

from commands import oracle_command, report_command, solve_command, validate_command

logger = logging.getLogger(__name__)

COMMAND_MODULES = (solve_command, validate_command, oracle_command, report_command)


def common_options() -> argparse.ArgumentParser:
    """Options shared by every command."""
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--out", metavar="DIR", default=None, help="Output directory")
    parent.add_argument("--quiet", action="store_true", help="Only log warnings and errors")
    return parent


def register_commands(subparsers: argparse._SubParsersAction) -> None:
    """
    Registers all commands with the argument parser.

    Args:
        subparsers: Sub-parser collection of the top-level parser
    """
    parent = common_options()
    for module in COMMAND_MODULES:
        parser = module.add_parser(subparsers, parent)
        parser.set_defaults(handler=module.handle)
        logger.debug(f"Registered command: {module.COMMAND}")
    logger.debug(f"Registered {len(COMMAND_MODULES)} commands")
