"""
Report command.

Re-renders the report, solution tables and plots of a stored run directory
without solving.
"""
import argparse
import logging
from pathlib import Path

from services.run_service import RunService
from utils.config import load_run_config
from utils.errors import ConfigurationError
from utils.middleware import command_logging, error_tracking

logger = logging.getLogger(__name__)

COMMAND = "report"


def add_parser(subparsers: argparse._SubParsersAction, parent: argparse.ArgumentParser) -> argparse.ArgumentParser:
    parser = subparsers.add_parser(COMMAND, parents=[parent], help="Re-render the artifacts of a stored run")
    parser.add_argument("--config", metavar="PATH", default=None,
                        help="Run configuration; locates the run directory when --out is not given")
    return parser


@error_tracking
@command_logging(COMMAND)
def handle(args: argparse.Namespace) -> int:
    if args.out:
        run_dir = Path(args.out)
    elif args.config:
        run_dir = RunService.output_dir(load_run_config(args.config))
    else:
        raise ConfigurationError("report needs --out or --config", messages=["--out: run directory required"])
    report, status = RunService.render_report(run_dir)
    print(f"Re-rendered {len(report.records)} epsilon records in {run_dir}; status {report.status.value}")
    return status
