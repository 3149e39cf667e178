"""
Validate command.

Runs the property suite of the curvature calculus, which needs no PDE solve.
"""
import argparse
import logging
from pathlib import Path
from typing import Optional, Union

from geometry.hypgeom import gamma_matrix
from services.property_suite import GammaFunction, PropertySuite
from utils.config import Config
from utils.errors import ExitStatus
from utils.export import write_json
from utils.middleware import command_logging, error_tracking

logger = logging.getLogger(__name__)

COMMAND = "validate"
REPORT_FILE = "validation_report.json"


def add_parser(subparsers: argparse._SubParsersAction, parent: argparse.ArgumentParser) -> argparse.ArgumentParser:
    parser = subparsers.add_parser(COMMAND, parents=[parent], help="Run the property suite")
    parser.add_argument("--seed", type=int, default=None, help="Seed for property sampling")
    parser.add_argument("--samples", type=int, default=None, help="Samples per sampled property")
    return parser


def run_validation(out_dir: Optional[Union[str, Path]], samples: int, seed: int,
                   gamma: GammaFunction = gamma_matrix) -> int:
    """
    Runs the suite and writes its report.

    Args:
        out_dir: Directory of validation_report.json, or None to skip writing
        samples: Samples per sampled property
        seed: Sampling seed
        gamma: gamma_matrix implementation under test

    Returns:
        int: 0 if every property holds, 1 otherwise
    """
    report = PropertySuite(samples=samples, seed=seed, gamma=gamma).run()
    if out_dir is not None:
        write_json(Path(out_dir) / REPORT_FILE, report)

    failed = [check for check in report.checks if not check.passed]
    print(f"{len(report.checks) - len(failed)} of {len(report.checks)} properties hold (seed {seed})")
    if report.gradient_term_constant is not None:
        print(f"Gradient-term constant C: {report.gradient_term_constant:.4g}")
    if not failed:
        return int(ExitStatus.SUCCESS)
    for check in failed:
        print(f"FAILED {check.name}: {check.failures} of {check.samples} (max error {check.max_error:.3e})")
    for example in report.counterexamples:
        print(f"  counterexample: {example}")
    return int(ExitStatus.NUMERICAL_FAILURE)


@error_tracking
@command_logging(COMMAND)
def handle(args: argparse.Namespace) -> int:
    seed = Config.VALIDATE_SEED if args.seed is None else args.seed
    samples = Config.VALIDATE_SAMPLES if args.samples is None else args.samples
    out_dir = Path(args.out) if args.out else Path(Config.OUTPUT_DIR) / "validate"
    return run_validation(out_dir, samples, seed)
