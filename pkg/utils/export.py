"""
Export utilities for run artifacts.

This module writes and reads the JSON reports and the per-epsilon solution
tables of a run. Output is byte-for-byte reproducible for identical inputs.
"""
import csv
import json
import logging
from datetime import date, datetime
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np
from pydantic import BaseModel

from dirichlet.schemas import SurfaceState

logger = logging.getLogger(__name__)

SOLUTION_COLUMNS = ("x", "y", "u", "w", "nu_vertical", "kappa_min", "kappa_max", "residual")


def json_serial(obj: Any) -> Any:
    """JSON serializer for objects not serializable by default json code"""
    if isinstance(obj, (datetime, date)):
        return obj.isoformat()
    if isinstance(obj, BaseModel):
        return obj.model_dump(mode="json")
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"Type {type(obj)} not serializable")


def write_json(path: Union[str, Path], data: Any) -> Path:
    """
    Writes data as indented JSON with sorted keys.

    Args:
        path: Destination file
        data: A pydantic model or JSON-compatible structure

    Returns:
        Path: The written file
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(data, BaseModel):
        data = data.model_dump(mode="json")
    serialized = json.dumps(data, default=json_serial, indent=2, sort_keys=True)
    path.write_text(serialized + "\n", encoding="utf-8")
    logger.info(f"Wrote {path}")
    return path


def read_json(path: Union[str, Path]) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as handle:
        return json.load(handle)


def _format(value: float) -> str:
    return format(float(value), ".17g")


def write_solution_csv(path: Union[str, Path], state: SurfaceState) -> Path:
    """
    Writes one row per unknown node with columns x, y, u, w, nu_vertical, kappa_min, kappa_max, residual.

    Args:
        path: Destination file
        state: Converged surface state

    Returns:
        Path: The written file
    """
    residual = state.residual if state.residual is not None else np.full(state.u.shape, np.nan)
    table = {
        "x": state.domain.points[:, 0],
        "y": state.domain.points[:, 1],
        "u": state.u,
        "w": state.w,
        "nu_vertical": state.nu_vertical,
        "kappa_min": state.kappa_min,
        "kappa_max": state.kappa_max,
        "residual": residual,
    }
    return write_solution_table(path, table)


def write_solution_table(path: Union[str, Path], table: Dict[str, np.ndarray]) -> Path:
    """Writes a solution table given as one array per column."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    columns = np.column_stack([np.asarray(table[name], dtype=float) for name in SOLUTION_COLUMNS])
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(SOLUTION_COLUMNS)
        for row in columns:
            writer.writerow([_format(value) for value in row])
    logger.info(f"Wrote {path} ({columns.shape[0]} nodes)")
    return path


def read_solution_csv(path: Union[str, Path]) -> Dict[str, np.ndarray]:
    """
    Reads a solution table written by write_solution_csv.

    Returns:
        Dict[str, np.ndarray]: One array per column

    Raises:
        ValueError: If the header does not match the solution columns
    """
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = tuple(next(reader, ()))
        if header != SOLUTION_COLUMNS:
            raise ValueError(f"Unexpected header in {path}: {header}")
        rows = [[float(value) for value in row] for row in reader if row]
    table = np.array(rows, dtype=float).reshape(-1, len(SOLUTION_COLUMNS))
    return {name: table[:, index] for index, name in enumerate(SOLUTION_COLUMNS)}
