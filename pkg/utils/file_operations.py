"""File operation utilities for dastgcn tools."""

import csv
import io
import json
import logging
import math
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

import numpy as np

log = logging.getLogger(__name__)

MISSING_VALUE = "NA"


def safe_file_write(file_path: Path, content: str, encoding: str = "utf-8") -> bool:
    """
    Safely write content to a file with error handling.

    Parent directories are created on demand.

    Args:
        file_path: Path to the output file
        content: Content to write
        encoding: File encoding (default: utf-8)

    Returns:
        True if successful, False otherwise
    """
    try:
        file_path.parent.mkdir(parents=True, exist_ok=True)
        with open(file_path, "w", encoding=encoding, newline="") as f:
            f.write(content)
        log.debug(f"Successfully wrote file: {file_path}")
        return True
    except (IOError, OSError) as e:
        log.error(f"Failed to write file {file_path}: {e}")
        return False


def format_csv_value(value: Any) -> str:
    """Render one CSV cell; ``None`` and NaN become ``NA``."""
    if value is None:
        return MISSING_VALUE
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return MISSING_VALUE
        return repr(float(value))
    return str(value)


def render_csv(header: Optional[Sequence[str]], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    if header:
        writer.writerow(header)
    for row in rows:
        writer.writerow([format_csv_value(v) for v in row])
    return buffer.getvalue()


def write_csv(
    file_path: Path, header: Optional[Sequence[str]], rows: Iterable[Sequence[Any]]
) -> bool:
    """
    Write rows as CSV.

    Args:
        file_path: Output path
        header: Column names, or None for a bare matrix
        rows: Row values

    Returns:
        True if successful, False otherwise
    """
    return safe_file_write(file_path, render_csv(header, rows))


def write_matrix_csv(file_path: Path, matrix: np.ndarray) -> bool:
    """Write a 2-D array of doubles at full precision, one row per line."""
    return write_csv(file_path, None, np.asarray(matrix, dtype=np.float64).tolist())


def read_matrix_csv(file_path: Path) -> np.ndarray:
    with open(file_path, "r", encoding="utf-8") as f:
        rows = [[float(v) for v in row] for row in csv.reader(f) if row]
    return np.asarray(rows, dtype=np.float64)


def write_json(file_path: Path, payload: Any) -> bool:
    """Write ``payload`` as indented, key-sorted JSON."""
    return safe_file_write(file_path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def create_output_directory(output_path: Path) -> bool:
    """
    Create output directory if it doesn't exist.

    Args:
        output_path: Path to the output directory

    Returns:
        True if directory exists or was created successfully
    """
    try:
        output_path.mkdir(parents=True, exist_ok=True)
        return True
    except OSError as e:
        log.error(f"Failed to create directory {output_path}: {e}")
        return False
