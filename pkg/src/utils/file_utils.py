"""
File utility functions.
"""

import json
from pathlib import Path
from typing import Any, Dict, Union

import pandas as pd

from .logger import get_logger

logger = get_logger(__name__)

# Fixed float rendering keeps CSV bytes identical across runs.
CSV_FLOAT_FORMAT = "%.6f"


def ensure_directory(directory: Union[Path, str]) -> Path:
    """
    Ensure a directory exists, creating it if necessary.

    Args:
        directory: Path to the directory

    Returns:
        Path object for the directory
    """
    path = Path(directory)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ValueError(f"❌ Cannot create directory {path}: {e}") from e
    return path


def save_json(data: Dict[str, Any], filepath: Union[Path, str], indent: int = 2) -> Path:
    """
    Save data to a JSON file with sorted keys.

    Args:
        data: Data to save
        filepath: Path to the JSON file
        indent: JSON indentation level

    Returns:
        Path written
    """
    path = Path(filepath)
    ensure_directory(path.parent)

    with open(path, 'w', encoding='utf-8') as f:
        json.dump(data, f, indent=indent, ensure_ascii=False, sort_keys=True)
        f.write("\n")

    logger.debug(f"Saved JSON to {path}")
    return path


def load_json(filepath: Union[Path, str]) -> Dict[str, Any]:
    """
    Load data from a JSON file.

    Args:
        filepath: Path to the JSON file

    Returns:
        Loaded data
    """
    path = Path(filepath)

    if not path.exists():
        logger.error(f"JSON file not found: {path}")
        raise FileNotFoundError(f"File not found: {path}")

    with open(path, 'r', encoding='utf-8') as f:
        data = json.load(f)

    logger.debug(f"Loaded JSON from {path}")
    return data


def save_csv(frame: pd.DataFrame, filepath: Union[Path, str]) -> Path:
    """
    Write a DataFrame as CSV with deterministic formatting.

    Args:
        frame: Table to write (index is dropped)
        filepath: Destination path

    Returns:
        Path of the written file
    """
    path = Path(filepath)
    ensure_directory(path.parent)
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    logger.debug(f"Saved CSV to {path} ({len(frame)} rows)")
    return path


def load_csv(filepath: Union[Path, str], **read_options) -> pd.DataFrame:
    """
    Read a CSV written by save_csv.

    Args:
        filepath: Path to the CSV file
        **read_options: Passed to pandas.read_csv (e.g. dtype)

    Returns:
        Loaded table
    """
    path = Path(filepath)
    if not path.exists():
        logger.error(f"CSV file not found: {path}")
        raise FileNotFoundError(f"File not found: {path}")
    return pd.read_csv(path, **read_options)
