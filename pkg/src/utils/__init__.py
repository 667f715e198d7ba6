"""Utility modules."""

from .logger import get_logger, setup_logging
from .errors import (
    CheckpointFormatError,
    DegenerateContentError,
    NonFiniteError,
    ShapeError,
    UnsupportedPrimitiveError,
)
from .file_utils import ensure_directory, load_csv, load_json, save_csv, save_json
from .paths import RunPaths, get_log_file_path
from .pgm import image_to_pixels, pixels_to_image, read_pgm, write_pgm

__all__ = [
    "get_logger",
    "setup_logging",
    "CheckpointFormatError",
    "DegenerateContentError",
    "NonFiniteError",
    "ShapeError",
    "UnsupportedPrimitiveError",
    "ensure_directory",
    "load_csv",
    "load_json",
    "save_csv",
    "save_json",
    "RunPaths",
    "get_log_file_path",
    "image_to_pixels",
    "pixels_to_image",
    "read_pgm",
    "write_pgm",
]
