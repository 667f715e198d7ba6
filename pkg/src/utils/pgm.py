"""
8-bit binary PGM (P5, maxval 255) reading and writing via Pillow.
"""

from pathlib import Path
from typing import Union

import numpy as np
from PIL import Image

from .file_utils import ensure_directory


def write_pgm(pixels: np.ndarray, filepath: Union[Path, str]) -> Path:
    """
    Write an h×w array of integers in [0, 255] as a P5 PGM file.

    Args:
        pixels: 2-D integer array
        filepath: Destination path

    Returns:
        Path of the written file
    """
    array = np.asarray(pixels)
    if array.ndim != 2:
        raise ValueError(f"PGM needs a 2-D array, got shape {array.shape}")
    if array.size and (array.min() < 0 or array.max() > 255):
        raise ValueError("PGM pixel values must lie in [0, 255]")

    path = Path(filepath)
    ensure_directory(path.parent)
    Image.fromarray(array.astype(np.uint8)).save(path, format="PPM")
    return path


def read_pgm(filepath: Union[Path, str]) -> np.ndarray:
    """
    Read a P5 PGM file into an h×w uint8 array.

    Args:
        filepath: Source path

    Returns:
        Pixel array
    """
    path = Path(filepath)
    if not path.exists():
        raise FileNotFoundError(f"PGM file not found: {path}")
    with Image.open(path) as img:
        if img.mode != "L":
            raise ValueError(f"{path} is not an 8-bit grayscale PGM (mode {img.mode})")
        return np.array(img, dtype=np.uint8)


def image_to_pixels(image: np.ndarray) -> np.ndarray:
    """Quantise a [0,1] image to 8-bit values: round(v·255)."""
    return np.rint(np.clip(image, 0.0, 1.0) * 255.0).astype(np.uint8)


def pixels_to_image(pixels: np.ndarray) -> np.ndarray:
    """Map 8-bit values back to float64 intensities in [0,1]."""
    return pixels.astype(np.float64) / 255.0
