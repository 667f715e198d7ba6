"""
Vendor rendering: class intensities, smooth bias field, gamma and noise.
"""

import numpy as np
from scipy import ndimage

from src.autodiff.rng import Rng
from src.config.settings import VendorStyle

BIAS_GRID = 4


def bias_field(rng: Rng, height: int, width: int) -> np.ndarray:
    """Bilinear interpolation of a 4×4 grid of N(0,1) draws clipped to [−1, 1]."""
    grid = np.clip(rng.normal(BIAS_GRID * BIAS_GRID), -1.0, 1.0).reshape(BIAS_GRID, BIAS_GRID)
    rows = np.linspace(0.0, BIAS_GRID - 1, height)
    cols = np.linspace(0.0, BIAS_GRID - 1, width)
    coords = np.stack(np.meshgrid(rows, cols, indexing="ij"))
    field = ndimage.map_coordinates(grid, coords, order=1, mode="nearest")
    # interpolation rounding can step just past the grid bounds
    return np.clip(field, -1.0, 1.0)


def render_vendor(label: np.ndarray, style: VendorStyle, rng: Rng) -> np.ndarray:
    """
    Render a label map as an image of the given vendor.

    Args:
        label: h×w class ids in 0..3
        style: Vendor intensity model
        rng: Generator owned by this sample

    Returns:
        1×h×w float64 image in [0,1]
    """
    label = np.asarray(label, dtype=np.int64)
    height, width = label.shape
    lookup = np.asarray(style.class_intensity, dtype=np.float64)
    image = lookup[label]

    if style.bias_amplitude > 0:
        image = image * (1.0 + style.bias_amplitude * bias_field(rng.child("bias"), height, width))
    if style.gamma != 1.0:
        image = np.power(np.clip(image, 0.0, None), style.gamma)
    if style.noise_sigma > 0:
        image = image + rng.child("noise").normal(height * width, std=style.noise_sigma).reshape(height, width)

    return np.clip(image, 0.0, 1.0)[None]
