"""
Synthetic short-axis cardiac anatomy.

LV is a disk, MYO an annulus around it, RV a disk to the left of the
myocardium with LV∪MYO removed. End-diastolic (ED) hearts are drawn with a
larger cavity and thinner wall than end-systolic (ES) ones.
"""

from typing import Dict, Optional, Tuple

import numpy as np
from pydantic import BaseModel

from src.autodiff.rng import Rng
from src.models.sample import Phase
from src.utils.logger import get_logger

logger = get_logger(__name__)

BACKGROUND, LV, MYO, RV = 0, 1, 2, 3
MIN_CLASS_PIXELS = 20
MAX_ATTEMPTS = 50

LV_RADIUS = (6.0, 10.0)
WALL_THICKNESS = (3.0, 5.0)
RV_RADIUS = (7.0, 11.0)
RV_GAP = (2.0, 4.0)

# (LV radius range, wall thickness range) per cardiac phase
PHASE_RANGES: Dict[str, Tuple[Tuple[float, float], Tuple[float, float]]] = {
    "ED": ((8.0, 10.0), (3.0, 4.0)),
    "ES": ((6.0, 8.0), (4.0, 5.0)),
}


class Anatomy(BaseModel):
    """Geometry behind one label map."""
    center: Tuple[float, float]  # (row, col)
    lv_radius: float
    myo_radius: float
    rv_center: Tuple[float, float]
    rv_radius: float
    phase: Optional[Phase] = None
    attempts: int = 1


def _draw(rng: Rng, size: int, phase: Optional[Phase]) -> Anatomy:
    lv_range, wall_range = PHASE_RANGES[phase] if phase else (LV_RADIUS, WALL_THICKNESS)
    row, col = rng.uniform(2, size / 4.0, 3 * size / 4.0)
    lv_radius = rng.uniform_scalar(*lv_range)
    myo_radius = lv_radius + rng.uniform_scalar(*wall_range)
    rv_radius = rng.uniform_scalar(*RV_RADIUS)
    offset = myo_radius + rng.uniform_scalar(*RV_GAP)
    return Anatomy(
        center=(float(row), float(col)),
        lv_radius=lv_radius,
        myo_radius=myo_radius,
        rv_center=(float(row), float(col - offset)),
        rv_radius=rv_radius,
        phase=phase,
    )


def rasterize(anatomy: Anatomy, size: int) -> np.ndarray:
    """Label map of ``anatomy`` with priority LV > MYO > RV."""
    rows, cols = np.mgrid[0:size, 0:size].astype(np.float64)
    dist = np.hypot(rows - anatomy.center[0], cols - anatomy.center[1])
    rv_dist = np.hypot(rows - anatomy.rv_center[0], cols - anatomy.rv_center[1])

    label = np.zeros((size, size), dtype=np.int64)
    label[rv_dist <= anatomy.rv_radius] = RV
    label[dist <= anatomy.myo_radius] = MYO
    label[dist <= anatomy.lv_radius] = LV
    return label


def gen_content(rng: Rng, size: int = 64, phase: Optional[Phase] = None) -> Tuple[np.ndarray, Anatomy]:
    """
    Draw a label map containing every class with at least MIN_CLASS_PIXELS pixels.

    Args:
        rng: Generator owned by this sample
        size: Image height and width
        phase: 'ED', 'ES' or None for the full radius ranges

    Returns:
        (h×w int64 label map, geometry record)

    Raises:
        ValueError: If no valid map was drawn within MAX_ATTEMPTS tries
    """
    for attempt in range(1, MAX_ATTEMPTS + 1):
        anatomy = _draw(rng, size, phase)
        label = rasterize(anatomy, size)
        counts = np.bincount(label.ravel(), minlength=4)
        if counts[[LV, MYO, RV]].min() >= MIN_CLASS_PIXELS:
            anatomy.attempts = attempt
            return label, anatomy
        logger.debug(f"Rejected anatomy draw {attempt} (class counts {counts.tolist()})")

    raise ValueError(
        f"Could not draw a {size}×{size} label map with ≥{MIN_CLASS_PIXELS} pixels per class "
        f"in {MAX_ATTEMPTS} attempts"
    )
