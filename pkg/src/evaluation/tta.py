"""
Rotation test-time augmentation.

The image is passed through the network at 0°, 90°, 180° and 270°; each
probability map is rotated back and the four are averaged. The per-pixel
values are sorted across passes before summation, so the result does not
depend on pass order and rotating the input rotates the output bit-exactly.
"""

import numpy as np

from src.segnet.unet import UNetModel, predict_proba
from src.utils.errors import ShapeError

ROTATIONS = (0, 1, 2, 3)


def _check_image(image: np.ndarray) -> np.ndarray:
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 3:
        raise ShapeError(f"expected a c×h×w image, got shape {image.shape}")
    if image.shape[1] != image.shape[2]:
        raise ShapeError(f"rotation TTA needs a square image, got {image.shape[1]}×{image.shape[2]}")
    return image


def single_predict(model: UNetModel, image: np.ndarray) -> np.ndarray:
    """Softmax probabilities c×h×w of one pass."""
    return predict_proba(model, np.asarray(image, dtype=np.float64)[None])[0]


def tta_predict(model: UNetModel, image: np.ndarray) -> np.ndarray:
    """
    Average of the four rotation passes.

    Args:
        model: Network
        image: Square c×h×w image

    Returns:
        num_classes×h×w probabilities
    """
    image = _check_image(image)
    passes = []
    for k in ROTATIONS:
        rotated = np.ascontiguousarray(np.rot90(image, k, axes=(1, 2)))
        passes.append(np.rot90(single_predict(model, rotated), -k, axes=(1, 2)))
    stacked = np.sort(np.stack(passes), axis=0)
    return stacked.sum(axis=0) / len(ROTATIONS)


def predict_labels(model: UNetModel, image: np.ndarray, use_tta: bool) -> np.ndarray:
    """Argmax label map h×w (lowest class id wins ties)."""
    probs = tta_predict(model, image) if use_tta else single_predict(model, image)
    return np.argmax(probs, axis=0).astype(np.int64)
