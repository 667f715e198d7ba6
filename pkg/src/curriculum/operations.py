"""
Pointwise curriculum operations: Local Gradient Sign, style fusion, FGSM,
per-pixel sign increments and Mixup.
"""

from typing import Tuple

import numpy as np

from src.metrics.losses import one_hot
from src.models.sample import Sample
from src.utils.errors import ShapeError


def _gradient_map(grad: np.ndarray) -> np.ndarray:
    grad = np.asarray(grad, dtype=np.float64)
    if grad.ndim != 2:
        raise ShapeError(f"expected an h×w gradient, got shape {grad.shape}")
    return grad


def lgs(grad: np.ndarray, epsilon: float, pool_size: int) -> np.ndarray:
    """
    Local Gradient Sign: upsample(relu(ε · sign(avgpool(grad)))).

    Args:
        grad: h×w gradient
        epsilon: Learning step
        pool_size: Side of the pooling blocks; must divide h and w

    Returns:
        h×w increment with values in {0, ε}, constant on each block
    """
    grad = _gradient_map(grad)
    height, width = grad.shape
    if pool_size < 1 or height % pool_size or width % pool_size:
        raise ShapeError(f"lgs: pool_size {pool_size} does not divide gradient shape {grad.shape}")
    blocks = grad.reshape(height // pool_size, pool_size, width // pool_size, pool_size).mean(axis=(1, 3))
    steps = np.maximum(epsilon * np.sign(blocks), 0.0)
    return np.repeat(np.repeat(steps, pool_size, axis=0), pool_size, axis=1)


def scl_increment(grad: np.ndarray, epsilon: float) -> np.ndarray:
    """Per-pixel sign increment relu(ε · sign(grad)), i.e. LGS without pooling."""
    return np.maximum(epsilon * np.sign(_gradient_map(grad)), 0.0)


def blend(gamma: np.ndarray, z: np.ndarray, x_c: np.ndarray) -> np.ndarray:
    """
    Style fusion z_i = Γ·z + (1 − Γ)·x_c.

    Args:
        gamma: h×w weights in [0,1]
        z: Stylised image (c×h×w or h×w)
        x_c: Content image, same shape as ``z``

    Returns:
        Blended image shaped like ``x_c``
    """
    gamma = np.asarray(gamma, dtype=np.float64)
    if z.shape != x_c.shape or gamma.shape != x_c.shape[-2:]:
        raise ShapeError(f"blend: Γ {gamma.shape}, z {z.shape} and x_c {x_c.shape} do not agree")
    if gamma.size and (gamma.min() < 0.0 or gamma.max() > 1.0):
        raise ValueError(f"blend: Γ must lie in [0,1], got range [{gamma.min()}, {gamma.max()}]")
    return gamma * z + (1.0 - gamma) * x_c


def fgsm_perturb(x: np.ndarray, grad: np.ndarray, epsilon: float, clamp: bool = True) -> np.ndarray:
    """x + ε·sign(grad), clipped to [0,1] unless ``clamp`` is False."""
    x = np.asarray(x, dtype=np.float64)
    grad = np.asarray(grad, dtype=np.float64)
    if x.shape != grad.shape:
        raise ShapeError(f"fgsm_perturb: image {x.shape} and gradient {grad.shape} differ")
    perturbed = x + epsilon * np.sign(grad)
    return np.clip(perturbed, 0.0, 1.0) if clamp else perturbed


def mixup(first: Sample, second: Sample, lam: float, num_classes: int = 4) -> Tuple[np.ndarray, np.ndarray]:
    """
    Interpolate two samples and their one-hot labels.

    Args:
        first: Sample weighted by ``lam``
        second: Sample weighted by ``1 − lam``
        lam: Mixing weight in [0,1]
        num_classes: Number of label classes

    Returns:
        (mixed 1×h×w image, c×h×w soft label)
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"mixup weight must lie in [0,1], got {lam}")
    if first.image.shape != second.image.shape or first.label.shape != second.label.shape:
        raise ShapeError(f"mixup: samples differ in shape ({first.image.shape} vs {second.image.shape})")
    image = lam * first.image + (1.0 - lam) * second.image
    soft = lam * one_hot(first.label, num_classes) + (1.0 - lam) * one_hot(second.label, num_classes)
    return image, soft
