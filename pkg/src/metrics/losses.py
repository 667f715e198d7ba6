"""
Segmentation training loss: 0.6 · cross-entropy + 0.4 · soft Dice loss.
"""

from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from src.autodiff.tape import Tape, backward
from src.segnet.unet import UNetModel, forward

CE_WEIGHT = 0.6
DICE_WEIGHT = 0.4
DICE_SMOOTH = 1.0
PROB_FLOOR = 1e-12


def one_hot(labels: np.ndarray, num_classes: int) -> np.ndarray:
    """b×h×w (or h×w) class ids → one-hot with the class axis after the batch axis."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        raise ValueError(f"class ids must lie in [0, {num_classes - 1}], got range "
                         f"[{labels.min()}, {labels.max()}]")
    encoded = np.eye(num_classes, dtype=np.float64)[labels]  # ..., h, w, c
    return np.moveaxis(encoded, -1, -3)


def _dice_loss(tape: Tape, probs: int, target: np.ndarray) -> int:
    """1 − mean over batch and classes of (2Σpg + s) / (Σp + Σg + s)."""
    g = tape.leaf(target, "dice_target")
    inter = tape.reduce_sum(tape.mul(probs, g), axes=(2, 3))
    p_sum = tape.reduce_sum(probs, axes=(2, 3))
    g_sum = tape.leaf(target.sum(axis=(2, 3)), "target_sum")
    numerator = tape.add_const(tape.scale(inter, 2.0), DICE_SMOOTH)
    denominator = tape.add_const(tape.add(p_sum, g_sum), DICE_SMOOTH)
    mean_dice = tape.reduce_mean(tape.div(numerator, denominator))
    return tape.add_const(tape.scale(mean_dice, -1.0), 1.0)


def _weighted(tape: Tape, ce: int, dice_loss: int) -> int:
    return tape.add(tape.scale(ce, CE_WEIGHT), tape.scale(dice_loss, DICE_WEIGHT))


def combined_loss(tape: Tape, logits: int, labels: np.ndarray) -> int:
    """
    Record 0.6·CE + 0.4·DiceLoss against hard labels.

    Args:
        tape: Tape holding the logits node
        logits: Node id of b×c×h×w logits
        labels: b×h×w integer class ids

    Returns:
        Scalar loss node id
    """
    shape = tape.value(logits).shape
    labels = np.asarray(labels, dtype=np.int64)
    if len(shape) != 4 or labels.shape != (shape[0],) + shape[2:]:
        raise ValueError(f"labels of shape {labels.shape} do not match logits {shape}")
    target = one_hot(labels, shape[1])  # raises on class id ≥ c

    probs = tape.softmax(logits)
    log_probs = tape.log(tape.clamp(probs, PROB_FLOOR, 1.0))
    ce = tape.scale(tape.reduce_mean(tape.select(log_probs, labels)), -1.0)
    return _weighted(tape, ce, _dice_loss(tape, probs, target))


def soft_combined_loss(tape: Tape, logits: int, targets: np.ndarray) -> int:
    """
    Record 0.6·soft CE + 0.4·soft DiceLoss against per-pixel class distributions.

    Args:
        tape: Tape holding the logits node
        logits: Node id of b×c×h×w logits
        targets: b×c×h×w soft labels (each pixel sums to 1)

    Returns:
        Scalar loss node id
    """
    shape = tape.value(logits).shape
    targets = np.asarray(targets, dtype=np.float64)
    if targets.shape != shape:
        raise ValueError(f"soft targets of shape {targets.shape} do not match logits {shape}")

    probs = tape.softmax(logits)
    log_probs = tape.log(tape.clamp(probs, PROB_FLOOR, 1.0))
    weighted = tape.reduce_sum(tape.mul(log_probs, tape.leaf(targets, "soft_target")), axes=1)
    ce = tape.scale(tape.reduce_mean(weighted), -1.0)
    return _weighted(tape, ce, _dice_loss(tape, probs, targets))


@dataclass
class LossResult:
    """Loss value with gradients for parameters and the input batch."""
    loss: float
    param_grads: Dict[str, np.ndarray]
    input_grad: np.ndarray


def loss_and_gradients(model: UNetModel, images: np.ndarray, labels: Optional[np.ndarray] = None,
                       soft_targets: Optional[np.ndarray] = None) -> LossResult:
    """
    Forward, loss and backward in one call.

    Args:
        model: Network
        images: b×1×h×w batch
        labels: b×h×w hard labels (or None when ``soft_targets`` is given)
        soft_targets: b×c×h×w soft labels

    Returns:
        LossResult with ∇θ and ∇ w.r.t. the images
    """
    tape = Tape()
    trace = forward(model, images, tape)
    if soft_targets is not None:
        root = soft_combined_loss(tape, trace.logits, soft_targets)
    else:
        root = combined_loss(tape, trace.logits, labels)
    grads = backward(tape, root)
    return LossResult(
        loss=tape.value(root).item(),
        param_grads={name: grads[node] for name, node in trace.params.items()},
        input_grad=grads[trace.input],
    )


def evaluate_loss(model: UNetModel, images: np.ndarray, labels: np.ndarray) -> float:
    """Loss value only."""
    tape = Tape()
    trace = forward(model, images, tape)
    return tape.value(combined_loss(tape, trace.logits, labels)).item()
