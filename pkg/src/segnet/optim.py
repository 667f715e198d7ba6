"""
Adam and SGD-with-momentum steps.

Both are functional: they return a new model and a new optimiser state and
leave their arguments untouched.
"""

from typing import Dict, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.segnet.unet import UNetModel

OptKind = Literal["adam", "sgd-momentum"]


class OptState(BaseModel):
    """Optimiser hyperparameters, step count and per-parameter moment buffers."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    kind: OptKind
    lr: float = Field(gt=0.0)
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    momentum: float = 0.9
    step: int = Field(default=0, ge=0)
    # adam: "m" and "v"; sgd-momentum: "velocity"
    buffers: Dict[str, Dict[str, np.ndarray]] = Field(default_factory=dict)

    def copy(self) -> "OptState":
        return self.model_copy(update={
            "buffers": {slot: {k: v.copy() for k, v in per.items()} for slot, per in self.buffers.items()}
        })


def init_adam(model: UNetModel, lr: float = 1e-3, beta1: float = 0.9,
              beta2: float = 0.999, eps: float = 1e-8) -> OptState:
    zeros = {name: np.zeros_like(p) for name, p in model.params.items()}
    return OptState(kind="adam", lr=lr, beta1=beta1, beta2=beta2, eps=eps,
                    buffers={"m": zeros, "v": {k: v.copy() for k, v in zeros.items()}})


def init_sgd_momentum(model: UNetModel, lr: float = 1e-3, momentum: float = 0.9) -> OptState:
    return OptState(kind="sgd-momentum", lr=lr, momentum=momentum,
                    buffers={"velocity": {name: np.zeros_like(p) for name, p in model.params.items()}})


def _check_grads(model: UNetModel, grads: Dict[str, np.ndarray]) -> None:
    missing = [name for name in model.params if name not in grads]
    if missing:
        raise KeyError(f"Missing gradient for parameter(s): {missing}")
    for name, param in model.params.items():
        if grads[name].shape != param.shape:
            raise ValueError(f"Gradient for '{name}' has shape {grads[name].shape}, expected {param.shape}")


def adam_step(model: UNetModel, grads: Dict[str, np.ndarray], opt: OptState):
    """
    One bias-corrected Adam update.

    Args:
        model: Current parameters
        grads: Gradient per parameter name
        opt: Adam state

    Returns:
        (updated model, updated state)
    """
    if opt.kind != "adam":
        raise ValueError(f"adam_step needs an adam state, got '{opt.kind}'")
    _check_grads(model, grads)
    new_model, new_opt = model.copy(), opt.copy()
    new_opt.step = opt.step + 1
    t = new_opt.step
    m_buf, v_buf = new_opt.buffers["m"], new_opt.buffers["v"]
    for name, param in new_model.params.items():
        g = grads[name]
        m_buf[name] = opt.beta1 * m_buf[name] + (1.0 - opt.beta1) * g
        v_buf[name] = opt.beta2 * v_buf[name] + (1.0 - opt.beta2) * g * g
        m_hat = m_buf[name] / (1.0 - opt.beta1 ** t)
        v_hat = v_buf[name] / (1.0 - opt.beta2 ** t)
        new_model.params[name] = param - opt.lr * m_hat / (np.sqrt(v_hat) + opt.eps)
    return new_model, new_opt


def sgd_momentum_step(model: UNetModel, grads: Dict[str, np.ndarray], opt: OptState):
    """
    One heavy-ball step: v ← μ·v + g; θ ← θ − α·v.

    Args:
        model: Current parameters
        grads: Gradient per parameter name
        opt: SGD-momentum state

    Returns:
        (updated model, updated state)
    """
    if opt.kind != "sgd-momentum":
        raise ValueError(f"sgd_momentum_step needs an sgd-momentum state, got '{opt.kind}'")
    _check_grads(model, grads)
    new_model, new_opt = model.copy(), opt.copy()
    new_opt.step = opt.step + 1
    velocity = new_opt.buffers["velocity"]
    for name, param in new_model.params.items():
        velocity[name] = opt.momentum * velocity[name] + grads[name]
        new_model.params[name] = param - opt.lr * velocity[name]
    return new_model, new_opt


def clip_grad_norm(grads: Dict[str, np.ndarray], max_norm: Optional[float]) -> Tuple[Dict[str, np.ndarray], float]:
    """
    Rescale gradients so their global L2 norm is at most ``max_norm``.

    Args:
        grads: Gradient per parameter name
        max_norm: Norm bound (None leaves the gradients as they are)

    Returns:
        (possibly rescaled gradients, norm before clipping)
    """
    total_sq = 0.0
    for g in grads.values():
        total_sq += float(np.sum(g * g))
    total_norm = float(np.sqrt(total_sq))
    if max_norm is None or total_norm <= max_norm:
        return grads, total_norm
    scale = max_norm / total_norm
    return {name: g * scale for name, g in grads.items()}, total_norm


def optimizer_step(model: UNetModel, grads: Dict[str, np.ndarray], opt: OptState,
                   clip_norm: Optional[float] = None):
    """Dispatch on ``opt.kind`` after optional global-norm clipping."""
    if clip_norm is not None:
        grads, _ = clip_grad_norm(grads, clip_norm)
    if opt.kind == "adam":
        return adam_step(model, grads, opt)
    return sgd_momentum_step(model, grads, opt)
