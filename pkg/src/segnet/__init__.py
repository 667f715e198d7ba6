"""U-Net segmentation model, optimisers and checkpoints."""

from .unet import (
    Trace,
    UNetModel,
    conv_layers,
    forward,
    init_unet,
    parameter_count,
    parameter_shapes,
    predict_logits,
    predict_proba,
)
from .optim import OptState, adam_step, clip_grad_norm, init_adam, init_sgd_momentum, optimizer_step, sgd_momentum_step
from .checkpoint import expected_size, load_checkpoint, save_checkpoint

__all__ = [
    "Trace",
    "UNetModel",
    "conv_layers",
    "forward",
    "init_unet",
    "parameter_count",
    "parameter_shapes",
    "predict_logits",
    "predict_proba",
    "OptState",
    "adam_step",
    "clip_grad_norm",
    "init_adam",
    "init_sgd_momentum",
    "optimizer_step",
    "sgd_momentum_step",
    "expected_size",
    "load_checkpoint",
    "save_checkpoint",
]
