"""Style-fusion curriculum: operations and finetuning loops."""

from .operations import blend, fgsm_perturb, lgs, mixup, scl_increment
from .trainer import (
    curriculum_hardness,
    lscl_finetune,
    mixup_finetune,
    random_style_finetune,
    sample_order,
    scl_finetune,
    style_index,
)

__all__ = [
    "blend",
    "fgsm_perturb",
    "lgs",
    "mixup",
    "scl_increment",
    "curriculum_hardness",
    "lscl_finetune",
    "mixup_finetune",
    "random_style_finetune",
    "sample_order",
    "scl_finetune",
    "style_index",
]
