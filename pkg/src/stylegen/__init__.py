"""Synthetic multi-vendor data and statistical style transfer."""

from .anatomy import BACKGROUND, LV, MYO, RV, MIN_CLASS_PIXELS, Anatomy, gen_content, rasterize
from .vendors import bias_field, render_vendor
from .transfer import moment_style_transfer
from .dataset import (
    STYLE_POOL,
    TRAIN,
    load_dataset,
    make_dataset,
    make_sample,
    make_split,
    vendor_split,
    write_dataset,
)

__all__ = [
    "BACKGROUND",
    "LV",
    "MYO",
    "RV",
    "MIN_CLASS_PIXELS",
    "Anatomy",
    "gen_content",
    "rasterize",
    "bias_field",
    "render_vendor",
    "moment_style_transfer",
    "STYLE_POOL",
    "TRAIN",
    "load_dataset",
    "make_dataset",
    "make_sample",
    "make_split",
    "vendor_split",
    "write_dataset",
]
