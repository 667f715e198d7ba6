"""
Tiny U-Net on the autodiff tape.

Encoder level k: two 3×3 conv+ReLU with ``base·2^k`` channels, then 2×2 max-pool.
Bottleneck: two conv+ReLU with ``base·2^depth`` channels. Decoder level k:
nearest upsample ×2, concatenate the level-k skip, two conv+ReLU. Head: one
3×3 conv to ``num_classes`` logits (no activation).
"""

from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from src.autodiff.rng import Rng
from src.autodiff.tape import Tape
from src.autodiff.tensor import Tensor, as_tensor
from src.config.settings import UNetConfig
from src.utils.errors import ShapeError
from src.utils.logger import get_logger

logger = get_logger(__name__)


class UNetModel(BaseModel):
    """Architecture config plus named parameter tensors (names sorted)."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    config: UNetConfig
    params: Dict[str, np.ndarray]

    def copy(self) -> "UNetModel":
        return UNetModel(config=self.config.model_copy(), params={k: v.copy() for k, v in self.params.items()})

    @property
    def names(self) -> List[str]:
        return list(self.params)

    def num_parameters(self) -> int:
        return int(sum(p.size for p in self.params.values()))


@dataclass
class Trace:
    """Node ids of one forward pass."""
    logits: int
    input: int
    params: Dict[str, int]


def conv_layers(config: UNetConfig) -> List[Tuple[str, int, int]]:
    """(layer name, in channels, out channels) for every conv, in execution order."""
    base, depth = config.base_channels, config.depth
    layers: List[Tuple[str, int, int]] = []
    in_ch = config.in_channels
    for k in range(depth):
        out_ch = base * 2 ** k
        layers += [(f"enc{k}.conv1", in_ch, out_ch), (f"enc{k}.conv2", out_ch, out_ch)]
        in_ch = out_ch
    mid = base * 2 ** depth
    layers += [("mid.conv1", in_ch, mid), ("mid.conv2", mid, mid)]
    below = mid
    for k in reversed(range(depth)):
        out_ch = base * 2 ** k
        layers += [(f"dec{k}.conv1", below + out_ch, out_ch), (f"dec{k}.conv2", out_ch, out_ch)]
        below = out_ch
    layers.append(("head", base, config.num_classes))
    return layers


def parameter_shapes(config: UNetConfig) -> Dict[str, Tuple[int, ...]]:
    """Parameter shapes derived from the config alone, sorted by name."""
    shapes: Dict[str, Tuple[int, ...]] = {}
    for name, in_ch, out_ch in conv_layers(config):
        shapes[f"{name}.weight"] = (out_ch, in_ch, 3, 3)
        shapes[f"{name}.bias"] = (out_ch,)
    return dict(sorted(shapes.items()))


def parameter_count(config: UNetConfig) -> int:
    """Σ over convs of out·in·9 + out."""
    return sum(out_ch * in_ch * 9 + out_ch for _, in_ch, out_ch in conv_layers(config))


def init_unet(config: UNetConfig, seed: int) -> UNetModel:
    """
    He initialisation: kernels ~ N(0, 2 / fan_in), biases zero.

    Args:
        config: Architecture
        seed: Seed; each tensor draws from a child stream keyed by its name

    Returns:
        Fresh model
    """
    rng = Rng(seed)
    params: Dict[str, np.ndarray] = {}
    for name, shape in parameter_shapes(config).items():
        if name.endswith(".bias"):
            params[name] = np.zeros(shape)
        else:
            fan_in = shape[1] * shape[2] * shape[3]
            std = np.sqrt(2.0 / fan_in)
            params[name] = rng.child(name).normal(int(np.prod(shape)), std=std).reshape(shape)
    logger.debug(f"Initialised U-Net with {parameter_count(config)} parameters (seed {seed})")
    return UNetModel(config=config, params=params)


def check_input(config: UNetConfig, batch: np.ndarray) -> None:
    """Validate a b×in_channels×h×w batch against the architecture."""
    if batch.ndim != 4 or batch.shape[1] != config.in_channels:
        raise ShapeError(f"forward expects b×{config.in_channels}×h×w input, got {batch.shape}")
    factor = 2 ** config.depth
    if batch.shape[2] % factor or batch.shape[3] % factor:
        raise ShapeError(
            f"forward: spatial size {batch.shape[2]}×{batch.shape[3]} is not divisible by 2^depth = {factor}"
        )


def forward(model: UNetModel, batch: Tensor, tape: Tape) -> Trace:
    """
    Record the network on ``tape``.

    Args:
        model: Parameters and architecture
        batch: b×in_channels×h×w input
        tape: Tape to record on

    Returns:
        Trace with the logits node (b×num_classes×h×w), the input node and parameter nodes
    """
    batch = as_tensor(batch, "batch")
    check_input(model.config, batch)

    input_id = tape.leaf(batch, "input")
    param_ids = {name: tape.leaf(value, name) for name, value in model.params.items()}

    def conv(x: int, layer: str) -> int:
        return tape.conv2d(x, param_ids[f"{layer}.weight"], param_ids[f"{layer}.bias"])

    def double_conv(x: int, block: str) -> int:
        x = tape.relu(conv(x, f"{block}.conv1"))
        return tape.relu(conv(x, f"{block}.conv2"))

    skips = []
    x = input_id
    for k in range(model.config.depth):
        x = double_conv(x, f"enc{k}")
        skips.append(x)
        x = tape.maxpool2(x)
    x = double_conv(x, "mid")
    for k in reversed(range(model.config.depth)):
        x = tape.concat(tape.upsample2(x), skips[k])
        x = double_conv(x, f"dec{k}")
    logits = conv(x, "head")
    return Trace(logits=logits, input=input_id, params=param_ids)


def predict_logits(model: UNetModel, batch: Tensor) -> np.ndarray:
    """Logits without keeping the tape."""
    tape = Tape()
    return tape.value(forward(model, batch, tape).logits)


def predict_proba(model: UNetModel, batch: Tensor) -> np.ndarray:
    """Channel softmax of the logits."""
    tape = Tape()
    trace = forward(model, batch, tape)
    return tape.value(tape.softmax(trace.logits))
