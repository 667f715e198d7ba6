"""
Binary checkpoint format.

    magic   "LSCL" (4 bytes)
    version uint32 LE = 1
    count   uint32 LE
    per entry (sorted by name):
        name length uint32, UTF-8 name, rank uint32, dims uint32×rank,
        float64 LE payload (row-major)

Entry names: ``config/unet`` = [in_channels, num_classes, base_channels, depth],
``param/<name>`` for weights, and when an optimiser state is saved
``opt/hyper`` = [kind, lr, beta1, beta2, eps, momentum, step] plus
``opt/<slot>/<name>`` moment buffers.
"""

import struct
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import numpy as np

from src.config.settings import UNetConfig
from src.segnet.optim import OptState
from src.segnet.unet import UNetModel, parameter_shapes
from src.utils.errors import CheckpointFormatError
from src.utils.file_utils import ensure_directory
from src.utils.logger import get_logger

logger = get_logger(__name__)

MAGIC = b"LSCL"
VERSION = 1
_OPT_KINDS = {"adam": 0.0, "sgd-momentum": 1.0}


def _entries(model: UNetModel, opt: Optional[OptState]) -> Dict[str, np.ndarray]:
    cfg = model.config
    entries = {
        "config/unet": np.array([cfg.in_channels, cfg.num_classes, cfg.base_channels, cfg.depth], dtype=np.float64),
    }
    for name, value in model.params.items():
        entries[f"param/{name}"] = value
    if opt is not None:
        entries["opt/hyper"] = np.array(
            [_OPT_KINDS[opt.kind], opt.lr, opt.beta1, opt.beta2, opt.eps, opt.momentum, opt.step], dtype=np.float64
        )
        for slot, per in opt.buffers.items():
            for name, value in per.items():
                entries[f"opt/{slot}/{name}"] = value
    return dict(sorted(entries.items()))


def encode_checkpoint(model: UNetModel, opt: Optional[OptState] = None) -> bytes:
    """Serialise a model (and optionally its optimiser state) to bytes."""
    entries = _entries(model, opt)
    chunks = [MAGIC, struct.pack("<II", VERSION, len(entries))]
    for name, value in entries.items():
        encoded = name.encode("utf-8")
        array = np.ascontiguousarray(value, dtype="<f8")
        chunks.append(struct.pack("<I", len(encoded)))
        chunks.append(encoded)
        chunks.append(struct.pack(f"<I{array.ndim}I", array.ndim, *array.shape))
        chunks.append(array.tobytes(order="C"))
    return b"".join(chunks)


def expected_size(model: UNetModel, opt: Optional[OptState] = None) -> int:
    """File size implied by the format: header plus Σ per-entry records."""
    total = 4 + 4 + 4
    for name, value in _entries(model, opt).items():
        total += 4 + len(name.encode("utf-8")) + 4 + 4 * np.ndim(value) + 8 * np.size(value)
    return total


def save_checkpoint(model: UNetModel, path: Union[Path, str], opt: Optional[OptState] = None) -> Path:
    """
    Write a checkpoint file.

    Args:
        model: Model to save
        path: Destination
        opt: Optional optimiser state

    Returns:
        Path of the written file
    """
    path = Path(path)
    ensure_directory(path.parent)
    path.write_bytes(encode_checkpoint(model, opt))
    logger.debug(f"Saved checkpoint {path}")
    return path


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.offset = 0

    def take(self, size: int, what: str) -> bytes:
        if self.offset + size > len(self.data):
            raise CheckpointFormatError(f"Checkpoint truncated while reading {what} at byte {self.offset}")
        chunk = self.data[self.offset:self.offset + size]
        self.offset += size
        return chunk

    def uint32(self, what: str) -> int:
        return struct.unpack("<I", self.take(4, what))[0]


def decode_checkpoint(data: bytes) -> Dict[str, np.ndarray]:
    """Parse checkpoint bytes into named arrays."""
    if data[:4] != MAGIC:
        raise CheckpointFormatError(f"Bad checkpoint magic {data[:4]!r}, expected {MAGIC!r}")
    reader = _Reader(data)
    reader.take(4, "magic")
    version = reader.uint32("version")
    if version != VERSION:
        raise CheckpointFormatError(f"Unsupported checkpoint version {version}, expected {VERSION}")
    count = reader.uint32("entry count")
    entries: Dict[str, np.ndarray] = {}
    for _ in range(count):
        name = reader.take(reader.uint32("name length"), "name").decode("utf-8")
        rank = reader.uint32(f"rank of {name}")
        dims = struct.unpack(f"<{rank}I", reader.take(4 * rank, f"dims of {name}"))
        size = int(np.prod(dims)) if rank else 1
        payload = reader.take(8 * size, f"payload of {name}")
        entries[name] = np.frombuffer(payload, dtype="<f8").astype(np.float64).reshape(dims)
    if reader.offset != len(data):
        raise CheckpointFormatError(f"Checkpoint has {len(data) - reader.offset} trailing byte(s)")
    return entries


def load_checkpoint(path: Union[Path, str]) -> Tuple[UNetModel, Optional[OptState]]:
    """
    Read a checkpoint file.

    Args:
        path: Checkpoint path

    Returns:
        (model, optimiser state or None)

    Raises:
        FileNotFoundError: Missing file
        CheckpointFormatError: Bad magic, version, truncation or inconsistent entries
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"❌ Checkpoint not found: {path}")
    entries = decode_checkpoint(path.read_bytes())

    if "config/unet" not in entries:
        raise CheckpointFormatError(f"{path}: missing config/unet entry")
    in_ch, classes, base, depth = (int(v) for v in entries["config/unet"])
    config = UNetConfig(in_channels=in_ch, num_classes=classes, base_channels=base, depth=depth)

    params = {name[len("param/"):]: value for name, value in entries.items() if name.startswith("param/")}
    expected = parameter_shapes(config)
    if {k: v.shape for k, v in params.items()} != expected:
        raise CheckpointFormatError(f"{path}: parameters do not match the stored architecture")
    model = UNetModel(config=config, params=dict(sorted(params.items())))

    opt = None
    if "opt/hyper" in entries:
        kind_code, lr, beta1, beta2, eps, momentum, step = entries["opt/hyper"]
        kind = {v: k for k, v in _OPT_KINDS.items()}[float(kind_code)]
        buffers: Dict[str, Dict[str, np.ndarray]] = {}
        for name, value in entries.items():
            if name.startswith("opt/") and name != "opt/hyper":
                _, slot, param_name = name.split("/", 2)
                buffers.setdefault(slot, {})[param_name] = value
        opt = OptState(kind=kind, lr=lr, beta1=beta1, beta2=beta2, eps=eps, momentum=momentum,
                       step=int(step), buffers={s: dict(sorted(b.items())) for s, b in buffers.items()})
    logger.debug(f"Loaded checkpoint {path}")
    return model, opt
