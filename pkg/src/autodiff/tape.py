"""
Eager tape for reverse-mode automatic differentiation.

Every primitive computes its forward value immediately and appends a node to
the tape. Node inputs always reference earlier nodes, so the tape order is a
topological order and ``backward`` is a single reverse sweep. Gradients are
produced for every node the root depends on, inputs included, which is what
the curriculum needs for ∇ with respect to the image.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from src.autodiff.tensor import Tensor, as_tensor, check_finite
from src.utils.errors import NonFiniteError, ShapeError, UnsupportedPrimitiveError


@dataclass
class Node:
    """One recorded primitive application."""
    kind: str
    inputs: Tuple[int, ...]
    attrs: Dict[str, Any]
    value: Tensor


# ---------------------------------------------------------------------------
# Primitive rules
# ---------------------------------------------------------------------------

class Primitive:
    """Forward/backward rule pair for one primitive kind."""

    kind: str = ""
    arity: Optional[int] = 1  # None means variadic

    def check(self, shapes: List[Tuple[int, ...]], attrs: Dict[str, Any]) -> None:
        pass

    def forward(self, values: List[Tensor], attrs: Dict[str, Any]) -> Tensor:
        raise NotImplementedError

    def backward(self, grad: Tensor, values: List[Tensor], out: Tensor, attrs: Dict[str, Any]) -> List[Tensor]:
        raise NotImplementedError

    def _mismatch(self, shapes, detail: str = "") -> ShapeError:
        suffix = f" ({detail})" if detail else ""
        return ShapeError(f"{self.kind}: incompatible input shapes {shapes}{suffix}")


class _SameShapeBinary(Primitive):
    arity = 2

    def check(self, shapes, attrs):
        if shapes[0] != shapes[1]:
            raise self._mismatch(shapes, "elementwise operands must have identical shapes")


class Add(_SameShapeBinary):
    kind = "add"

    def forward(self, values, attrs):
        return values[0] + values[1]

    def backward(self, grad, values, out, attrs):
        return [grad, grad]


class Sub(_SameShapeBinary):
    kind = "sub"

    def forward(self, values, attrs):
        return values[0] - values[1]

    def backward(self, grad, values, out, attrs):
        return [grad, -grad]


class Mul(_SameShapeBinary):
    kind = "mul"

    def forward(self, values, attrs):
        return values[0] * values[1]

    def backward(self, grad, values, out, attrs):
        return [grad * values[1], grad * values[0]]


class Div(_SameShapeBinary):
    kind = "div"

    def forward(self, values, attrs):
        return values[0] / values[1]

    def backward(self, grad, values, out, attrs):
        a, b = values
        return [grad / b, -grad * a / (b * b)]


class Scale(Primitive):
    kind = "scale"

    def forward(self, values, attrs):
        return values[0] * float(attrs["factor"])

    def backward(self, grad, values, out, attrs):
        return [grad * float(attrs["factor"])]


class AddConst(Primitive):
    kind = "add_const"

    def forward(self, values, attrs):
        return values[0] + float(attrs["value"])

    def backward(self, grad, values, out, attrs):
        return [grad]


class Relu(Primitive):
    kind = "relu"

    def forward(self, values, attrs):
        return np.maximum(values[0], 0.0)

    def backward(self, grad, values, out, attrs):
        return [grad * (values[0] > 0.0)]


class Log(Primitive):
    kind = "log"

    def forward(self, values, attrs):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log(values[0])

    def backward(self, grad, values, out, attrs):
        return [grad / values[0]]


class Clamp(Primitive):
    kind = "clamp"

    def check(self, shapes, attrs):
        if float(attrs["lo"]) > float(attrs["hi"]):
            raise ValueError(f"clamp: lo {attrs['lo']} exceeds hi {attrs['hi']}")

    def forward(self, values, attrs):
        return np.clip(values[0], float(attrs["lo"]), float(attrs["hi"]))

    def backward(self, grad, values, out, attrs):
        x = values[0]
        inside = (x >= float(attrs["lo"])) & (x <= float(attrs["hi"]))
        return [grad * inside]


def _reduce_axes(shape: Tuple[int, ...], axes) -> Optional[Tuple[int, ...]]:
    if axes is None:
        return None
    rank = len(shape)
    normalised = tuple(sorted(int(a) % rank for a in (axes if isinstance(axes, (tuple, list)) else (axes,))))
    if len(set(normalised)) != len(normalised):
        raise ShapeError(f"duplicate reduction axes {axes} for shape {shape}")
    return normalised


def _expand_reduced(grad: Tensor, shape: Tuple[int, ...], axes) -> Tensor:
    axes = _reduce_axes(shape, axes)
    if axes is not None:
        grad = np.expand_dims(grad, axes)
    return np.broadcast_to(grad, shape).copy()


class ReduceSum(Primitive):
    kind = "sum"

    def check(self, shapes, attrs):
        axes = attrs.get("axes")
        if axes is not None and any(not -len(shapes[0]) <= int(a) < len(shapes[0]) for a in np.atleast_1d(axes)):
            raise self._mismatch(shapes, f"axes {axes} out of range")

    def forward(self, values, attrs):
        return np.sum(values[0], axis=_reduce_axes(values[0].shape, attrs.get("axes")))

    def backward(self, grad, values, out, attrs):
        return [_expand_reduced(grad, values[0].shape, attrs.get("axes"))]


class ReduceMean(ReduceSum):
    kind = "mean"

    def forward(self, values, attrs):
        return np.mean(values[0], axis=_reduce_axes(values[0].shape, attrs.get("axes")))

    def backward(self, grad, values, out, attrs):
        shape = values[0].shape
        count = values[0].size // max(out.size, 1)
        return [_expand_reduced(grad, shape, attrs.get("axes")) / count]


def _im2col(x: Tensor) -> Tensor:
    """3×3 zero-padded patches: (b,ci,h,w) → (b·h·w, ci·9)."""
    b, ci, h, w = x.shape
    padded = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)))
    windows = sliding_window_view(padded, (3, 3), axis=(2, 3))  # b, ci, h, w, 3, 3
    return windows.transpose(0, 2, 3, 1, 4, 5).reshape(b * h * w, ci * 9)


def _conv3x3(x: Tensor, weight: Tensor, cols: Optional[Tensor] = None) -> Tensor:
    """Stride-1, zero-padding-1 cross-correlation: (b,ci,h,w) × (co,ci,3,3) → (b,co,h,w)."""
    b, ci, h, w = x.shape
    co = weight.shape[0]
    if cols is None:
        cols = _im2col(x)
    out = cols @ weight.reshape(co, ci * 9).T
    return out.reshape(b, h, w, co).transpose(0, 3, 1, 2)


class Conv2d(Primitive):
    kind = "conv2d"
    arity = 3

    def check(self, shapes, attrs):
        x, w, bias = shapes
        if len(x) != 4 or len(w) != 4 or len(bias) != 1:
            raise self._mismatch(shapes, "expected x (b,ci,h,w), kernel (co,ci,3,3), bias (co,)")
        if w[2:] != (3, 3) or w[1] != x[1] or bias[0] != w[0]:
            raise self._mismatch(shapes, "kernel must be 3×3 with matching channel counts")

    def forward(self, values, attrs):
        x, weight, bias = values
        # patches are reused by the weight gradient
        attrs["cols"] = _im2col(x)
        return np.ascontiguousarray(_conv3x3(x, weight, attrs["cols"]) + bias[None, :, None, None])

    def backward(self, grad, values, out, attrs):
        x, weight, _ = values
        b, ci, h, w = x.shape
        co = weight.shape[0]
        cols = attrs.get("cols")
        if cols is None:
            cols = _im2col(x)
        grad_rows = grad.transpose(0, 2, 3, 1).reshape(b * h * w, co)
        grad_weight = (grad_rows.T @ cols).reshape(weight.shape)
        grad_bias = grad.sum(axis=(0, 2, 3))
        # scatter the patch gradients back onto the padded input
        grad_cols = (grad_rows @ weight.reshape(co, ci * 9)).reshape(b, h, w, ci, 3, 3)
        grad_padded = np.zeros((b, ci, h + 2, w + 2))
        for dy in range(3):
            for dx in range(3):
                grad_padded[:, :, dy:dy + h, dx:dx + w] += grad_cols[..., dy, dx].transpose(0, 3, 1, 2)
        return [np.ascontiguousarray(grad_padded[:, :, 1:-1, 1:-1]), grad_weight, grad_bias]


class MaxPool2(Primitive):
    kind = "maxpool2"

    def check(self, shapes, attrs):
        x = shapes[0]
        if len(x) != 4 or x[2] % 2 or x[3] % 2:
            raise self._mismatch(shapes, "maxpool 2×2 needs (b,c,h,w) with even h and w")

    @staticmethod
    def _blocks(x: Tensor) -> Tensor:
        b, c, h, w = x.shape
        return x.reshape(b, c, h // 2, 2, w // 2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(b, c, h // 2, w // 2, 4)

    def forward(self, values, attrs):
        return self._blocks(values[0]).max(axis=-1)

    def backward(self, grad, values, out, attrs):
        x = values[0]
        b, c, h, w = x.shape
        winner = self._blocks(x).argmax(axis=-1)  # first maximum takes the gradient
        routed = np.zeros((b, c, h // 2, w // 2, 4))
        np.put_along_axis(routed, winner[..., None], grad[..., None], axis=-1)
        routed = routed.reshape(b, c, h // 2, w // 2, 2, 2).transpose(0, 1, 2, 4, 3, 5)
        return [routed.reshape(b, c, h, w)]


class Upsample2(Primitive):
    kind = "upsample2"

    def check(self, shapes, attrs):
        if len(shapes[0]) != 4:
            raise self._mismatch(shapes, "upsample expects (b,c,h,w)")

    def forward(self, values, attrs):
        return values[0].repeat(2, axis=2).repeat(2, axis=3)

    def backward(self, grad, values, out, attrs):
        b, c, h, w = values[0].shape
        return [grad.reshape(b, c, h, 2, w, 2).sum(axis=(3, 5))]


class Concat(Primitive):
    kind = "concat"
    arity = None

    def check(self, shapes, attrs):
        if not shapes:
            raise self._mismatch(shapes, "concat needs at least one input")
        ref = shapes[0]
        for shape in shapes:
            if len(shape) < 2 or len(shape) != len(ref) or shape[:1] + shape[2:] != ref[:1] + ref[2:]:
                raise self._mismatch(shapes, "all dimensions except channels must agree")

    def forward(self, values, attrs):
        return np.concatenate(values, axis=1)

    def backward(self, grad, values, out, attrs):
        bounds = np.cumsum([v.shape[1] for v in values])[:-1]
        return [np.ascontiguousarray(part) for part in np.split(grad, bounds, axis=1)]


class Softmax(Primitive):
    kind = "softmax"

    def check(self, shapes, attrs):
        if len(shapes[0]) < 2:
            raise self._mismatch(shapes, "softmax runs over axis 1 and needs rank ≥ 2")

    def forward(self, values, attrs):
        shifted = values[0] - values[0].max(axis=1, keepdims=True)
        exp = np.exp(shifted)
        return exp / exp.sum(axis=1, keepdims=True)

    def backward(self, grad, values, out, attrs):
        return [out * (grad - (grad * out).sum(axis=1, keepdims=True))]


class Select(Primitive):
    """Pick channel ``labels[b, ...]`` from x (b, c, ...); the one-hot-select primitive."""
    kind = "select"

    def check(self, shapes, attrs):
        x = shapes[0]
        labels = np.asarray(attrs["labels"])
        if len(x) < 2 or labels.shape != x[:1] + x[2:]:
            raise self._mismatch([x, labels.shape], "labels must match x without its channel axis")
        if labels.size and (labels.min() < 0 or labels.max() >= x[1]):
            raise ValueError(f"select: class ids must lie in [0, {x[1] - 1}]")

    def forward(self, values, attrs):
        labels = np.asarray(attrs["labels"], dtype=np.int64)
        return np.take_along_axis(values[0], labels[:, None], axis=1)[:, 0]

    def backward(self, grad, values, out, attrs):
        labels = np.asarray(attrs["labels"], dtype=np.int64)
        scattered = np.zeros_like(values[0])
        np.put_along_axis(scattered, labels[:, None], grad[:, None], axis=1)
        return [scattered]


PRIMITIVES: Dict[str, Primitive] = {
    p.kind: p for p in (
        Add(), Sub(), Mul(), Div(), Scale(), AddConst(), Relu(), Log(), Clamp(),
        ReduceSum(), ReduceMean(), Conv2d(), MaxPool2(), Upsample2(), Concat(),
        Softmax(), Select(),
    )
}


# ---------------------------------------------------------------------------
# Tape
# ---------------------------------------------------------------------------

@dataclass
class Tape:
    """Ordered record of primitive applications."""
    nodes: List[Node] = field(default_factory=list)

    def leaf(self, value, name: str = "leaf") -> int:
        """Record an input (parameter, image, constant) and return its node id."""
        self.nodes.append(Node("leaf", (), {"name": name}, as_tensor(value, name)))
        return len(self.nodes) - 1

    def value(self, node_id: int) -> Tensor:
        return self.nodes[node_id].value

    def record(self, kind: str, inputs: Sequence[int], **attrs) -> int:
        return record_primitive(self, kind, inputs, attrs)

    # convenience wrappers, one per primitive kind
    def add(self, a: int, b: int) -> int:
        return self.record("add", (a, b))

    def sub(self, a: int, b: int) -> int:
        return self.record("sub", (a, b))

    def mul(self, a: int, b: int) -> int:
        return self.record("mul", (a, b))

    def div(self, a: int, b: int) -> int:
        return self.record("div", (a, b))

    def scale(self, a: int, factor: float) -> int:
        return self.record("scale", (a,), factor=factor)

    def add_const(self, a: int, value: float) -> int:
        return self.record("add_const", (a,), value=value)

    def relu(self, a: int) -> int:
        return self.record("relu", (a,))

    def log(self, a: int) -> int:
        return self.record("log", (a,))

    def clamp(self, a: int, lo: float, hi: float) -> int:
        return self.record("clamp", (a,), lo=lo, hi=hi)

    def reduce_sum(self, a: int, axes=None) -> int:
        return self.record("sum", (a,), axes=axes)

    def reduce_mean(self, a: int, axes=None) -> int:
        return self.record("mean", (a,), axes=axes)

    def conv2d(self, x: int, weight: int, bias: int) -> int:
        return self.record("conv2d", (x, weight, bias))

    def maxpool2(self, a: int) -> int:
        return self.record("maxpool2", (a,))

    def upsample2(self, a: int) -> int:
        return self.record("upsample2", (a,))

    def concat(self, *parts: int) -> int:
        return self.record("concat", parts)

    def softmax(self, a: int) -> int:
        return self.record("softmax", (a,))

    def select(self, a: int, labels: np.ndarray) -> int:
        return self.record("select", (a,), labels=np.asarray(labels, dtype=np.int64))


def record_primitive(tape: Tape, kind: str, inputs: Sequence[int], attrs: Optional[Dict[str, Any]] = None) -> int:
    """
    Evaluate a primitive eagerly and append it to the tape.

    Args:
        tape: Tape to record on
        kind: Primitive kind (see PRIMITIVES)
        inputs: Ids of earlier nodes
        attrs: Kind-specific attributes

    Returns:
        Id of the new node

    Raises:
        UnsupportedPrimitiveError: Unknown kind
        ShapeError: Input shapes incompatible with the kind
        NonFiniteError: Forward value contains NaN or infinity
    """
    attrs = dict(attrs or {})
    primitive = PRIMITIVES.get(kind)
    if primitive is None:
        raise UnsupportedPrimitiveError(f"Unsupported primitive kind '{kind}'; known: {sorted(PRIMITIVES)}")

    inputs = tuple(int(i) for i in inputs)
    if primitive.arity is not None and len(inputs) != primitive.arity:
        raise ShapeError(f"{kind}: expected {primitive.arity} input(s), got {len(inputs)}")
    for node_id in inputs:
        if not 0 <= node_id < len(tape.nodes):
            raise ValueError(f"{kind}: input id {node_id} does not reference an earlier node")

    values = [tape.nodes[i].value for i in inputs]
    primitive.check([v.shape for v in values], attrs)
    raw = np.asarray(primitive.forward(values, attrs), dtype=np.float64)
    # ascontiguousarray promotes 0-d results to shape (1,)
    out = np.ascontiguousarray(raw).reshape(raw.shape)
    check_finite(out, kind)

    tape.nodes.append(Node(kind, inputs, attrs, out))
    return len(tape.nodes) - 1


def backward(tape: Tape, root: int) -> Dict[int, Tensor]:
    """
    Reverse-accumulate gradients of a scalar root.

    Args:
        tape: Tape holding the graph
        root: Id of a node whose value has exactly one element

    Returns:
        Mapping node id → gradient (same shape as the node value) for every
        node reachable from the root; the root itself maps to ones.
    """
    root_value = tape.nodes[root].value
    if root_value.size != 1:
        raise ShapeError(f"backward needs a scalar root, node {root} has shape {root_value.shape}")

    grads: Dict[int, Tensor] = {root: np.ones_like(root_value)}
    for node_id in range(root, -1, -1):
        grad = grads.get(node_id)
        node = tape.nodes[node_id]
        if grad is None or node.kind == "leaf":
            continue
        values = [tape.nodes[i].value for i in node.inputs]
        input_grads = PRIMITIVES[node.kind].backward(grad, values, node.value, node.attrs)
        for input_id, value, input_grad in zip(node.inputs, values, input_grads):
            input_grad = np.asarray(input_grad, dtype=np.float64)
            if input_grad.shape != value.shape:
                raise ShapeError(
                    f"{node.kind}: backward produced gradient of shape {input_grad.shape} "
                    f"for input of shape {value.shape}"
                )
            if input_id in grads:
                grads[input_id] = grads[input_id] + input_grad
            else:
                grads[input_id] = input_grad
    for node_id, grad in grads.items():
        if not np.all(np.isfinite(grad)):
            raise NonFiniteError(f"gradient of node {node_id} ({tape.nodes[node_id].kind}) is not finite")
    return grads
