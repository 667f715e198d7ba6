"""Tape primitives, backward sweep and finite-difference agreement."""

import numpy as np
import pytest

from src.autodiff import PRIMITIVES, Rng, Tape, analytic_gradient, backward, finite_difference_check, from_flat
from src.utils.errors import NonFiniteError, ShapeError, UnsupportedPrimitiveError


def _random(shape, seed, low=-1.0, high=1.0):
    return Rng(seed).uniform(int(np.prod(shape)), low, high).reshape(shape)


def _steep_coords(graph, x, floor: float = 1e-3, limit: int = 64):
    """Flat coordinates whose gradient is large enough for a relative comparison."""
    magnitude = np.abs(analytic_gradient(graph, x)).reshape(-1)
    coords = [int(i) for i in np.argsort(-magnitude, kind="stable")[:limit] if magnitude[i] > floor]
    assert coords, "graph has no usable gradient"
    return coords


def _weighted_sum(tape: Tape, node: int, seed: int = 99) -> int:
    """Scalar sum(node ⊙ w) for a fixed random w, so every output entry matters."""
    weights = tape.leaf(_random(tape.value(node).shape, seed), "w")
    return tape.reduce_sum(tape.mul(node, weights))


def test_relu_forward():
    tape = Tape()
    x = tape.leaf(from_flat([4], [-1.0, 0.0, 2.0, -3.5]))
    assert tape.value(tape.relu(x)).tolist() == [0.0, 0.0, 2.0, 0.0]


def test_conv_with_zero_kernel_is_bias():
    tape = Tape()
    x = tape.leaf(_random((1, 2, 5, 5), 1))
    w = tape.leaf(np.zeros((3, 2, 3, 3)))
    b = tape.leaf(np.array([0.5, -1.0, 2.0]))
    out = tape.value(tape.conv2d(x, w, b))
    assert out.shape == (1, 3, 5, 5)
    assert np.all(out[0, 1] == -1.0)


def test_conv_identity_kernel_copies_input():
    kernel = np.zeros((1, 1, 3, 3))
    kernel[0, 0, 1, 1] = 1.0
    image = _random((2, 1, 6, 7), 2)
    tape = Tape()
    out = tape.conv2d(tape.leaf(image), tape.leaf(kernel), tape.leaf(np.zeros(1)))
    np.testing.assert_array_equal(tape.value(out), image)


def test_conv_preserves_spatial_size_for_all_sizes():
    kernel = _random((1, 1, 3, 3), 3)
    for size in range(4, 65):
        tape = Tape()
        out = tape.conv2d(tape.leaf(np.ones((1, 1, size, size))), tape.leaf(kernel), tape.leaf(np.zeros(1)))
        assert tape.value(out).shape == (1, 1, size, size)


def test_maxpool_example():
    tape = Tape()
    x = tape.leaf(from_flat([1, 1, 2, 2], [1.0, 5.0, 3.0, 2.0]))
    assert tape.value(tape.maxpool2(x)).reshape(-1).tolist() == [5.0]


def test_maxpool_routes_gradient_to_maximum():
    tape = Tape()
    x = tape.leaf(from_flat([1, 1, 2, 2], [1.0, 5.0, 3.0, 2.0]))
    grads = backward(tape, tape.reduce_sum(tape.maxpool2(x)))
    assert grads[x].reshape(-1).tolist() == [0.0, 1.0, 0.0, 0.0]


def test_upsample_repeats_pixels():
    tape = Tape()
    x = tape.leaf(from_flat([1, 1, 1, 2], [1.0, 2.0]))
    out = tape.value(tape.upsample2(x))
    assert out[0, 0].tolist() == [[1.0, 1.0, 2.0, 2.0], [1.0, 1.0, 2.0, 2.0]]


def test_softmax_rows_sum_to_one():
    tape = Tape()
    x = tape.leaf(_random((2, 4, 3, 3), 4, -20.0, 20.0))
    probs = tape.value(tape.softmax(x))
    np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-12)


def test_square_gradient():
    tape = Tape()
    x = tape.leaf(np.array([3.0]))
    root = tape.reduce_sum(tape.mul(x, x))
    assert backward(tape, root)[x].tolist() == [6.0]


def test_shared_input_accumulates_gradient():
    tape = Tape()
    x = tape.leaf(np.array([2.0, -1.0]))
    root = tape.reduce_sum(tape.add(tape.scale(x, 3.0), x))
    assert backward(tape, root)[x].tolist() == [4.0, 4.0]


def test_unknown_kind_rejected():
    tape = Tape()
    x = tape.leaf(np.ones(2))
    with pytest.raises(UnsupportedPrimitiveError):
        tape.record("tanh", (x,))


def test_shape_mismatch_names_kind():
    tape = Tape()
    a = tape.leaf(np.ones((2, 3)))
    b = tape.leaf(np.ones((3, 2)))
    with pytest.raises(ShapeError, match="add"):
        tape.add(a, b)


def test_conv_channel_mismatch():
    tape = Tape()
    x = tape.leaf(np.ones((1, 2, 4, 4)))
    w = tape.leaf(np.ones((1, 3, 3, 3)))
    with pytest.raises(ShapeError, match="conv2d"):
        tape.conv2d(x, w, tape.leaf(np.zeros(1)))


def test_maxpool_odd_size_rejected():
    tape = Tape()
    with pytest.raises(ShapeError):
        tape.maxpool2(tape.leaf(np.ones((1, 1, 3, 4))))


def test_backward_needs_scalar_root():
    tape = Tape()
    x = tape.leaf(np.ones(3))
    with pytest.raises(ShapeError):
        backward(tape, tape.relu(x))


def test_log_of_zero_is_non_finite():
    tape = Tape()
    x = tape.leaf(np.array([0.0, 1.0]))
    with pytest.raises(NonFiniteError):
        tape.log(x)


def test_leaf_rejects_nan():
    with pytest.raises(NonFiniteError):
        Tape().leaf(np.array([np.nan]))


def test_from_flat_checks_length():
    with pytest.raises(ValueError):
        from_flat([2, 2], [1.0, 2.0, 3.0])


def test_forward_and_backward_are_deterministic():
    image = _random((1, 2, 4, 4), 5)
    kernel = _random((2, 2, 3, 3), 6)

    def run():
        tape = Tape()
        x = tape.leaf(image)
        out = tape.relu(tape.conv2d(x, tape.leaf(kernel), tape.leaf(np.zeros(2))))
        root = _weighted_sum(tape, out)
        return tape.value(root), backward(tape, root)[x]

    first, second = run(), run()
    assert first[0].tobytes() == second[0].tobytes()
    assert first[1].tobytes() == second[1].tobytes()


def test_every_kind_is_registered():
    assert set(PRIMITIVES) == {
        "add", "sub", "mul", "div", "scale", "add_const", "relu", "log", "clamp",
        "sum", "mean", "conv2d", "maxpool2", "upsample2", "concat", "softmax", "select",
    }


# (name, input shape, input range, graph builder)
GRAPHS = [
    ("add", (2, 3), (-1, 1), lambda t, x: _weighted_sum(t, t.add(x, t.leaf(_random((2, 3), 11))))),
    ("sub", (2, 3), (-1, 1), lambda t, x: _weighted_sum(t, t.sub(t.leaf(_random((2, 3), 12)), x))),
    ("mul", (2, 3), (-1, 1), lambda t, x: _weighted_sum(t, t.mul(x, x))),
    ("div-numerator", (2, 3), (-1, 1), lambda t, x: _weighted_sum(t, t.div(x, t.leaf(_random((2, 3), 13, 0.5, 2.0))))),
    ("div-denominator", (2, 3), (0.5, 2), lambda t, x: _weighted_sum(t, t.div(t.leaf(_random((2, 3), 14)), x))),
    ("scale", (4,), (-1, 1), lambda t, x: _weighted_sum(t, t.scale(x, -2.5))),
    ("add_const", (4,), (-1, 1), lambda t, x: _weighted_sum(t, t.mul(t.add_const(x, 0.7), x))),
    ("relu", (3, 4), (0.1, 1), lambda t, x: _weighted_sum(t, t.relu(t.add_const(x, -0.55)))),
    ("log", (3, 4), (0.2, 2), lambda t, x: _weighted_sum(t, t.log(x))),
    ("clamp", (3, 4), (-1, 1), lambda t, x: _weighted_sum(t, t.clamp(x, -0.5, 0.5))),
    ("sum-axes", (2, 3, 4), (-1, 1), lambda t, x: _weighted_sum(t, t.reduce_sum(t.mul(x, x), axes=(0, 2)))),
    ("mean-axes", (2, 3, 4), (-1, 1), lambda t, x: _weighted_sum(t, t.reduce_mean(t.mul(x, x), axes=1))),
    ("mean-all", (2, 3), (-1, 1), lambda t, x: t.reduce_mean(t.mul(x, x))),
    ("conv2d-input", (2, 2, 5, 4), (-1, 1),
     lambda t, x: _weighted_sum(t, t.conv2d(x, t.leaf(_random((3, 2, 3, 3), 15)), t.leaf(_random((3,), 16))))),
    ("conv2d-kernel", (3, 2, 3, 3), (-1, 1),
     lambda t, x: _weighted_sum(t, t.conv2d(t.leaf(_random((2, 2, 4, 4), 17)), x, t.leaf(np.zeros(3))))),
    ("maxpool2", (1, 2, 4, 6), (-1, 1), lambda t, x: _weighted_sum(t, t.maxpool2(x))),
    ("upsample2", (1, 2, 3, 2), (-1, 1), lambda t, x: _weighted_sum(t, t.upsample2(x))),
    ("concat", (1, 2, 3, 3), (-1, 1), lambda t, x: _weighted_sum(t, t.concat(t.leaf(_random((1, 1, 3, 3), 18)), x, x))),
    ("softmax", (2, 4, 2, 2), (-2, 2), lambda t, x: _weighted_sum(t, t.softmax(x))),
    ("select", (2, 4, 3), (-1, 1),
     lambda t, x: _weighted_sum(t, t.select(x, np.array([[0, 3, 1], [2, 2, 0]])))),
]


@pytest.mark.parametrize("name,shape,bounds,graph", GRAPHS, ids=[g[0] for g in GRAPHS])
def test_gradient_matches_central_differences(name, shape, bounds, graph):
    x = _random(shape, 21, *bounds)
    assert finite_difference_check(graph, x, coords=_steep_coords(graph, x)) < 1e-6


def test_finite_difference_check_on_sampled_coordinates():
    x = _random((1, 1, 8, 8), 22)

    def graph(t, x_id):
        kernel = t.leaf(_random((2, 1, 3, 3), 23))
        hidden = t.relu(t.conv2d(x_id, kernel, t.leaf(np.zeros(2))))
        return _weighted_sum(t, t.upsample2(t.maxpool2(hidden)))

    assert finite_difference_check(graph, x, coords=_steep_coords(graph, x, limit=16)) < 1e-6
    assert finite_difference_check(lambda t, x_id: t.reduce_sum(x_id), x, num_samples=8, seed=4) < 1e-9


def test_full_reduction_is_zero_dimensional():
    tape = Tape()
    x = tape.leaf(np.array([[1.0, 2.0], [3.0, 4.0]]))
    total = tape.reduce_sum(x)
    mean = tape.reduce_mean(x)
    assert tape.value(total).shape == ()
    assert tape.value(mean).shape == ()
    assert tape.value(tape.add(total, mean)).item() == 12.5
    assert backward(tape, total)[x].shape == (2, 2)


def test_scalar_leaf_keeps_shape():
    tape = Tape()
    assert tape.value(tape.leaf(2.5)).shape == ()
