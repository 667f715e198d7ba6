"""Local Gradient Sign, style fusion, FGSM, per-pixel increments and Mixup."""

import numpy as np
import pytest

from src.autodiff import Rng
from src.curriculum.operations import blend, fgsm_perturb, lgs, mixup, scl_increment
from src.metrics.losses import one_hot
from src.models.sample import Sample
from src.utils.errors import ShapeError


def test_lgs_zero_gradient():
    assert np.all(lgs(np.zeros((8, 8)), 0.25, 4) == 0.0)


def test_lgs_half_planes():
    grad = np.ones((8, 8))
    grad[:, 4:] = -1.0
    step = lgs(grad, 0.25, 4)
    assert np.all(step[:, :4] == 0.25)
    assert np.all(step[:, 4:] == 0.0)


@pytest.mark.parametrize("seed", range(5))
def test_lgs_values_and_block_constancy(seed):
    grad = Rng(seed).normal(16 * 12).reshape(16, 12)
    step = lgs(grad, 0.3, 4)
    assert set(np.unique(step)) <= {0.0, 0.3}
    blocks = step.reshape(4, 4, 3, 4).transpose(0, 2, 1, 3).reshape(4, 3, 16)
    assert np.all(blocks == blocks[..., :1])
    positive = grad.reshape(4, 4, 3, 4).mean(axis=(1, 3)) > 0
    assert np.array_equal(blocks[..., 0] == 0.3, positive)


def _lgs_by_blocks(grad, epsilon, pool_size):
    """Block loop: mean, sign, scale by ε, clip at zero, paint the block."""
    height, width = grad.shape
    out = np.zeros((height, width))
    for top in range(0, height, pool_size):
        for left in range(0, width, pool_size):
            mean = grad[top:top + pool_size, left:left + pool_size].mean()
            value = max(epsilon * float(np.sign(mean)), 0.0)
            out[top:top + pool_size, left:left + pool_size] = value
    return out


def test_lgs_matches_block_loop_on_random_fields():
    rng = Rng(2024)
    sides = np.arange(8, 65, 4)
    for k in range(1000):
        field_rng = rng.child("field", k)
        height = int(sides[field_rng.integers(0, len(sides))])
        width = int(sides[field_rng.integers(0, len(sides))])
        pool_size = (1, 2, 4)[field_rng.integers(0, 3)]
        epsilon = field_rng.uniform_scalar(0.01, 1.0)
        if k % 2:
            # small integers make exact zero block means common
            grad = (field_rng.integers(0, 3, height * width) - 1).astype(np.float64).reshape(height, width)
        else:
            grad = field_rng.normal(height * width).reshape(height, width)
        expected = _lgs_by_blocks(grad, epsilon, pool_size)
        assert np.array_equal(lgs(grad, epsilon, pool_size), expected), (height, width, pool_size)


def test_lgs_indivisible_size():
    with pytest.raises(ShapeError):
        lgs(np.zeros((6, 8)), 0.25, 4)


def test_lgs_needs_a_map():
    with pytest.raises(ShapeError):
        lgs(np.zeros((1, 8, 8)), 0.25, 4)


def test_scl_negative_gradient():
    assert np.all(scl_increment(-np.ones((4, 4)), 0.25) == 0.0)


def test_scl_equals_unpooled_lgs():
    for seed in range(5):
        grad = Rng(seed).normal(64).reshape(8, 8)
        np.testing.assert_array_equal(scl_increment(grad, 0.25), lgs(grad, 0.25, 1))


def test_checkerboard_separates_scl_from_lgs():
    grad = np.where(np.indices((8, 8)).sum(axis=0) % 2 == 0, 1.0, -1.0)
    scl = scl_increment(grad, 0.25)
    assert np.array_equal(scl == 0.25, grad > 0)
    assert np.all(lgs(grad, 0.25, 4) == 0.0)


def test_blend_endpoints():
    z = Rng(1).uniform(16).reshape(1, 4, 4)
    x_c = Rng(2).uniform(16).reshape(1, 4, 4)
    np.testing.assert_array_equal(blend(np.zeros((4, 4)), z, x_c), x_c)
    np.testing.assert_array_equal(blend(np.ones((4, 4)), z, x_c), z)


def test_blend_midpoint():
    gamma = np.zeros((2, 2))
    gamma[0, 1] = 0.5
    z = np.full((1, 2, 2), 0.6)
    x_c = np.full((1, 2, 2), 0.2)
    assert blend(gamma, z, x_c)[0, 0, 1] == pytest.approx(0.4)


def test_blend_rejects_out_of_range_gamma():
    with pytest.raises(ValueError):
        blend(np.full((2, 2), 1.25), np.zeros((1, 2, 2)), np.zeros((1, 2, 2)))


def test_blend_shape_mismatch():
    with pytest.raises(ShapeError):
        blend(np.zeros((3, 3)), np.zeros((1, 2, 2)), np.zeros((1, 2, 2)))


def test_fgsm_zero_step():
    x = Rng(3).uniform(9).reshape(1, 3, 3)
    np.testing.assert_array_equal(fgsm_perturb(x, Rng(4).normal(9).reshape(1, 3, 3), 0.0), x)


def test_fgsm_sign_step():
    assert fgsm_perturb(np.array([0.5]), np.array([-2.0]), 0.25).tolist() == [0.25]


def test_fgsm_clamp_and_raw():
    x, grad = np.array([0.9, 0.1]), np.array([1.0, -1.0])
    assert fgsm_perturb(x, grad, 0.25).tolist() == [1.0, 0.0]
    np.testing.assert_allclose(fgsm_perturb(x, grad, 0.25, clamp=False), [1.15, -0.15])


def _sample(values, labels):
    return Sample(image=np.array(values, dtype=float).reshape(1, 1, -1), label=np.array([labels]), vendor="A", seed=0)


def test_mixup_endpoint():
    first, second = _sample([0.2, 0.4], [1, 2]), _sample([0.6, 0.8], [3, 0])
    image, soft = mixup(first, second, 1.0)
    np.testing.assert_array_equal(image, first.image)
    np.testing.assert_array_equal(soft, one_hot(first.label, 4))


def test_mixup_midpoint():
    first, second = _sample([0.2, 0.4], [1, 2]), _sample([0.6, 0.8], [3, 2])
    image, soft = mixup(first, second, 0.5)
    assert image[0, 0, 0] == pytest.approx(0.4)
    assert soft[:, 0, 0].tolist() == [0.0, 0.5, 0.0, 0.5]
    assert soft[:, 0, 1].tolist() == [0.0, 0.0, 1.0, 0.0]
    np.testing.assert_allclose(soft.sum(axis=0), 1.0)


def test_mixup_rejects_bad_weight_and_shapes():
    first = _sample([0.2, 0.4], [1, 2])
    with pytest.raises(ValueError):
        mixup(first, first, 1.5)
    with pytest.raises(ShapeError):
        mixup(first, _sample([0.2, 0.4, 0.6], [1, 2, 3]), 0.5)
