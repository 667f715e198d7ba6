"""Adam and SGD-momentum updates."""

import numpy as np
import pytest

from src.config.settings import UNetConfig
from src.segnet.optim import (
    adam_step,
    clip_grad_norm,
    init_adam,
    init_sgd_momentum,
    optimizer_step,
    sgd_momentum_step,
)
from src.segnet.unet import UNetModel


def scalar_model(value: float = 1.0) -> UNetModel:
    return UNetModel(config=UNetConfig(), params={"w": np.array([value])})


def quadratic_grad(model: UNetModel, target: np.ndarray):
    w = model.params["w"]
    return 0.5 * float(np.sum((w - target) ** 2)), {"w": w - target}


def test_adam_first_step():
    model = scalar_model()
    updated, opt = adam_step(model, {"w": np.array([1.0])}, init_adam(model, lr=1e-3))
    assert updated.params["w"][0] == pytest.approx(0.999, abs=1e-6)
    assert opt.step == 1
    assert model.params["w"][0] == 1.0  # input untouched


def test_adam_zero_gradient_leaves_parameters():
    model = scalar_model(0.3)
    updated, _ = adam_step(model, {"w": np.array([0.0])}, init_adam(model))
    assert updated.params["w"][0] == 0.3


def test_adam_is_deterministic():
    model = scalar_model()
    opt = init_adam(model)
    grads = {"w": np.array([0.7])}
    first, first_opt = adam_step(model, grads, opt)
    second, second_opt = adam_step(model, grads, opt)
    assert first.params["w"].tobytes() == second.params["w"].tobytes()
    assert first_opt.buffers["v"]["w"].tobytes() == second_opt.buffers["v"]["w"].tobytes()


def test_plain_sgd_when_momentum_zero():
    model = scalar_model()
    updated, _ = sgd_momentum_step(model, {"w": np.array([2.0])}, init_sgd_momentum(model, lr=0.1, momentum=0.0))
    assert updated.params["w"][0] == pytest.approx(0.8)


def test_momentum_recurrence():
    model = scalar_model()
    opt = init_sgd_momentum(model, lr=0.1, momentum=0.9)
    grads = {"w": np.array([1.0])}
    model, opt = sgd_momentum_step(model, grads, opt)
    assert model.params["w"][0] == pytest.approx(0.9)
    model, opt = sgd_momentum_step(model, grads, opt)
    assert model.params["w"][0] == pytest.approx(0.71)
    assert opt.buffers["velocity"]["w"][0] == pytest.approx(1.9)


def test_sgd_zero_gradient_and_velocity():
    model = scalar_model(0.4)
    updated, _ = sgd_momentum_step(model, {"w": np.array([0.0])}, init_sgd_momentum(model))
    assert updated.params["w"][0] == 0.4


def test_missing_gradient_rejected():
    model = scalar_model()
    with pytest.raises(KeyError):
        adam_step(model, {}, init_adam(model))
    with pytest.raises(KeyError):
        sgd_momentum_step(model, {"v": np.array([1.0])}, init_sgd_momentum(model))


def test_wrong_state_kind_rejected():
    model = scalar_model()
    with pytest.raises(ValueError):
        adam_step(model, {"w": np.array([1.0])}, init_sgd_momentum(model))


def test_adam_descends_quadratic_every_step():
    target = np.array([0.0, 0.0])
    model = UNetModel(config=UNetConfig(), params={"w": np.array([3.0, -2.0])})
    opt = init_adam(model, lr=1e-2)
    loss, grads = quadratic_grad(model, target)
    for _ in range(100):
        model, opt = optimizer_step(model, grads, opt)
        new_loss, grads = quadratic_grad(model, target)
        assert new_loss < loss
        loss = new_loss


def test_sgd_momentum_descends_quadratic():
    target = np.array([1.0, -1.0])
    model = UNetModel(config=UNetConfig(), params={"w": np.array([3.0, 2.0])})
    opt = init_sgd_momentum(model, lr=1e-2, momentum=0.9)
    initial, grads = quadratic_grad(model, target)
    for _ in range(100):
        model, opt = optimizer_step(model, grads, opt)
        loss, grads = quadratic_grad(model, target)
    assert loss < 0.1 * initial


def test_buffers_mirror_parameters(tiny_model):
    opt = init_adam(tiny_model)
    for slot in ("m", "v"):
        assert {k: v.shape for k, v in opt.buffers[slot].items()} == {k: v.shape for k, v in tiny_model.params.items()}


def test_clip_grad_norm_rescales_large_gradients():
    grads = {"a": np.array([3.0]), "b": np.array([[4.0, 0.0]])}
    clipped, norm = clip_grad_norm(grads, 1.0)
    assert norm == pytest.approx(5.0)
    np.testing.assert_allclose(clipped["a"], [0.6])
    np.testing.assert_allclose(clipped["b"], [[0.8, 0.0]])
    assert grads["a"][0] == 3.0  # input untouched


def test_clip_grad_norm_keeps_small_gradients():
    grads = {"w": np.array([0.3, -0.4])}
    clipped, norm = clip_grad_norm(grads, 1.0)
    assert norm == pytest.approx(0.5)
    assert clipped is grads
    assert clip_grad_norm(grads, None)[0] is grads


def test_clipped_sgd_step_is_bounded():
    model = scalar_model()
    opt = init_sgd_momentum(model, lr=0.1, momentum=0.9)
    spike = {"w": np.array([92.0])}
    updated, opt = optimizer_step(model, spike, opt, clip_norm=1.0)
    assert updated.params["w"][0] == pytest.approx(0.9)
    assert opt.buffers["velocity"]["w"][0] == pytest.approx(1.0)


def test_unclipped_step_matches_plain_sgd():
    model = scalar_model()
    opt = init_sgd_momentum(model, lr=0.1, momentum=0.9)
    grads = {"w": np.array([1.0])}
    plain, _ = sgd_momentum_step(model, grads, opt)
    dispatched, _ = optimizer_step(model, grads, opt, clip_norm=None)
    assert plain.params["w"].tobytes() == dispatched.params["w"].tobytes()
