import numpy as np
import pytest

from gedraft import autodiff as ad
from gedraft.autodiff import Tensor, backward
from gedraft.optim import Adam, grad_check


def test_adam_minimizes_quadratic():
    x = Tensor(np.array([5.0, -3.0]), requires_grad=True)
    opt = Adam({"x": x}, lr=0.05)
    for _ in range(500):
        opt.zero_grad()
        backward(ad.reduce_sum(ad.mul(x, x)))
        opt.step()
    assert np.abs(x.values).max() < 1e-3


def test_adam_first_step_size_is_lr():
    # with bias correction the first update has magnitude lr * sign(grad)
    x = Tensor(np.array([2.0]), requires_grad=True)
    opt = Adam({"x": x}, lr=0.1)
    backward(ad.reduce_sum(ad.mul(x, x)))
    opt.step()
    assert x.values[0] == pytest.approx(2.0 - 0.1, abs=1e-6)


def test_adam_skips_params_without_grad():
    x = Tensor(np.array([1.0]), requires_grad=True)
    y = Tensor(np.array([1.0]), requires_grad=True)
    opt = Adam({"x": x, "y": y}, lr=0.1)
    backward(ad.reduce_sum(ad.mul(x, x)))
    opt.step()
    assert y.values[0] == 1.0


def test_adam_state_roundtrip():
    x = Tensor(np.array([1.0, 2.0]), requires_grad=True)
    opt = Adam({"x": x}, lr=0.01)
    for _ in range(3):
        opt.zero_grad()
        backward(ad.reduce_sum(ad.mul(x, x)))
        opt.step()
    state = opt.state_dict()
    clone = Adam({"x": x}, lr=0.01)
    clone.load_state_dict(state)
    assert clone.step_count == 3
    assert np.array_equal(clone.m["x"], opt.m["x"])
    assert np.array_equal(clone.v["x"], opt.v["x"])


def test_zero_grad():
    x = Tensor(np.array([1.0]), requires_grad=True)
    opt = Adam({"x": x})
    backward(ad.reduce_sum(x))
    assert x.grad is not None
    opt.zero_grad()
    assert x.grad is None


def test_grad_check_passes_on_correct_gradient():
    x = Tensor(np.array([0.3, -0.7, 1.2]), requires_grad=True)
    assert grad_check(lambda x: ad.reduce_sum(ad.tanh(x)), [x]) < 1e-8


def test_grad_check_catches_wrong_gradient():
    x = Tensor(np.array([0.5, 1.5]), requires_grad=True)

    def wrong_square(t):
        out = ad.Tensor(t.values**2)
        out.requires_grad = True
        out._parents = ((t, lambda g: g),)  # should be g * 2x
        return out

    err = grad_check(lambda t: ad.reduce_sum(wrong_square(t)), [x])
    assert err > 1e-2


def test_grad_check_requires_grad_inputs():
    x = Tensor(np.array([1.0]))
    with pytest.raises(ValueError):
        grad_check(lambda t: ad.reduce_sum(t), [x])


def test_grad_check_requires_scalar_output():
    x = Tensor(np.array([1.0, 2.0]), requires_grad=True)
    with pytest.raises(ValueError):
        grad_check(lambda t: t, [x])
