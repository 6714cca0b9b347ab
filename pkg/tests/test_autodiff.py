import numpy as np
import pytest

from gedraft import autodiff as ad
from gedraft.autodiff import ShapeError, Tensor, backward
from gedraft.cli import _gradcheck_cases
from gedraft.optim import grad_check

TOL = 1e-4


@pytest.mark.parametrize("name", sorted(_gradcheck_cases()))
def test_operator_gradcheck(name):
    f, inputs = _gradcheck_cases()[name]
    assert grad_check(f, inputs) < TOL


def test_backward_requires_scalar_root():
    x = Tensor(np.ones(3), requires_grad=True)
    with pytest.raises(ShapeError):
        backward(ad.scalar_mul(x, 2.0))


def test_grad_accumulates_over_reuse():
    x = Tensor(np.array(3.0), requires_grad=True)
    y = ad.add(ad.mul(x, x), x)  # x^2 + x, dy/dx = 2x + 1
    backward(y)
    assert float(x.grad) == 7.0


def test_grad_accumulates_over_multiple_backwards():
    x = Tensor(np.array(2.0), requires_grad=True)
    backward(ad.mul(x, x))
    backward(ad.mul(x, x))
    assert float(x.grad) == 8.0


def test_bias_broadcast_unbroadcasts_gradient():
    x = Tensor(np.ones((4, 3)), requires_grad=True)
    b = Tensor(np.zeros(3), requires_grad=True)
    backward(ad.reduce_sum(ad.add(x, b)))
    assert b.grad.shape == (3,)
    assert np.array_equal(b.grad, np.full(3, 4.0))


def test_batched_matmul_broadcast_gradient():
    a = Tensor(np.random.default_rng(0).normal(size=(5, 3, 4)), requires_grad=True)
    w = Tensor(np.random.default_rng(1).normal(size=(4, 2)), requires_grad=True)
    assert grad_check(lambda a, w: ad.reduce_sum(ad.tanh(ad.matmul(a, w))), [a, w]) < TOL


def test_incompatible_shapes_raise():
    with pytest.raises(ShapeError):
        ad.add(Tensor(np.ones((2, 3))), Tensor(np.ones((4, 5))))
    with pytest.raises(ShapeError):
        ad.matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((2, 3))))
    with pytest.raises(ShapeError):
        ad.mse_loss(Tensor(np.ones(3)), Tensor(np.ones(4)))
    with pytest.raises(ShapeError):
        ad.layer_norm(Tensor(np.ones((2, 4))), Tensor(np.ones(3)), Tensor(np.zeros(3)))


def test_abs_subgradient_zero_at_zero():
    x = Tensor(np.array([0.0, -2.0, 3.0]), requires_grad=True)
    backward(ad.reduce_sum(ad.absolute(x)))
    assert np.array_equal(x.grad, [0.0, -1.0, 1.0])


def test_reduce_max_routes_gradient_to_first_argmax():
    x = Tensor(np.array([[1.0, 5.0, 5.0], [7.0, 2.0, 7.0]]), requires_grad=True)
    backward(ad.reduce_sum(ad.reduce_max(x, axis=1)))
    assert np.array_equal(x.grad, [[0, 1, 0], [1, 0, 0]])


def test_softmax_temperature_limits():
    logits = Tensor(np.array([2.0, 1.0, 0.0]))
    hot = ad.softmax_with_temperature(logits, 1e-6).values
    assert hot[0] == pytest.approx(1.0, abs=1e-9)
    cold = ad.softmax_with_temperature(logits, 1e6).values
    assert np.allclose(cold, 1 / 3, atol=1e-6)
    with pytest.raises(ValueError):
        ad.softmax_with_temperature(logits, 0.0)


def test_softmax_rows_sum_to_one():
    x = Tensor(np.random.default_rng(3).normal(size=(4, 6)) * 30)
    s = ad.softmax_with_temperature(x, 0.5, axis=-1).values
    assert np.allclose(s.sum(axis=-1), 1.0, atol=1e-12)
    assert (s > 0).all()


def test_layer_norm_statistics():
    x = Tensor(np.random.default_rng(5).normal(size=(7, 9)) * 4 + 2)
    out = ad.layer_norm(x, Tensor(np.ones(9)), Tensor(np.zeros(9))).values
    assert np.allclose(out.mean(axis=-1), 0.0, atol=1e-12)
    assert np.allclose(out.var(axis=-1), 1.0, atol=1e-4)  # eps-limited


def test_index_rows_gather_and_scatter():
    x = Tensor(np.arange(12.0).reshape(4, 3), requires_grad=True)
    out = ad.index_rows(x, [2, 0, 2])
    assert np.array_equal(out.values, x.values[[2, 0, 2]])
    backward(ad.reduce_sum(out))
    assert np.array_equal(x.grad, [[1, 1, 1], [0, 0, 0], [2, 2, 2], [0, 0, 0]])


def test_concat_gradient_splits():
    a = Tensor(np.ones(2), requires_grad=True)
    b = Tensor(np.ones(3), requires_grad=True)
    backward(ad.reduce_sum(ad.scalar_mul(ad.concat([a, b]), 2.0)))
    assert np.array_equal(a.grad, [2, 2])
    assert np.array_equal(b.grad, [2, 2, 2])


def test_operator_sugar_matches_functions():
    a = Tensor(np.array([1.0, 2.0]), requires_grad=True)
    b = Tensor(np.array([3.0, 4.0]))
    assert np.array_equal((a + b).values, [4, 6])
    assert np.array_equal((a - b).values, [-2, -2])
    assert np.array_equal((a * b).values, [3, 8])
    assert np.array_equal((-a).values, [-1, -2])
    assert float((a @ b).values) == 11.0


def test_detach_blocks_gradient():
    x = Tensor(np.array(2.0), requires_grad=True)
    y = x.detach()
    assert not y.requires_grad and not y._parents


def test_constant_leaves_get_no_grad():
    c = Tensor(np.ones(3))
    x = Tensor(np.ones(3), requires_grad=True)
    backward(ad.reduce_sum(ad.mul(c, x)))
    assert c.grad is None


def test_mse_loss_value():
    loss = ad.mse_loss(Tensor(np.array([1.0, 2.0])), Tensor(np.array([0.0, 4.0])))
    assert float(loss.values) == 2.5


def test_deep_graph_backward_is_iterative():
    x = Tensor(np.array(1.0), requires_grad=True)
    y = x
    for _ in range(5000):
        y = ad.add(y, x)
    backward(y)  # must not hit the recursion limit
    assert float(x.grad) == 5001.0
