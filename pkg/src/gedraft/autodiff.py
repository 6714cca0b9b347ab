"""Minimal dense-tensor reverse-mode differentiation engine.

Double precision throughout. The operator set is exactly what the model
needs: elementwise arithmetic, matmul, the activations, temperature
softmax, layer norm, concat/gather, axis reductions, and MSE loss.

Broadcasting is limited to bias addition over the last axis and leading
batch dimensions in matmul/elementwise ops; gradients of broadcast
operands are summed back to their shape. Anything else is a shape error.
"""

from __future__ import annotations

import numpy as np


class ShapeError(ValueError):
    pass


def _check_broadcast(sa, sb):
    try:
        return np.broadcast_shapes(sa, sb)
    except ValueError:
        raise ShapeError(f"incompatible shapes {sa} and {sb}")


def _unbroadcast(grad: np.ndarray, shape) -> np.ndarray:
    """Sum grad over the axes that were broadcast to reach its shape."""
    if grad.shape == tuple(shape):
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


class Tensor:
    __slots__ = ("values", "requires_grad", "grad", "_parents")

    def __init__(self, values, requires_grad=False):
        self.values = np.asarray(values, dtype=np.float64)
        self.requires_grad = bool(requires_grad)
        self.grad = None
        self._parents = ()  # tuple of (Tensor, grad_fn)

    @property
    def shape(self):
        return self.values.shape

    @property
    def ndim(self):
        return self.values.ndim

    def __repr__(self):
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    def zero_grad(self):
        self.grad = None

    def detach(self) -> "Tensor":
        return Tensor(self.values.copy())

    # operator sugar used throughout the model code
    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __matmul__(self, other):
        return matmul(self, other)

    def __neg__(self):
        return scalar_mul(self, -1.0)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _make(values, parents):
    parents = tuple((p, fn) for p, fn in parents)
    out = Tensor(values, requires_grad=any(p.requires_grad for p, _ in parents))
    out._parents = parents
    return out


def backward(loss: Tensor) -> None:
    """Accumulate d(loss)/d(tensor) into .grad of reachable tensors."""
    if loss.shape != ():
        raise ShapeError(f"backward root must be scalar, got shape {loss.shape}")
    order: list[Tensor] = []
    seen = set()

    def visit(t: Tensor):
        stack = [(t, iter(t._parents))]
        seen.add(id(t))
        while stack:
            node, it = stack[-1]
            advanced = False
            for parent, _ in it:
                if id(parent) not in seen:
                    seen.add(id(parent))
                    stack.append((parent, iter(parent._parents)))
                    advanced = True
                    break
            if not advanced:
                order.append(node)
                stack.pop()

    visit(loss)
    grads: dict[int, np.ndarray] = {id(loss): np.ones(())}
    for node in reversed(order):
        g = grads.pop(id(node), None)
        if g is None:
            continue
        if node.requires_grad:
            if node.grad is None:
                node.grad = np.zeros(node.shape)
            node.grad = node.grad + g
        for parent, fn in node._parents:
            if not parent.requires_grad and not parent._parents:
                continue
            contrib = fn(g)
            key = id(parent)
            if key in grads:
                grads[key] = grads[key] + contrib
            else:
                grads[key] = contrib


# ---------------------------------------------------------------------------
# elementwise arithmetic


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a.shape, b.shape)
    return _make(
        a.values + b.values,
        [
            (a, lambda g: _unbroadcast(g, a.shape)),
            (b, lambda g: _unbroadcast(g, b.shape)),
        ],
    )


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a.shape, b.shape)
    return _make(
        a.values - b.values,
        [
            (a, lambda g: _unbroadcast(g, a.shape)),
            (b, lambda g: _unbroadcast(-g, b.shape)),
        ],
    )


def mul(a, b) -> Tensor:
    """Hadamard product (scalar operands broadcast)."""
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a.shape, b.shape)
    return _make(
        a.values * b.values,
        [
            (a, lambda g: _unbroadcast(g * b.values, a.shape)),
            (b, lambda g: _unbroadcast(g * a.values, b.shape)),
        ],
    )


def scalar_mul(a, c: float) -> Tensor:
    a = as_tensor(a)
    c = float(c)
    return _make(a.values * c, [(a, lambda g: g * c)])


# ---------------------------------------------------------------------------
# linear algebra and shaping


def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    av, bv = a.values, b.values
    try:
        out = np.matmul(av, bv)
    except ValueError:
        raise ShapeError(f"matmul shapes {a.shape} and {b.shape} incompatible")

    if av.ndim == 1 and bv.ndim == 1:
        parents = [
            (a, lambda g: g * bv),
            (b, lambda g: g * av),
        ]
    elif av.ndim == 1:
        # (n,) @ (..., n, k) -> (..., k)
        parents = [
            (a, lambda g: _unbroadcast(np.matmul(g[..., None, :], np.swapaxes(bv, -1, -2))[..., 0, :], a.shape)),
            (b, lambda g: _unbroadcast(av[:, None] * g[..., None, :], b.shape)),
        ]
    elif bv.ndim == 1:
        # (..., m, n) @ (n,) -> (..., m)
        parents = [
            (a, lambda g: _unbroadcast(g[..., :, None] * bv, a.shape)),
            (b, lambda g: _unbroadcast(np.matmul(np.swapaxes(av, -1, -2), g[..., :, None])[..., 0], b.shape)),
        ]
    else:
        parents = [
            (a, lambda g: _unbroadcast(np.matmul(g, np.swapaxes(bv, -1, -2)), a.shape)),
            (b, lambda g: _unbroadcast(np.matmul(np.swapaxes(av, -1, -2), g), b.shape)),
        ]
    return _make(out, parents)


def reshape(a, shape) -> Tensor:
    a = as_tensor(a)
    shape = tuple(shape)
    return _make(a.values.reshape(shape), [(a, lambda g: g.reshape(a.shape))])


def swapaxes(a, ax1: int, ax2: int) -> Tensor:
    a = as_tensor(a)
    return _make(
        np.swapaxes(a.values, ax1, ax2),
        [(a, lambda g: np.swapaxes(g, ax1, ax2))],
    )


def concat(tensors, axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    values = np.concatenate([t.values for t in tensors], axis=axis)
    parents = []
    offset = 0
    for t in tensors:
        size = t.shape[axis]
        start = offset

        def grad_fn(g, start=start, size=size):
            index = [slice(None)] * g.ndim
            index[axis] = slice(start, start + size)
            return g[tuple(index)]

        parents.append((t, grad_fn))
        offset += size
    return _make(values, parents)


def index_rows(a, idx) -> Tensor:
    """Gather rows along axis 0; gradient scatter-adds back."""
    a = as_tensor(a)
    idx = np.asarray(idx, dtype=np.intp)

    def grad_fn(g):
        out = np.zeros(a.shape)
        np.add.at(out, idx, g)
        return out

    return _make(a.values[idx], [(a, grad_fn)])


# ---------------------------------------------------------------------------
# nonlinearities


def absolute(a) -> Tensor:
    """Elementwise |x| with subgradient 0 at 0."""
    a = as_tensor(a)
    return _make(np.abs(a.values), [(a, lambda g: g * np.sign(a.values))])


def relu(a) -> Tensor:
    a = as_tensor(a)
    mask = a.values > 0
    return _make(a.values * mask, [(a, lambda g: g * mask)])


def tanh(a) -> Tensor:
    a = as_tensor(a)
    out = np.tanh(a.values)
    return _make(out, [(a, lambda g: g * (1.0 - out * out))])


def sigmoid(a) -> Tensor:
    a = as_tensor(a)
    out = 1.0 / (1.0 + np.exp(-a.values))
    return _make(out, [(a, lambda g: g * out * (1.0 - out))])


def exp(a) -> Tensor:
    a = as_tensor(a)
    out = np.exp(a.values)
    return _make(out, [(a, lambda g: g * out)])


def softmax_with_temperature(a, t: float = 1.0, axis: int = -1) -> Tensor:
    """softmax(x / t) along an axis; t must be a positive constant.

    A learnable temperature is handled upstream by scaling the logits with
    exp(-theta) before a t=1 softmax.
    """
    a = as_tensor(a)
    t = float(t)
    if t <= 0:
        raise ValueError(f"temperature must be > 0, got {t}")
    z = a.values / t
    z = z - z.max(axis=axis, keepdims=True)
    e = np.exp(z)
    s = e / e.sum(axis=axis, keepdims=True)

    def grad_fn(g):
        inner = (g * s).sum(axis=axis, keepdims=True)
        return (g - inner) * s / t

    return _make(s, [(a, grad_fn)])


def layer_norm(x, gain, bias, eps: float = 1e-5) -> Tensor:
    """Normalize over the last axis, then apply a learnable affine."""
    x, gain, bias = as_tensor(x), as_tensor(gain), as_tensor(bias)
    d = x.shape[-1]
    if gain.shape != (d,) or bias.shape != (d,):
        raise ShapeError(
            f"layer_norm affine shapes {gain.shape}/{bias.shape} "
            f"do not match feature dim {d}"
        )
    mu = x.values.mean(axis=-1, keepdims=True)
    var = x.values.var(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = (x.values - mu) * inv
    out = xhat * gain.values + bias.values

    def grad_x(g):
        dxhat = g * gain.values
        m1 = dxhat.mean(axis=-1, keepdims=True)
        m2 = (dxhat * xhat).mean(axis=-1, keepdims=True)
        return (dxhat - m1 - xhat * m2) * inv

    lead = tuple(range(x.ndim - 1))
    return _make(
        out,
        [
            (x, grad_x),
            (gain, lambda g: (g * xhat).sum(axis=lead)),
            (bias, lambda g: g.sum(axis=lead)),
        ],
    )


# ---------------------------------------------------------------------------
# reductions and loss


def _axis_tuple(axis, ndim):
    if axis is None:
        return tuple(range(ndim))
    if isinstance(axis, int):
        return (axis % ndim,)
    return tuple(a % ndim for a in axis)


def reduce_sum(a, axis=None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    axes = _axis_tuple(axis, a.ndim)

    def grad_fn(g):
        if not keepdims:
            g = np.expand_dims(g, axes)
        return np.broadcast_to(g, a.shape).copy()

    return _make(a.values.sum(axis=axes, keepdims=keepdims), [(a, grad_fn)])


def reduce_mean(a, axis=None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    axes = _axis_tuple(axis, a.ndim)
    count = int(np.prod([a.shape[ax] for ax in axes])) if axes else 1

    def grad_fn(g):
        if not keepdims:
            g = np.expand_dims(g, axes)
        return np.broadcast_to(g, a.shape) / count

    return _make(a.values.mean(axis=axes, keepdims=keepdims), [(a, grad_fn)])


def reduce_max(a, axis=None, keepdims: bool = False) -> Tensor:
    """Max over axes; the gradient flows to the first maximal index."""
    a = as_tensor(a)
    axes = _axis_tuple(axis, a.ndim)
    if len(axes) != 1 and len(axes) != a.ndim:
        raise ShapeError("reduce_max supports a single axis or all axes")
    if len(axes) == a.ndim:
        flat_idx = int(np.argmax(a.values))
        out = a.values.max()

        def grad_fn(g):
            res = np.zeros(a.shape)
            res.flat[flat_idx] = float(g)
            return res

        values = out if keepdims is False else np.full((1,) * a.ndim, out)
        return _make(values, [(a, grad_fn)])

    ax = axes[0]
    idx = np.argmax(a.values, axis=ax)
    out = a.values.max(axis=ax, keepdims=keepdims)

    def grad_fn(g):
        if not keepdims:
            g = np.expand_dims(g, ax)
        res = np.zeros(a.shape)
        np.put_along_axis(res, np.expand_dims(idx, ax), g, axis=ax)
        return res

    return _make(out, [(a, grad_fn)])


def mse_loss(pred, target) -> Tensor:
    pred, target = as_tensor(pred), as_tensor(target)
    if pred.shape != target.shape:
        raise ShapeError(f"mse_loss shapes differ: {pred.shape} vs {target.shape}")
    diff = pred.values - target.values
    n = diff.size if diff.size else 1

    return _make(
        np.asarray((diff * diff).mean() if diff.size else 0.0),
        [
            (pred, lambda g: g * 2.0 * diff / n),
            (target, lambda g: -g * 2.0 * diff / n),
        ],
    )
