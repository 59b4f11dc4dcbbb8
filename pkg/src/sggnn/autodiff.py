"""Minimal reverse-mode automatic differentiation over numpy arrays.

Only the handful of operations the GNN models need are provided. Graph
operators enter as constants (dense or scipy.sparse) via :func:`spmm`.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp


class Tensor:
    __slots__ = ("value", "grad", "_parents", "_backward", "requires_grad")

    def __init__(self, value, parents=(), backward=None, requires_grad=False):
        self.value = np.asarray(value, dtype=np.float64)
        self.grad = None
        self._parents = parents
        self._backward = backward
        self.requires_grad = requires_grad or any(p.requires_grad for p in parents)

    @property
    def shape(self):
        return self.value.shape

    def __repr__(self):
        return f"Tensor(shape={self.value.shape}, requires_grad={self.requires_grad})"

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __matmul__(self, other):
        return matmul(self, other)

    def backward(self):
        """Accumulate d(self)/d(leaf) into ``.grad`` of every leaf reachable from self."""
        if self.value.size != 1:
            raise ValueError("backward() needs a scalar output")
        order, seen = [], set()
        stack = [(self, False)]
        while stack:
            node, done = stack.pop()
            if done:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if p.requires_grad and id(p) not in seen:
                    stack.append((p, False))
        for node in order:
            node.grad = None
        self.grad = np.ones_like(self.value)
        for node in reversed(order):
            if node._backward is not None and node.grad is not None:
                for parent, g in zip(node._parents, node._backward(node.grad)):
                    if parent.requires_grad and g is not None:
                        parent.grad = g if parent.grad is None else parent.grad + g


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def param(value) -> Tensor:
    return Tensor(np.array(value, dtype=np.float64), requires_grad=True)


def _unbroadcast(g, shape):
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for ax, n in enumerate(shape):
        if n == 1 and g.shape[ax] != 1:
            g = g.sum(axis=ax, keepdims=True)
    return g


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    return Tensor(a.value + b.value, (a, b),
                  lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)))


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    return Tensor(a.value * b.value, (a, b),
                  lambda g: (_unbroadcast(g * b.value, a.shape), _unbroadcast(g * a.value, b.shape)))


def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    return Tensor(a.value @ b.value, (a, b), lambda g: (g @ b.value.T, a.value.T @ g))


def spmm(op, x, symmetric=False) -> Tensor:
    """Constant operator (dense or sparse) times a tensor.

    ``symmetric=True`` promises op == op.T and skips forming the transpose.
    """
    x = as_tensor(x)
    out = op @ x.value

    def back(g):
        if symmetric:
            return (np.asarray(op @ g),)
        op_t = op.T.tocsr() if sp.issparse(op) else np.asarray(op).T
        return (np.asarray(op_t @ g),)

    return Tensor(np.asarray(out), (x,), back)


def relu(x) -> Tensor:
    x = as_tensor(x)
    mask = x.value > 0
    return Tensor(np.where(mask, x.value, 0.0), (x,), lambda g: (g * mask,))


def identity(x) -> Tensor:
    return as_tensor(x)


ACTIVATIONS = {"relu": relu, "identity": identity}


def concat(xs, axis=1) -> Tensor:
    xs = [as_tensor(x) for x in xs]
    splits = np.cumsum([x.shape[axis] for x in xs])[:-1]
    return Tensor(np.concatenate([x.value for x in xs], axis=axis), tuple(xs),
                  lambda g: tuple(np.split(g, splits, axis=axis)))


def column(x, j) -> Tensor:
    """Column j of a 2-D tensor, kept as (N, 1)."""
    x = as_tensor(x)

    def back(g):
        out = np.zeros_like(x.value)
        out[:, j:j + 1] = g
        return (out,)

    return Tensor(x.value[:, j:j + 1], (x,), back)


def item(x, j) -> Tensor:
    x = as_tensor(x)

    def back(g):
        out = np.zeros_like(x.value)
        out[j] = g
        return (out,)

    return Tensor(x.value[j], (x,), back)


def softmax(x, axis=-1) -> Tensor:
    x = as_tensor(x)
    z = x.value - x.value.max(axis=axis, keepdims=True)
    e = np.exp(z)
    s = e / e.sum(axis=axis, keepdims=True)
    return Tensor(s, (x,), lambda g: (s * (g - (g * s).sum(axis=axis, keepdims=True)),))


def cross_entropy(logits, labels, mask=None) -> Tensor:
    """Mean negative log-likelihood of ``labels`` under softmax(logits) over masked rows."""
    logits = as_tensor(logits)
    labels = np.asarray(labels)
    rows = np.arange(len(labels)) if mask is None else np.flatnonzero(mask)
    z = logits.value[rows]
    z = z - z.max(axis=1, keepdims=True)
    logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    m = len(rows)
    loss = -logp[np.arange(m), labels[rows]].mean()

    def back(g):
        p = np.exp(logp)
        p[np.arange(m), labels[rows]] -= 1.0
        out = np.zeros_like(logits.value)
        out[rows] = g * p / m
        return (out,)

    return Tensor(loss, (logits,), back)


def sum_squares(xs) -> Tensor:
    xs = [as_tensor(x) for x in xs]
    total = sum(float((x.value ** 2).sum()) for x in xs)
    return Tensor(total, tuple(xs), lambda g: tuple(2.0 * g * x.value for x in xs))


def scale(x, c: float) -> Tensor:
    x = as_tensor(x)
    return Tensor(c * x.value, (x,), lambda g: (c * g,))
