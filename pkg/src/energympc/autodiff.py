"""Reverse-mode automatic differentiation over dense float64 arrays.

A small define-by-run tape sufficient for feedforward networks and for
losses that contain input gradients of a network. Every backward rule is
itself built from taped primitives, so the output of :func:`grad` is again
a differentiable graph node; differentiating twice yields exact second-order
(double-backpropagation) gradients.

Only the operations needed by this library are provided: elementwise
arithmetic, 2-D matmul, reductions, smooth activations, `atan2`, last-axis
slicing/concatenation, and `stop_gradient`. All values are float64.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import ContractError, NumericError, ShapeError

__all__ = [
    "Tensor",
    "tensor",
    "add",
    "sub",
    "mul",
    "div",
    "neg",
    "matmul",
    "transpose",
    "reshape",
    "broadcast_to",
    "asum",
    "amean",
    "exp",
    "log",
    "sigmoid",
    "softplus",
    "tanh",
    "power",
    "square",
    "atan2",
    "concat",
    "narrow",
    "pad_last",
    "stop_gradient",
    "grad",
    "check_finite",
]


def check_finite(value: np.ndarray, context: str) -> np.ndarray:
    """Explicit NaN/Inf guard; raises NumericError naming the offending context."""
    if not np.all(np.isfinite(value)):
        raise NumericError(f"non-finite values in {context}")
    return value


class Tensor:
    """A node in the computation graph.

    `value` is the eagerly computed float64 array. `parents` are the input
    nodes and `vjp` maps an incoming gradient node to gradient nodes for each
    parent (None for parents that do not receive gradient).
    """

    __slots__ = ("value", "parents", "vjp")

    def __init__(self, value, parents=(), vjp=None):
        self.value = np.asarray(value, dtype=np.float64)
        self.parents = parents
        self.vjp = vjp

    @property
    def shape(self):
        return self.value.shape

    @property
    def ndim(self):
        return self.value.ndim

    @property
    def size(self):
        return self.value.size

    def item(self) -> float:
        return float(self.value)

    def __repr__(self):
        return f"Tensor(shape={self.value.shape}, leaf={self.vjp is None})"

    # Arithmetic operators delegate to the module-level ops so that every
    # expression stays on the tape.
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, p):
        return power(self, p)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, key):
        # Supports x[..., i] and x[..., a:b] (last-axis selection only).
        if isinstance(key, tuple) and len(key) == 2 and key[0] is Ellipsis:
            sel = key[1]
            width = self.value.shape[-1]
            if isinstance(sel, int):
                if not -width <= sel < width:
                    raise ShapeError(f"index {sel} out of range for width {width}")
                sel = sel % width
                out = narrow(self, sel, sel + 1)
                return reshape(out, out.value.shape[:-1])
            if isinstance(sel, slice):
                start, stop, step = sel.indices(width)
                if step != 1:
                    raise ShapeError("strided slicing is not supported")
                return narrow(self, start, stop)
        raise ShapeError("Tensor indexing supports only [..., int] and [..., a:b]")


def tensor(x) -> Tensor:
    """Wrap `x` as a leaf node (no-op if already a Tensor)."""
    return x if isinstance(x, Tensor) else Tensor(x)


def _unbroadcast(g: Tensor, shape: tuple) -> Tensor:
    """Reduce gradient `g` back to `shape` after numpy broadcasting."""
    while g.ndim > len(shape):
        g = asum(g, axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and g.shape[axis] != 1:
            g = asum(g, axis=axis, keepdims=True)
    if g.shape != tuple(shape):
        g = reshape(g, shape)
    return g


def add(a, b) -> Tensor:
    a, b = tensor(a), tensor(b)
    out = Tensor(a.value + b.value, (a, b))
    out.vjp = lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape))
    return out


def sub(a, b) -> Tensor:
    a, b = tensor(a), tensor(b)
    out = Tensor(a.value - b.value, (a, b))
    out.vjp = lambda g: (_unbroadcast(g, a.shape), _unbroadcast(neg(g), b.shape))
    return out


def mul(a, b) -> Tensor:
    a, b = tensor(a), tensor(b)
    out = Tensor(a.value * b.value, (a, b))
    out.vjp = lambda g: (_unbroadcast(mul(g, b), a.shape), _unbroadcast(mul(g, a), b.shape))
    return out


def div(a, b) -> Tensor:
    a, b = tensor(a), tensor(b)
    out = Tensor(a.value / b.value, (a, b))

    def vjp(g):
        ga = _unbroadcast(div(g, b), a.shape)
        gb = _unbroadcast(neg(div(mul(g, a), mul(b, b))), b.shape)
        return ga, gb

    out.vjp = vjp
    return out


def neg(a) -> Tensor:
    a = tensor(a)
    out = Tensor(-a.value, (a,))
    out.vjp = lambda g: (neg(g),)
    return out


def matmul(a, b) -> Tensor:
    a, b = tensor(a), tensor(b)
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError(f"matmul expects 2-D operands, got {a.shape} @ {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul dimension mismatch: {a.shape} @ {b.shape}")
    out = Tensor(a.value @ b.value, (a, b))
    out.vjp = lambda g: (matmul(g, transpose(b)), matmul(transpose(a), g))
    return out


def transpose(a) -> Tensor:
    a = tensor(a)
    if a.ndim != 2:
        raise ShapeError("transpose expects a 2-D operand")
    out = Tensor(a.value.T.copy(), (a,))
    out.vjp = lambda g: (transpose(g),)
    return out


def reshape(a, shape) -> Tensor:
    a = tensor(a)
    shape = tuple(shape)
    out = Tensor(a.value.reshape(shape), (a,))
    out.vjp = lambda g: (reshape(g, a.shape),)
    return out


def broadcast_to(a, shape) -> Tensor:
    a = tensor(a)
    shape = tuple(shape)
    out = Tensor(np.broadcast_to(a.value, shape).copy(), (a,))
    out.vjp = lambda g: (_unbroadcast(g, a.shape),)
    return out


def asum(a, axis=None, keepdims=False) -> Tensor:
    a = tensor(a)
    out = Tensor(np.sum(a.value, axis=axis, keepdims=keepdims), (a,))

    def vjp(g):
        if axis is None:
            return (broadcast_to(reshape(g, (1,) * a.ndim), a.shape),)
        if keepdims:
            return (broadcast_to(g, a.shape),)
        kept = list(a.shape)
        kept[axis] = 1
        return (broadcast_to(reshape(g, kept), a.shape),)

    out.vjp = vjp
    return out


def amean(a, axis=None) -> Tensor:
    a = tensor(a)
    n = a.size if axis is None else a.shape[axis]
    return mul(asum(a, axis=axis), Tensor(1.0 / n))


def exp(a) -> Tensor:
    a = tensor(a)
    out = Tensor(np.exp(a.value), (a,))
    out.vjp = lambda g: (mul(g, out),)
    return out


def log(a) -> Tensor:
    a = tensor(a)
    out = Tensor(np.log(a.value), (a,))
    out.vjp = lambda g: (div(g, a),)
    return out


def sigmoid(a) -> Tensor:
    a = tensor(a)
    # Stable logistic: exp only ever sees non-positive arguments.
    x = a.value
    val = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))), np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))
    out = Tensor(val, (a,))
    out.vjp = lambda g: (mul(g, mul(out, sub(Tensor(1.0), out))),)
    return out


def softplus(a) -> Tensor:
    a = tensor(a)
    out = Tensor(np.logaddexp(0.0, a.value), (a,))
    out.vjp = lambda g: (mul(g, sigmoid(a)),)
    return out


def tanh(a) -> Tensor:
    a = tensor(a)
    out = Tensor(np.tanh(a.value), (a,))
    out.vjp = lambda g: (mul(g, sub(Tensor(1.0), mul(out, out))),)
    return out


def power(a, p) -> Tensor:
    """Elementwise a**p for a constant exponent p."""
    a = tensor(a)
    p = float(p)
    out = Tensor(a.value ** p, (a,))
    out.vjp = lambda g: (mul(g, mul(Tensor(p), power(a, p - 1.0))),)
    return out


def square(a) -> Tensor:
    a = tensor(a)
    return mul(a, a)


def atan2(y, x):
    """Four-quadrant arctangent; numpy fast path when neither input is taped."""
    if not isinstance(y, Tensor) and not isinstance(x, Tensor):
        return np.arctan2(y, x)
    y, x = tensor(y), tensor(x)
    out = Tensor(np.arctan2(y.value, x.value), (y, x))

    def vjp(g):
        denom = add(mul(x, x), mul(y, y))
        gy = _unbroadcast(div(mul(g, x), denom), y.shape)
        gx = _unbroadcast(neg(div(mul(g, y), denom)), x.shape)
        return gy, gx

    out.vjp = vjp
    return out


def concat(parts: Sequence, axis: int = -1) -> Tensor:
    if axis != -1:
        raise ShapeError("concat supports only the last axis")
    parts = [tensor(p) for p in parts]
    widths = [p.shape[-1] for p in parts]
    out = Tensor(np.concatenate([p.value for p in parts], axis=-1), tuple(parts))

    def vjp(g):
        grads, start = [], 0
        for w in widths:
            grads.append(narrow(g, start, start + w))
            start += w
        return tuple(grads)

    out.vjp = vjp
    return out


def narrow(a, start: int, stop: int) -> Tensor:
    """Select columns [start:stop) of the last axis."""
    a = tensor(a)
    total = a.shape[-1]
    out = Tensor(a.value[..., start:stop].copy(), (a,))
    out.vjp = lambda g: (pad_last(g, start, total),)
    return out


def pad_last(a, start: int, total: int) -> Tensor:
    """Embed `a` into a zero array of last-axis width `total` at offset `start`."""
    a = tensor(a)
    width = a.shape[-1]
    val = np.zeros(a.shape[:-1] + (total,), dtype=np.float64)
    val[..., start : start + width] = a.value
    out = Tensor(val, (a,))
    out.vjp = lambda g: (narrow(g, start, start + width),)
    return out


def stop_gradient(a) -> Tensor:
    """Value passthrough that blocks gradient flow."""
    return Tensor(tensor(a).value, (), None)


def _topo_order(root: Tensor) -> list:
    """Iterative post-order over the graph reachable from `root`."""
    order, visited, stack = [], set(), [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for p in node.parents:
            if id(p) not in visited:
                stack.append((p, False))
    return order


def grad(output: Tensor, wrt: Iterable[Tensor], check: bool = True) -> list:
    """Gradients of a scalar `output` with respect to each node in `wrt`.

    The returned gradients are graph nodes, so they can themselves be
    differentiated (double backpropagation). Nodes in `wrt` that the output
    does not depend on receive a zero gradient of matching shape.
    """
    wrt = list(wrt)
    if output.size != 1:
        raise ContractError(f"grad requires a scalar output, got shape {output.shape}")
    if check:
        check_finite(output.value, "grad output")

    grads: dict[int, Tensor] = {id(output): broadcast_to(Tensor(1.0), output.shape)}
    for node in reversed(_topo_order(output)):
        g = grads.get(id(node))
        if g is None or node.vjp is None:
            continue
        for parent, pg in zip(node.parents, node.vjp(g)):
            if pg is None:
                continue
            prev = grads.get(id(parent))
            grads[id(parent)] = pg if prev is None else add(prev, pg)

    return [grads.get(id(w)) or Tensor(np.zeros(w.shape)) for w in wrt]
