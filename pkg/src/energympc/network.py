"""Feedforward networks: parameters, evaluation, gradients, and Adam.

Two evaluation paths share the same parameters. `forward` is a plain numpy
pass used in hot loops (planning, metrics). `forward_graph` runs on the
autodiff tape and is used by training losses; combined with
:func:`input_gradient_graph` it supports losses that contain input gradients
of the network, whose parameter gradients require double backpropagation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import ContractError, NumericError, ShapeError

# "square" exists mainly to compose exact polynomial networks (quadratic
# energies and the like); training defaults to softplus, which is C-infinity
# and has non-vanishing curvature everywhere.
ACTIVATIONS = ("identity", "softplus", "tanh", "square")

_NP_ACT = {
    "identity": lambda x: x,
    "softplus": lambda x: np.logaddexp(0.0, x),
    "tanh": np.tanh,
    "square": lambda x: x * x,
}

_GRAPH_ACT = {
    "identity": lambda x: x,
    "softplus": ad.softplus,
    "tanh": ad.tanh,
    "square": ad.square,
}


@dataclass
class Layer:
    """One affine layer. W has shape (fan_out, fan_in); b has shape (fan_out,)."""

    W: np.ndarray
    b: np.ndarray
    activation: str = "identity"


@dataclass
class NetworkParams:
    """Weights of a feedforward network; consecutive layer dimensions chain."""

    layers: List[Layer]

    @property
    def in_dim(self) -> int:
        return self.layers[0].W.shape[1]

    @property
    def out_dim(self) -> int:
        return self.layers[-1].W.shape[0]

    def validate(self) -> "NetworkParams":
        prev = None
        for i, layer in enumerate(self.layers):
            if layer.activation not in ACTIVATIONS:
                raise ContractError(f"layer {i}: unknown activation {layer.activation!r}")
            if layer.W.ndim != 2 or layer.b.shape != (layer.W.shape[0],):
                raise ShapeError(f"layer {i}: W {layer.W.shape} / b {layer.b.shape} malformed")
            if prev is not None and layer.W.shape[1] != prev:
                raise ShapeError(f"layer {i}: fan_in {layer.W.shape[1]} != previous fan_out {prev}")
            if not (np.all(np.isfinite(layer.W)) and np.all(np.isfinite(layer.b))):
                raise NumericError(f"layer {i}: non-finite weights")
            prev = layer.W.shape[0]
        return self

    def copy(self) -> "NetworkParams":
        return NetworkParams([Layer(l.W.copy(), l.b.copy(), l.activation) for l in self.layers])


def init_mlp(
    sizes: Sequence[int],
    rng: np.random.Generator,
    hidden_activation: str = "softplus",
    final_activation: str = "identity",
) -> NetworkParams:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases."""
    if len(sizes) < 2:
        raise ShapeError("need at least an input and an output size")
    layers = []
    for i, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
        bound = 1.0 / np.sqrt(fan_in)
        W = rng.uniform(-bound, bound, size=(fan_out, fan_in))
        act = final_activation if i == len(sizes) - 2 else hidden_activation
        layers.append(Layer(W, np.zeros(fan_out), act))
    return NetworkParams(layers).validate()


def forward(params: NetworkParams, x: np.ndarray, check: bool = True) -> np.ndarray:
    """Plain numpy forward pass; accepts (d,) or (batch, d) inputs."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    h = x[None, :] if single else x
    if h.shape[-1] != params.in_dim:
        raise ShapeError(f"input width {h.shape[-1]} != network fan_in {params.in_dim}")
    if check and not np.all(np.isfinite(h)):
        raise NumericError("non-finite network input")
    with np.errstate(over="ignore", invalid="ignore"):
        for i, layer in enumerate(params.layers):
            h = h @ layer.W.T + layer.b
            h = _NP_ACT[layer.activation](h)
            if check and not np.all(np.isfinite(h)):
                raise NumericError(f"non-finite activation at layer {i}")
    return h[0] if single else h


def lift(params: NetworkParams) -> List[tuple]:
    """Wrap each layer's arrays as tape leaves: [(W, b, activation), ...]."""
    return [(Tensor(l.W), Tensor(l.b), l.activation) for l in params.layers]


def leaves(lifted: List[tuple]) -> List[Tensor]:
    out = []
    for W, b, _ in lifted:
        out.extend((W, b))
    return out


def forward_graph(lifted: List[tuple], x: Tensor) -> Tensor:
    """Taped forward pass over lifted parameters; x must be 2-D (batch, d)."""
    h = x
    for W, b, act in lifted:
        h = ad.add(ad.matmul(h, ad.transpose(W)), b)
        h = _GRAPH_ACT[act](h)
    return h


def input_gradient_graph(lifted: List[tuple], x: Tensor) -> Tensor:
    """Per-row gradient of the scalar network output w.r.t. the input rows.

    Requires fan_out == 1. Rows are independent, so the gradient of the
    summed outputs equals the stacked per-row input gradients. The result is
    a graph node and remains differentiable w.r.t. the lifted parameters.
    """
    out = forward_graph(lifted, x)
    if out.shape[-1] != 1:
        raise ContractError(f"input gradient requires scalar network output, got width {out.shape[-1]}")
    return ad.grad(ad.asum(out), [x])[0]


def input_gradient(params: NetworkParams, x: np.ndarray, check: bool = True) -> np.ndarray:
    """d(scalar output)/d(input); same shape as x. Numpy in, numpy out."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    x2 = x[None, :] if single else x
    if x2.shape[-1] != params.in_dim:
        raise ShapeError(f"input width {x2.shape[-1]} != network fan_in {params.in_dim}")
    if check and not np.all(np.isfinite(x2)):
        raise NumericError("non-finite network input")
    g = input_gradient_graph(lift(params), Tensor(x2)).value
    return g[0] if single else g


def param_gradients(loss: Tensor, lifted: List[tuple]) -> NetworkParams:
    """Reverse-mode gradients of a scalar loss, shaped like the network.

    Handles losses built from forward_graph and/or input_gradient_graph;
    second-order paths through input gradients are differentiated exactly.
    """
    if not np.isfinite(loss.value).all():
        raise NumericError("loss is non-finite; refusing to differentiate")
    gs = ad.grad(loss, leaves(lifted))
    layers = []
    for i, (_, _, act) in enumerate(lifted):
        layers.append(Layer(gs[2 * i].value, gs[2 * i + 1].value, act))
    return NetworkParams(layers)


@dataclass
class AdamState:
    """First/second-moment accumulators mirroring the parameter shapes."""

    m: List[np.ndarray]
    v: List[np.ndarray]
    t: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def adam_init(params: NetworkParams, lr: float = 1e-3, beta1: float = 0.9,
              beta2: float = 0.999, eps: float = 1e-8) -> AdamState:
    shapes = []
    for layer in params.layers:
        shapes.extend((layer.W.shape, layer.b.shape))
    return AdamState(
        m=[np.zeros(s) for s in shapes],
        v=[np.zeros(s) for s in shapes],
        t=0, lr=lr, beta1=beta1, beta2=beta2, eps=eps,
    )


def adam_step(params: NetworkParams, grads: NetworkParams, state: AdamState):
    """One Adam update with bias correction. Pure: returns new (params, state)."""
    flat_p, flat_g = [], []
    for lp, lg in zip(params.layers, grads.layers):
        if lp.W.shape != lg.W.shape or lp.b.shape != lg.b.shape:
            raise ShapeError("gradient shapes do not mirror parameter shapes")
        flat_p.extend((lp.W, lp.b))
        flat_g.extend((lg.W, lg.b))

    t = state.t + 1
    b1, b2 = state.beta1, state.beta2
    new_m, new_v, new_flat = [], [], []
    for p, g, m, v in zip(flat_p, flat_g, state.m, state.v):
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * g * g
        m_hat = m / (1.0 - b1 ** t)
        v_hat = v / (1.0 - b2 ** t)
        new_flat.append(p - state.lr * m_hat / (np.sqrt(v_hat) + state.eps))
        new_m.append(m)
        new_v.append(v)

    layers = []
    for i, layer in enumerate(params.layers):
        layers.append(Layer(new_flat[2 * i], new_flat[2 * i + 1], layer.activation))
    new_state = AdamState(new_m, new_v, t, state.lr, state.beta1, state.beta2, state.eps)
    return NetworkParams(layers), new_state
