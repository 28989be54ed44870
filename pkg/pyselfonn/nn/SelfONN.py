from __future__ import annotations

from typing import Any, List, Sequence, Tuple

import numpy as np

from ..core.buffers import DTYPE
from ..errors import ShapeMismatchError
from . import functional as F
from .NetworkSpec import LayerSpec, NetworkSpec, check_spec, count_params, layer_shapes

Params = List[np.ndarray]


def init_params(spec: NetworkSpec, rng: np.random.Generator, dtype=DTYPE) -> Params:
    """Uniform in +-sqrt(1 / (in * K * Q)) for weights, zeros for biases."""
    check_spec(spec)
    params: Params = []
    for layer in spec.layers:
        fan_in = layer.in_channels * layer.kernel * layer.q
        bound = np.sqrt(1.0 / fan_in)
        params.append(rng.uniform(-bound, bound, size=layer.weight_shape()).astype(dtype))
        params.append(np.zeros(layer.out_channels, dtype=dtype))
    return params


def check_params(spec: NetworkSpec, params: Sequence[np.ndarray]):
    if len(params) != 2 * len(spec.layers):
        raise ShapeMismatchError(
            f"expected {2 * len(spec.layers)} parameter buffers, got {len(params)}"
        )
    for layer, w, b in zip(spec.layers, params[0::2], params[1::2]):
        if tuple(np.shape(w)) != layer.weight_shape() or tuple(np.shape(b)) != (layer.out_channels,):
            raise ShapeMismatchError(
                f"layer {layer.name}: parameter shapes {np.shape(w)}, {np.shape(b)} "
                f"do not match {layer.weight_shape()}, {(layer.out_channels,)}"
            )


class _LayerTrace(object):
    __slots__ = ("in_shape", "flattened", "cache", "pre_activation")

    def __init__(self, in_shape, flattened, cache, pre_activation):
        self.in_shape = in_shape
        self.flattened = flattened
        self.cache = cache
        self.pre_activation = pre_activation


class Trace(object):
    """Everything backward_network needs from a forward pass."""

    def __init__(self, squeezed: bool, layers: List[_LayerTrace], channel_splits: List[List[int]]):
        self.squeezed = squeezed
        self.layers = layers
        self.channel_splits = channel_splits


def _activate(layer: LayerSpec, z: np.ndarray) -> np.ndarray:
    if layer.activation == "tanh":
        return F.tanh_forward(z)
    if layer.activation == "sigmoid":
        return F.sigmoid_forward(z)
    return z


def _activate_backward(layer: LayerSpec, z: np.ndarray, g: np.ndarray) -> np.ndarray:
    if layer.activation == "tanh":
        return F.tanh_backward(z, g)
    if layer.activation == "sigmoid":
        return F.sigmoid_backward(z, g)
    return g


def forward_network(
    spec: NetworkSpec,
    params: Sequence[np.ndarray],
    x: np.ndarray,
    return_trace: bool = False,
):
    """Run ``x`` (``(C, L)`` or ``(B, C, L)``) through the network.

    Pure in ``(spec, params, x)``; with ``return_trace`` the caches needed by
    :func:`backward_network` are returned as well.
    """
    x = np.asarray(x)
    squeezed = x.ndim == 2
    if squeezed:
        x = x[None]
    if x.ndim != 3 or x.shape[1:] != (spec.input_channels, spec.input_length):
        raise ShapeMismatchError(
            f"network expects input (B, {spec.input_channels}, {spec.input_length}), got {x.shape}"
        )
    sources = spec.skip_sources()

    outputs: List[np.ndarray] = []
    traces: List[_LayerTrace] = []
    splits: List[List[int]] = []
    current = x
    for i, layer in enumerate(spec.layers):
        w, b = params[2 * i], params[2 * i + 1]
        parts = [current] + [outputs[s] for s in sources.get(i, [])]
        splits.append([p.shape[1] for p in parts])
        inp = np.concatenate(parts, axis=1) if len(parts) > 1 else current

        flattened = False
        if layer.kind == "dense":
            if inp.ndim == 3:
                inp = inp.reshape(inp.shape[0], -1)
                flattened = True
            z, cache = F.dense_forward(inp, w, b, return_cache=True)
        elif layer.kind == "op_conv":
            z, cache = F.op_conv1d_forward(inp, w, b, layer.stride, layer.padding, return_cache=True)
        else:
            z, cache = F.op_tconv1d_forward(
                inp, w, b, layer.stride, layer.padding, layer.output_trim, return_cache=True
            )
        out = _activate(layer, z)
        outputs.append(out)
        if return_trace:
            in_shape = parts[0].shape[:1] + (sum(splits[-1]),) + parts[0].shape[2:]
            traces.append(_LayerTrace(in_shape, flattened, cache, z))
        current = out

    y = current[0] if squeezed else current
    if return_trace:
        return y, Trace(squeezed, traces, splits)
    return y


def backward_network(
    spec: NetworkSpec,
    params: Sequence[np.ndarray],
    trace: Trace,
    grad_out: np.ndarray,
) -> Tuple[Params, np.ndarray]:
    """Returns ``(grads, grad_input)``; ``grads`` follows the layout of ``params``."""
    g = np.asarray(grad_out)
    if trace.squeezed:
        g = g[None]
    sources = spec.skip_sources()
    n = len(spec.layers)

    grads: Params = [np.zeros_like(p) for p in params]
    out_grads: List[Any] = [None] * n
    out_grads[-1] = g
    grad_input = None
    for i in range(n - 1, -1, -1):
        layer = spec.layers[i]
        t = trace.layers[i]
        g_i = out_grads[i]
        if g_i is None:
            continue
        g_z = _activate_backward(layer, t.pre_activation, g_i)
        w = params[2 * i]
        if layer.kind == "dense":
            g_in, g_w, g_b = F.dense_backward(g_z, w, t.cache)
            if t.flattened:
                g_in = g_in.reshape(t.in_shape)
        elif layer.kind == "op_conv":
            g_in, g_w, g_b = F.op_conv1d_backward(g_z, w, t.cache)
        else:
            g_in, g_w, g_b = F.op_tconv1d_backward(g_z, w, t.cache)
        grads[2 * i] = g_w
        grads[2 * i + 1] = g_b

        # split the concatenated input back into its contributors
        bounds = np.cumsum(trace.channel_splits[i])[:-1]
        pieces = np.split(g_in, bounds, axis=1) if len(bounds) else [g_in]
        targets = [i - 1] + sources.get(i, [])
        for target, piece in zip(targets, pieces):
            if target < 0:
                grad_input = piece
            elif out_grads[target] is None:
                out_grads[target] = piece
            else:
                out_grads[target] = out_grads[target] + piece

    if trace.squeezed and grad_input is not None:
        grad_input = grad_input[0]
    return grads, grad_input


class SelfONN(object):
    def __init__(self, spec: NetworkSpec, params: Sequence[np.ndarray] | None = None):
        self.spec: NetworkSpec = check_spec(spec)
        self.params: Params = []
        if params is not None:
            self.set_params(params)

    def init_params(self, rng: np.random.Generator, dtype=DTYPE) -> "SelfONN":
        self.params = init_params(self.spec, rng, dtype)
        return self

    def set_params(self, params: Sequence[np.ndarray]):
        check_params(self.spec, params)
        self.params = [np.asarray(p) for p in params]

    def copy_params(self) -> Params:
        return [p.copy() for p in self.params]

    def n_params(self) -> int:
        return count_params(self.spec)

    def layer_shapes(self):
        return layer_shapes(self.spec)

    def forward(self, x: np.ndarray, return_trace: bool = False):
        return forward_network(self.spec, self.params, x, return_trace=return_trace)

    def backward(self, trace: Trace, grad_out: np.ndarray) -> Tuple[Params, np.ndarray]:
        return backward_network(self.spec, self.params, trace, grad_out)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.forward(x)
