"""Forward/backward kernels of the Self-ONN layer zoo.

Shapes follow ``(batch, channels, length)`` for signals and
``(out_channels, in_channels, K, Q)`` for operational kernels. A sample
without the batch axis is accepted by every forward and given back the same
way. All kernels keep the dtype of their inputs.

A generative neuron evaluates, per kernel tap r and power q,
``w(r, q) * x(m + r) ** q`` and sums over taps, powers and input channels,
so power q of the input is convolved with the q-th slice of the kernel.
"""

from __future__ import annotations

from typing import Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import ShapeMismatchError, SpecError


def conv_output_length(length: int, kernel: int, stride: int, padding: int) -> int:
    return (length + 2 * padding - kernel) // stride + 1


def tconv_output_length(
    length: int, kernel: int, stride: int, padding: int, output_trim: int = 0
) -> int:
    return (length - 1) * stride - 2 * padding + kernel + output_trim


def _batched(x: np.ndarray) -> Tuple[np.ndarray, bool]:
    x = np.asarray(x)
    if x.ndim == 2:
        return x[None], True
    if x.ndim != 3:
        raise ShapeMismatchError(f"expected (channels, length) or (batch, channels, length), got {x.shape}")
    return x, False


def powers(x: np.ndarray, q_order: int) -> np.ndarray:
    """Stack ``x ** 1 .. x ** Q`` on a new trailing axis."""
    out = np.empty(x.shape + (q_order,), dtype=x.dtype)
    out[..., 0] = x
    for q in range(1, q_order):
        out[..., q] = out[..., q - 1] * x
    return out


def _power_derivative(x: np.ndarray, q_order: int) -> np.ndarray:
    """``d(x ** q) / dx = q * x ** (q - 1)`` for q = 1..Q, trailing axis."""
    out = np.empty(x.shape + (q_order,), dtype=x.dtype)
    out[..., 0] = 1.0
    if q_order > 1:
        pw = powers(x, q_order - 1)
        for q in range(1, q_order):
            out[..., q] = (q + 1) * pw[..., q - 1]
    return out


def _check_kernel(x: np.ndarray, weights: np.ndarray, bias: np.ndarray):
    if weights.ndim != 4:
        raise ShapeMismatchError(f"operational kernel must be (out, in, K, Q), got {weights.shape}")
    if x.shape[1] != weights.shape[1]:
        raise ShapeMismatchError(
            f"input has {x.shape[1]} channels, kernel expects {weights.shape[1]}"
        )
    if bias.shape != (weights.shape[0],):
        raise ShapeMismatchError(f"bias shape {bias.shape} does not match {weights.shape[0]} outputs")


# Operational convolution


class ConvCache(object):
    __slots__ = ("x_shape", "windows", "stride", "padding")

    def __init__(self, x_shape, windows, stride, padding):
        self.x_shape = x_shape
        self.windows = windows
        self.stride = stride
        self.padding = padding


def op_conv1d_forward(
    x: np.ndarray,
    weights: np.ndarray,
    bias: np.ndarray,
    stride: int = 1,
    padding: int = 0,
    return_cache: bool = False,
):
    x, squeeze = _batched(x)
    _check_kernel(x, weights, bias)
    _, _, kernel, q_order = weights.shape
    length = x.shape[2]
    out_len = conv_output_length(length, kernel, stride, padding)
    if out_len < 1:
        raise SpecError(
            f"conv output length {out_len} < 1 (L={length}, K={kernel}, stride={stride}, padding={padding})"
        )

    xp = np.pad(x, ((0, 0), (0, 0), (padding, padding))) if padding else x
    windows = sliding_window_view(xp, kernel, axis=2)[:, :, : (out_len - 1) * stride + 1 : stride, :]
    # (B, C, Lout, K, Q)
    pw = powers(windows, q_order)
    y = np.einsum("bclkq,ockq->bol", pw, weights, optimize=True)
    y += bias[None, :, None]
    y = y.astype(x.dtype, copy=False)
    if squeeze:
        y = y[0]
    if return_cache:
        return y, ConvCache(x.shape, pw, stride, padding)
    return y


def op_conv1d_backward(
    grad_out: np.ndarray, weights: np.ndarray, cache: ConvCache
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients ``(grad_x, grad_weights, grad_bias)`` of the matching forward."""
    g, squeeze = _batched(grad_out)
    pw = cache.windows
    batch, channels, length = cache.x_shape
    out_len = pw.shape[2]
    kernel, q_order = weights.shape[2], weights.shape[3]
    if g.shape != (batch, weights.shape[0], out_len):
        raise ShapeMismatchError(
            f"grad_out shape {g.shape} does not match forward output {(batch, weights.shape[0], out_len)}"
        )

    grad_bias = g.sum(axis=(0, 2))
    grad_w = np.einsum("bol,bclkq->ockq", g, pw, optimize=True)

    # d(x^q)/dx from the cached first power: q * x^(q-1)
    dpow = _power_derivative(pw[..., 0], q_order)
    g_pow = np.einsum("bol,ockq->bclkq", g, weights, optimize=True)
    g_windows = np.einsum("bclkq,bclkq->bclk", g_pow, dpow)

    stride, padding = cache.stride, cache.padding
    grad_xp = np.zeros((batch, channels, length + 2 * padding), dtype=g.dtype)
    span = (out_len - 1) * stride + 1
    for k in range(kernel):
        grad_xp[:, :, k : k + span : stride] += g_windows[:, :, :, k]
    grad_x = grad_xp[:, :, padding : padding + length]

    if squeeze:
        grad_x = grad_x[0]
    return (
        grad_x.astype(g.dtype, copy=False),
        grad_w.astype(weights.dtype, copy=False),
        grad_bias.astype(weights.dtype, copy=False),
    )


# Transposed operational convolution


class TConvCache(object):
    __slots__ = ("x", "stride", "padding", "full_length")

    def __init__(self, x, stride, padding, full_length):
        self.x = x
        self.stride = stride
        self.padding = padding
        self.full_length = full_length


def op_tconv1d_forward(
    x: np.ndarray,
    weights: np.ndarray,
    bias: np.ndarray,
    stride: int = 1,
    padding: int = 0,
    output_trim: int = 0,
    return_cache: bool = False,
):
    """Transposed operational convolution.

    Every input sample scatters ``sum_q w(:, q) * x ** q`` to the output
    positions ``l * stride + r - padding``. ``output_trim`` > 0 extends the
    cropped result on the right with samples of the uncropped scatter (zeros
    past its end); ``output_trim`` < 0 cuts samples off the right.
    """
    x, squeeze = _batched(x)
    _check_kernel(x, weights, bias)
    _, _, kernel, q_order = weights.shape
    length = x.shape[2]
    out_len = tconv_output_length(length, kernel, stride, padding, output_trim)
    if out_len < 1:
        raise SpecError(f"transposed conv output length {out_len} < 1")

    full_length = (length - 1) * stride + kernel
    xq = powers(x, q_order)
    taps = np.einsum("bclq,ockq->bolk", xq, weights, optimize=True)
    # a positive trim reads on into the uncropped scatter, not into zeros; only
    # positions past its end stay zero
    full = np.zeros((x.shape[0], weights.shape[0], max(full_length, padding + out_len)), dtype=x.dtype)
    span = (length - 1) * stride + 1
    for k in range(kernel):
        full[:, :, k : k + span : stride] += taps[:, :, :, k]
    y = full[:, :, padding : padding + out_len] + bias[None, :, None]
    y = y.astype(x.dtype, copy=False)
    if squeeze:
        y = y[0]
    if return_cache:
        return y, TConvCache(x, stride, padding, full_length)
    return y


def op_tconv1d_backward(
    grad_out: np.ndarray, weights: np.ndarray, cache: TConvCache
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    g, squeeze = _batched(grad_out)
    x = cache.x
    batch, _, length = x.shape
    kernel, q_order = weights.shape[2], weights.shape[3]
    stride, padding = cache.stride, cache.padding
    if g.shape[:2] != (batch, weights.shape[0]):
        raise ShapeMismatchError(f"grad_out shape {g.shape} does not match forward output")

    grad_bias = g.sum(axis=(0, 2))

    # positions past the uncropped scatter were zero padding: no gradient path
    g_full = np.zeros((batch, weights.shape[0], cache.full_length), dtype=g.dtype)
    usable = max(0, min(g.shape[2], cache.full_length - padding))
    g_full[:, :, padding : padding + usable] = g[:, :, :usable]

    span = (length - 1) * stride + 1
    g_taps = np.empty((batch, weights.shape[0], length, kernel), dtype=g.dtype)
    for k in range(kernel):
        g_taps[:, :, :, k] = g_full[:, :, k : k + span : stride]

    xq = powers(x, q_order)
    grad_w = np.einsum("bolk,bclq->ockq", g_taps, xq, optimize=True)
    dpow = _power_derivative(x, q_order)
    g_pow = np.einsum("bolk,ockq->bclq", g_taps, weights, optimize=True)
    grad_x = np.einsum("bclq,bclq->bcl", g_pow, dpow)

    if squeeze:
        grad_x = grad_x[0]
    return (
        grad_x.astype(g.dtype, copy=False),
        grad_w.astype(weights.dtype, copy=False),
        grad_bias.astype(weights.dtype, copy=False),
    )


# Dense


def dense_forward(x: np.ndarray, weights: np.ndarray, bias: np.ndarray, return_cache: bool = False):
    """``y = sum_q W_q x ** q + b``; with Q = 1 this is the affine map ``Wx + b``.

    ``weights`` is ``(out, in)`` for the affine case or ``(out, in, Q)``.
    """
    x = np.asarray(x)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[None]
    w = weights if weights.ndim == 3 else weights[:, :, None]
    if x.ndim != 2 or x.shape[1] != w.shape[1]:
        raise ShapeMismatchError(f"dense input {x.shape} does not match weights {weights.shape}")
    if bias.shape != (w.shape[0],):
        raise ShapeMismatchError(f"bias shape {bias.shape} does not match {w.shape[0]} outputs")
    xq = powers(x, w.shape[2])
    y = (np.einsum("biq,oiq->bo", xq, w, optimize=True) + bias[None, :]).astype(x.dtype, copy=False)
    if squeeze:
        y = y[0]
    if return_cache:
        return y, x
    return y


def dense_backward(
    grad_out: np.ndarray, weights: np.ndarray, x: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    g = np.asarray(grad_out)
    squeeze = g.ndim == 1
    if squeeze:
        g = g[None]
    x = np.asarray(x)
    if x.ndim == 1:
        x = x[None]
    w = weights if weights.ndim == 3 else weights[:, :, None]
    if g.shape != (x.shape[0], w.shape[0]):
        raise ShapeMismatchError(f"grad_out shape {g.shape} does not match dense output")
    q_order = w.shape[2]
    grad_w = np.einsum("bo,biq->oiq", g, powers(x, q_order), optimize=True)
    g_pow = np.einsum("bo,oiq->biq", g, w, optimize=True)
    grad_x = np.einsum("biq,biq->bi", g_pow, _power_derivative(x, q_order))
    grad_b = g.sum(axis=0)
    if weights.ndim == 2:
        grad_w = grad_w[:, :, 0]
    if squeeze:
        grad_x = grad_x[0]
    return (
        grad_x.astype(g.dtype, copy=False),
        grad_w.astype(weights.dtype, copy=False),
        grad_b.astype(weights.dtype, copy=False),
    )


# Activations


def tanh_forward(x: np.ndarray) -> np.ndarray:
    return np.tanh(x)


def tanh_backward(x: np.ndarray, grad_out: np.ndarray) -> np.ndarray:
    t = np.tanh(x)
    return grad_out * (1.0 - t * t)


def sigmoid_forward(x: np.ndarray) -> np.ndarray:
    # split by sign to avoid overflow in exp
    x = np.asarray(x)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sigmoid_backward(x: np.ndarray, grad_out: np.ndarray) -> np.ndarray:
    s = sigmoid_forward(x)
    return grad_out * s * (1.0 - s)
