"""Hanning window, STFT and power spectrogram, with their adjoints.

Everything works on the last axis, so batches ``(..., L)`` pass through
unchanged. Frames start every ``hop`` samples; a trailing partial frame is
dropped, giving ``(L - window) // hop + 1`` frames of ``window // 2 + 1``
one-sided bins.
"""

from __future__ import annotations

from typing import Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import ShapeMismatchError

WINDOW_LENGTH = 256
HOP_LENGTH = 128


def hanning(n: int = WINDOW_LENGTH) -> np.ndarray:
    """Symmetric Hann window ``0.5 * (1 - cos(2 pi k / (N - 1)))``."""
    if n < 2:
        raise ValueError(f"window length must be >= 2, got {n}")
    return np.hanning(n)


def frame_count(length: int, window: int = WINDOW_LENGTH, hop: int = HOP_LENGTH) -> int:
    if length < window:
        raise ShapeMismatchError(f"signal of {length} samples is shorter than the {window}-sample window")
    return (length - window) // hop + 1


def _frames(x: np.ndarray, window: int, hop: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    n_frames = frame_count(x.shape[-1], window, hop)
    view = sliding_window_view(x, window, axis=-1)
    return view[..., : (n_frames - 1) * hop + 1 : hop, :]


def stft(x: np.ndarray, window: int = WINDOW_LENGTH, hop: int = HOP_LENGTH) -> np.ndarray:
    """Complex one-sided STFT, shape ``(..., frames, window // 2 + 1)``."""
    frames = _frames(x, window, hop) * hanning(window)
    return np.fft.rfft(frames, n=window, axis=-1)


def spectrogram(x: np.ndarray, window: int = WINDOW_LENGTH, hop: int = HOP_LENGTH) -> np.ndarray:
    """Power spectrogram ``|STFT|^2``."""
    z = stft(x, window, hop)
    return z.real**2 + z.imag**2


def naive_dft(frame: np.ndarray) -> np.ndarray:
    """O(N^2) one-sided DFT of a single frame; test oracle for the FFT path."""
    frame = np.asarray(frame, dtype=np.float64)
    n = frame.shape[-1]
    k = np.arange(n // 2 + 1)[:, None]
    t = np.arange(n)[None, :]
    basis = np.exp(-2j * np.pi * k * t / n)
    return basis @ frame


def _stft_adjoint(coeff: np.ndarray, length: int, window: int, hop: int) -> np.ndarray:
    """Pull ``dL/dRe + i dL/dIm`` of every STFT bin back to the signal.

    For a real frame f, ``dL/df[t] = Re(sum_k c_k exp(2 pi i k t / N))`` over
    the one-sided bins. irfft doubles the interior bins, so they are halved
    before the inverse transform.
    """
    c = np.array(coeff, dtype=np.complex128)
    c[..., 1 : (window + 1) // 2] *= 0.5
    frame_grad = np.fft.irfft(c, n=window, axis=-1) * window
    frame_grad *= hanning(window)

    n_frames = coeff.shape[-2]
    grad = np.zeros(coeff.shape[:-2] + (length,), dtype=np.float64)
    for i in range(n_frames):
        grad[..., i * hop : i * hop + window] += frame_grad[..., i, :]
    return grad


def spectrogram_backward(
    x: np.ndarray, grad: np.ndarray, window: int = WINDOW_LENGTH, hop: int = HOP_LENGTH
) -> np.ndarray:
    """Gradient w.r.t. ``x`` given ``grad`` = dL/dSpectrogram."""
    z = stft(x, window, hop)
    if np.shape(grad) != z.shape:
        raise ShapeMismatchError(f"spectrogram gradient {np.shape(grad)} != {z.shape}")
    return _stft_adjoint(2.0 * np.asarray(grad) * z, np.shape(x)[-1], window, hop)


def spectral_l1(
    a: np.ndarray,
    b: np.ndarray,
    mode: str = "power",
    window: int = WINDOW_LENGTH,
    hop: int = HOP_LENGTH,
) -> Tuple[float, np.ndarray]:
    """L1 distance between spectral representations and its gradient w.r.t. ``a``.

    ``mode="power"`` compares power spectrograms, ``mode="complex"`` the
    modulus of the complex STFT difference.
    """
    if np.shape(a) != np.shape(b):
        raise ShapeMismatchError(f"shape mismatch: {np.shape(a)} vs {np.shape(b)}")
    length = np.shape(a)[-1]
    za = stft(a, window, hop)
    zb = stft(b, window, hop)
    if mode == "power":
        diff = (za.real**2 + za.imag**2) - (zb.real**2 + zb.imag**2)
        loss = float(np.mean(np.abs(diff)))
        coeff = 2.0 * (np.sign(diff) / diff.size) * za
    elif mode == "complex":
        diff = za - zb
        mod = np.abs(diff)
        loss = float(np.mean(mod))
        safe = np.where(mod > 0.0, mod, 1.0)
        coeff = np.where(mod > 0.0, diff / safe, 0.0) / diff.size
    else:
        raise ValueError(f"unknown spectral mode {mode!r}")
    return loss, _stft_adjoint(coeff, length, window, hop)
