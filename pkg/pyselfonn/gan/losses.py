from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..core.buffers import check_same_shape
from ..core.losses import bce_loss, bce_loss_grad, l1_loss, l1_loss_grad
from ..dsp.spectral import HOP_LENGTH, WINDOW_LENGTH, spectral_l1


@dataclass(frozen=True)
class LossParts(object):
    bce: float
    time: float
    stft: float
    lam: float

    @property
    def total(self) -> float:
        return self.bce + self.lam * (self.time + self.stft)


def composite_g_loss(
    X: np.ndarray,
    Y: np.ndarray,
    G_out: np.ndarray,
    D_out_fake: np.ndarray,
    lam: float = 100.0,
    spectral_mode: str = "power",
    window: int = WINDOW_LENGTH,
    hop: int = HOP_LENGTH,
) -> Tuple[float, LossParts]:
    """BCE(D(X, G), 1) + lam * (L1 in time + L1 between spectral representations)."""
    total, parts, _, _ = composite_g_loss_and_grad(X, Y, G_out, D_out_fake, lam, spectral_mode, window, hop)
    return total, parts


def composite_g_loss_and_grad(
    X: np.ndarray,
    Y: np.ndarray,
    G_out: np.ndarray,
    D_out_fake: np.ndarray,
    lam: float = 100.0,
    spectral_mode: str = "power",
    window: int = WINDOW_LENGTH,
    hop: int = HOP_LENGTH,
) -> Tuple[float, LossParts, np.ndarray, np.ndarray]:
    """As :func:`composite_g_loss`, plus the gradients w.r.t. ``G_out`` (time and
    spectral terms) and ``D_out_fake`` (adversarial term)."""
    check_same_shape(X, Y, G_out, names=["X", "Y", "G_out"])
    ones = np.ones_like(D_out_fake, dtype=np.float64)
    adv = bce_loss(D_out_fake, ones)
    time = l1_loss(Y, G_out)
    stft, g_stft = spectral_l1(G_out, Y, spectral_mode, window, hop)
    parts = LossParts(adv, time, stft, float(lam))

    g_time = l1_loss_grad(G_out, Y)
    grad_g = (lam * (g_time.astype(np.float64) + g_stft)).astype(np.asarray(G_out).dtype)
    grad_d = bce_loss_grad(D_out_fake, ones)
    return parts.total, parts, grad_g, grad_d
