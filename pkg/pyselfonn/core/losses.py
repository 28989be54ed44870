from __future__ import annotations

import numpy as np

from .buffers import ACC_DTYPE, check_finite, check_same_shape

BCE_EPS = 1e-7


def _residual(a, b) -> np.ndarray:
    a = np.asarray(a)
    b = np.asarray(b)
    check_same_shape(a, b)
    diff = a.astype(ACC_DTYPE) - b.astype(ACC_DTYPE)
    return check_finite(diff, "loss input")


def l1_loss(a, b) -> float:
    """Mean absolute difference."""
    return float(np.mean(np.abs(_residual(a, b))))


def l1_loss_grad(a, b) -> np.ndarray:
    """Gradient of :func:`l1_loss` w.r.t. ``a`` (zero where a == b)."""
    diff = _residual(a, b)
    return (np.sign(diff) / diff.size).astype(np.asarray(a).dtype)


def mse_loss(a, b) -> float:
    """Mean squared difference."""
    return float(np.mean(np.square(_residual(a, b))))


def mse_loss_grad(a, b) -> np.ndarray:
    diff = _residual(a, b)
    return (2.0 * diff / diff.size).astype(np.asarray(a).dtype)


def _bce_inputs(pred, target):
    pred = np.asarray(pred)
    target = np.asarray(target, dtype=ACC_DTYPE)
    check_same_shape(pred, target)
    check_finite(pred.astype(ACC_DTYPE), "bce prediction")
    if not np.all((target == 0.0) | (target == 1.0)):
        raise ValueError("bce target must contain only 0 and 1")
    p = np.clip(pred.astype(ACC_DTYPE), BCE_EPS, 1.0 - BCE_EPS)
    return p, target


def bce_loss(pred, target) -> float:
    """Binary cross entropy, predictions clamped to [1e-7, 1 - 1e-7]."""
    p, t = _bce_inputs(pred, target)
    return float(np.mean(-(t * np.log(p) + (1.0 - t) * np.log(1.0 - p))))


def bce_loss_grad(pred, target) -> np.ndarray:
    p, t = _bce_inputs(pred, target)
    grad = (p - t) / (p * (1.0 - p)) / p.size
    return grad.astype(np.asarray(pred).dtype)
