from __future__ import annotations

from typing import Sequence

import numpy as np

from ..errors import NonFiniteError, ShapeMismatchError

DTYPE = np.float32
ACC_DTYPE = np.float64


def as_buffer(data, dtype=DTYPE) -> np.ndarray:
    buf = np.asarray(data, dtype=dtype)
    return np.ascontiguousarray(buf)


def check_finite(buf: np.ndarray, name: str = "buffer") -> np.ndarray:
    if not np.all(np.isfinite(buf)):
        raise NonFiniteError(f"{name} contains NaN or Inf")
    return buf


def check_same_shape(*buffers: np.ndarray, names: Sequence[str] | None = None):
    if not buffers:
        return
    shape = np.shape(buffers[0])
    for i, buf in enumerate(buffers[1:], start=1):
        if np.shape(buf) != shape:
            label = names[i] if names else f"argument {i}"
            raise ShapeMismatchError(
                f"shape mismatch: {shape} vs {np.shape(buf)} ({label})"
            )
