from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from .buffers import ACC_DTYPE, check_finite, check_same_shape

DEFAULT_LR = 1e-4
DEFAULT_BETA1 = 0.9
DEFAULT_BETA2 = 0.999
DEFAULT_EPS = 1e-8


@dataclass
class AdamState(object):
    m: np.ndarray
    v: np.ndarray
    t: int = 0
    beta1: float = DEFAULT_BETA1
    beta2: float = DEFAULT_BETA2
    eps: float = DEFAULT_EPS
    lr: float = DEFAULT_LR

    @classmethod
    def zeros_like(cls, params: np.ndarray, **kwargs) -> "AdamState":
        shape = np.shape(params)
        return cls(np.zeros(shape, ACC_DTYPE), np.zeros(shape, ACC_DTYPE), **kwargs)


def adam_step(params: np.ndarray, grads: np.ndarray, state: AdamState) -> np.ndarray:
    """One bias-corrected Adam update.

    Moments live in float64 inside ``state`` and are updated in place; the
    returned parameters keep the dtype of ``params``.
    """
    check_same_shape(params, grads, state.m, state.v, names=["params", "grads", "m", "v"])
    g = check_finite(np.asarray(grads, dtype=ACC_DTYPE), "gradient")

    state.t += 1
    state.m *= state.beta1
    state.m += (1.0 - state.beta1) * g
    state.v *= state.beta2
    state.v += (1.0 - state.beta2) * np.square(g)

    m_hat = state.m / (1.0 - state.beta1**state.t)
    v_hat = state.v / (1.0 - state.beta2**state.t)
    update = state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    updated = np.asarray(params, dtype=ACC_DTYPE) - update
    return updated.astype(np.asarray(params).dtype)


class Adam(object):
    def __init__(
        self,
        params: Sequence[np.ndarray],
        lr: float = DEFAULT_LR,
        beta1: float = DEFAULT_BETA1,
        beta2: float = DEFAULT_BETA2,
        eps: float = DEFAULT_EPS,
    ):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.states: List[AdamState] = []
        self.reset(params)

    def reset(self, params: Sequence[np.ndarray]):
        self.states = [
            AdamState.zeros_like(
                p, beta1=self.beta1, beta2=self.beta2, eps=self.eps, lr=self.lr
            )
            for p in params
        ]

    def step(
        self, params: Sequence[np.ndarray], grads: Sequence[np.ndarray]
    ) -> List[np.ndarray]:
        if len(params) != len(self.states) or len(grads) != len(self.states):
            raise ValueError(
                f"expected {len(self.states)} parameter buffers, "
                f"got {len(params)} params and {len(grads)} grads"
            )
        return [adam_step(p, g, s) for p, g, s in zip(params, grads, self.states)]
