from .Adam import Adam, AdamState, adam_step
from .buffers import ACC_DTYPE, DTYPE, as_buffer, check_finite, check_same_shape
from .losses import (
    bce_loss,
    bce_loss_grad,
    l1_loss,
    l1_loss_grad,
    mse_loss,
    mse_loss_grad,
)

__all__ = [
    "Adam",
    "AdamState",
    "adam_step",
    "ACC_DTYPE",
    "DTYPE",
    "as_buffer",
    "check_finite",
    "check_same_shape",
    "bce_loss",
    "bce_loss_grad",
    "l1_loss",
    "l1_loss_grad",
    "mse_loss",
    "mse_loss_grad",
]
