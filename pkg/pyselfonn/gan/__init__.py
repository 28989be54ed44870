from .builders import build_discriminator, build_generator
from .GanConfig import GanConfig
from .losses import LossParts, composite_g_loss, composite_g_loss_and_grad
from .OpGAN import (
    Checkpoint,
    OpGAN,
    TrainLog,
    save_checkpoints,
    select_checkpoint,
    synthesize_faults,
    train_opgan,
)
from .PairPool import PairPool, TrainPair

__all__ = [
    "build_discriminator",
    "build_generator",
    "GanConfig",
    "LossParts",
    "composite_g_loss",
    "composite_g_loss_and_grad",
    "Checkpoint",
    "OpGAN",
    "TrainLog",
    "save_checkpoints",
    "select_checkpoint",
    "synthesize_faults",
    "train_opgan",
    "PairPool",
    "TrainPair",
]
