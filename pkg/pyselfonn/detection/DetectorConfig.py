from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar, Tuple

from ..ConfigSection import ConfigSection
from ..errors import ConfigError


@dataclass(frozen=True)
class DetectorConfig(ConfigSection):
    SECTION: ClassVar[str] = "detector"

    q: int = 3
    dense_q: int = 1
    hidden_channels: int = 16
    dense_hidden: int = 32
    outputs: int = 2
    kernels: Tuple[int, ...] = (81, 41, 21, 7, 7)
    strides: Tuple[int, ...] = (8, 4, 4, 2, 2)
    padding: int = 0
    epochs: int = 50
    lr: float = 1e-4
    batch: int = 32
    seed: int = 0
    segment_length: int = 4096

    def validate(self):
        if len(self.kernels) != len(self.strides) or not self.kernels:
            raise ConfigError("detector.kernels and detector.strides need the same, non-zero length")
        if self.q < 1 or self.dense_q < 1:
            raise ConfigError("detector Q values must be >= 1")
        if self.outputs != 2:
            raise ConfigError("detector.outputs must be 2 (healthy, faulty)")
        if self.epochs < 0 or self.batch < 2:
            raise ConfigError("detector.epochs must be >= 0 and detector.batch >= 2")
        if self.padding < 0:
            raise ConfigError("detector.padding must be >= 0")
