from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar, Optional, Tuple

from ..ConfigSection import ConfigSection
from ..errors import ConfigError

SCHEDULES = ("epochs", "iters")
SPECTRAL_MODES = ("power", "complex")


@dataclass(frozen=True)
class GanConfig(ConfigSection):
    SECTION: ClassVar[str] = "gan"

    gen_width: int = 36
    disc_width: int = 52
    q: int = 3
    disc_q: Optional[int] = None
    lam: float = 100.0
    batch: int = 8
    max_iters: int = 1000
    schedule: str = "epochs"
    lr: float = 1e-4
    beta1: float = 0.9
    noise_channels: int = 1
    checkpoint_every: int = 10
    seed: int = 0
    segment_length: int = 4096
    stft_window: int = 256
    stft_hop: int = 128
    spectral_mode: str = "power"
    gen_depth: int = 5
    gen_kernel: int = 5
    gen_final_kernel: int = 6
    disc_kernels: Tuple[int, ...] = (4, 4, 4, 4, 4, 6)
    disc_strides: Tuple[int, ...] = (4, 4, 4, 4, 4, 2)
    disc_final_padding: int = 2

    def validate(self):
        if self.lam < 0:
            raise ConfigError("gan.lam must be >= 0")
        if self.batch < 1:
            raise ConfigError("gan.batch must be >= 1")
        if self.gen_width < 1 or self.disc_width < 1:
            raise ConfigError("gan widths must be >= 1")
        if self.q < 1 or (self.disc_q is not None and self.disc_q < 1):
            raise ConfigError("gan.q must be >= 1")
        if self.noise_channels < 0:
            raise ConfigError("gan.noise_channels must be >= 0")
        if self.max_iters < 0 or self.checkpoint_every < 1:
            raise ConfigError("gan.max_iters must be >= 0 and gan.checkpoint_every >= 1")
        if self.schedule not in SCHEDULES:
            raise ConfigError(f"gan.schedule must be one of {SCHEDULES}")
        if self.spectral_mode not in SPECTRAL_MODES:
            raise ConfigError(f"gan.spectral_mode must be one of {SPECTRAL_MODES}")
        if len(self.disc_kernels) != len(self.disc_strides) or not self.disc_kernels:
            raise ConfigError("gan.disc_kernels and gan.disc_strides need the same, non-zero length")
        if self.gen_depth < 1:
            raise ConfigError("gan.gen_depth must be >= 1")
        if not 0.0 <= self.beta1 < 1.0 or self.lr <= 0:
            raise ConfigError("gan.beta1 must lie in [0, 1) and gan.lr must be > 0")

    @property
    def discriminator_q(self) -> int:
        return self.q if self.disc_q is None else self.disc_q
