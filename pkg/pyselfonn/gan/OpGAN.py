from __future__ import annotations

import logging
import os
import warnings
from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple

import numpy as np
import pandas as pd

from .. import utils
from ..core.Adam import Adam
from ..core.buffers import DTYPE, as_buffer
from ..core.losses import bce_loss, bce_loss_grad
from ..dsp.segments import Segment, check_normalized
from ..errors import EmptyInputError, NonFiniteError, TrainingDivergedError
from ..nn.SelfONN import Params, SelfONN
from ..nn.serialization import save_model
from .builders import build_discriminator, build_generator
from .GanConfig import GanConfig
from .losses import LossParts, composite_g_loss_and_grad
from .PairPool import PairPool, TrainPair

logger = logging.getLogger(__name__)

METRICS_FILE = "metrics.csv"
METRICS_COLUMNS = ["iteration", "d_loss", "g_bce", "g_time", "g_stft", "val_total"]

# rng stream ids under GanConfig.seed
_GEN_INIT, _DISC_INIT, _VAL_NOISE, _TRAIN = 0, 1, 2, 3


@dataclass
class Checkpoint(object):
    iteration: int
    params: Params
    val_loss: float
    parts: LossParts
    score: float | None = None


@dataclass
class TrainLog(object):
    iteration: int
    d_loss: float
    g_bce: float
    g_time: float
    g_stft: float
    val_total: float = float("nan")


def _stack(segments: Sequence[Segment]) -> np.ndarray:
    return np.stack([as_buffer(s.samples) for s in segments])[:, None, :]


def _pairs_xy(pairs: Sequence[TrainPair]) -> Tuple[np.ndarray, np.ndarray]:
    return _stack([p.healthy for p in pairs]), _stack([p.faulty for p in pairs])


class OpGAN(object):
    """Conditional operational GAN: ``G(X, z)`` maps a healthy segment to a
    faulty one, ``D(X, Y)`` scores (healthy, candidate) pairs patch-wise."""

    def __init__(self, cfg: GanConfig | None = None):
        self.cfg = cfg or GanConfig.defaults()
        seed = self.cfg.seed
        self.generator = SelfONN(build_generator(self.cfg)).init_params(utils.make_rng(seed, _GEN_INIT))
        self.discriminator = SelfONN(build_discriminator(self.cfg)).init_params(
            utils.make_rng(seed, _DISC_INIT)
        )
        self.g_opt = Adam(self.generator.params, lr=self.cfg.lr, beta1=self.cfg.beta1)
        self.d_opt = Adam(self.discriminator.params, lr=self.cfg.lr, beta1=self.cfg.beta1)
        self.rng = utils.make_rng(seed, _TRAIN)
        self.iteration = 0
        self.checkpoints: List[Checkpoint] = []
        self.history: List[TrainLog] = []

    def noise(self, batch: int, rng: np.random.Generator | None = None) -> np.ndarray:
        rng = rng or self.rng
        shape = (batch, self.cfg.noise_channels, self.cfg.segment_length)
        return rng.standard_normal(shape).astype(DTYPE)

    def generate(self, X: np.ndarray, z: np.ndarray | None = None) -> np.ndarray:
        """``G(X, z)`` for a ``(B, 1, L)`` batch; fresh noise unless ``z`` is given."""
        if z is None:
            z = self.noise(X.shape[0])
        return self.generator(np.concatenate([X, z], axis=1))

    def d_step(self, X: np.ndarray, Y: np.ndarray) -> float:
        """BCE(D(X, Y), 1) + BCE(D(X, G(X, z)), 0), generator frozen."""
        fake = self.generate(X)
        d_real, trace_real = self.discriminator.forward(np.concatenate([X, Y], axis=1), return_trace=True)
        d_fake, trace_fake = self.discriminator.forward(np.concatenate([X, fake], axis=1), return_trace=True)
        ones = np.ones_like(d_real)
        zeros = np.zeros_like(d_fake)
        loss = bce_loss(d_real, ones) + bce_loss(d_fake, zeros)
        if not np.isfinite(loss):
            raise NonFiniteError(f"discriminator loss is {loss}")

        grads_real, _ = self.discriminator.backward(trace_real, bce_loss_grad(d_real, ones))
        grads_fake, _ = self.discriminator.backward(trace_fake, bce_loss_grad(d_fake, zeros))
        grads = [a + b for a, b in zip(grads_real, grads_fake)]
        self.discriminator.set_params(self.d_opt.step(self.discriminator.params, grads))
        return loss

    def generator_objective(
        self, X: np.ndarray, Y: np.ndarray, z: np.ndarray
    ) -> Tuple[float, LossParts, Params]:
        """Composite generator loss and its gradient w.r.t. the generator params."""
        cfg = self.cfg
        fake, trace_g = self.generator.forward(np.concatenate([X, z], axis=1), return_trace=True)
        d_fake, trace_d = self.discriminator.forward(np.concatenate([X, fake], axis=1), return_trace=True)
        total, parts, grad_fake, grad_d = composite_g_loss_and_grad(
            X, Y, fake, d_fake, cfg.lam, cfg.spectral_mode, cfg.stft_window, cfg.stft_hop
        )
        _, grad_pair = self.discriminator.backward(trace_d, grad_d)
        grad_fake = grad_fake + grad_pair[:, 1:2, :]
        grads, _ = self.generator.backward(trace_g, grad_fake)
        return total, parts, grads

    def g_step(self, X: np.ndarray, Y: np.ndarray) -> LossParts:
        """One generator update against the frozen discriminator."""
        total, parts, grads = self.generator_objective(X, Y, self.noise(X.shape[0]))
        if not np.isfinite(total):
            raise NonFiniteError(f"generator loss is {total}")
        self.generator.set_params(self.g_opt.step(self.generator.params, grads))
        return parts

    def validate(self, val_pairs: Sequence[TrainPair]) -> LossParts:
        """Composite loss over ``val_pairs`` with a fixed noise stream, so that
        checkpoints are compared on identical inputs."""
        if not val_pairs:
            raise EmptyInputError("no validation pairs")
        cfg = self.cfg
        rng = utils.make_rng(cfg.seed, _VAL_NOISE)
        sums = np.zeros(3)
        for start in range(0, len(val_pairs), cfg.batch):
            chunk = val_pairs[start : start + cfg.batch]
            X, Y = _pairs_xy(chunk)
            fake = self.generate(X, self.noise(len(chunk), rng))
            d_fake = self.discriminator(np.concatenate([X, fake], axis=1))
            _, parts, _, _ = composite_g_loss_and_grad(
                X, Y, fake, d_fake, cfg.lam, cfg.spectral_mode, cfg.stft_window, cfg.stft_hop
            )
            sums += len(chunk) * np.array([parts.bce, parts.time, parts.stft])
        bce, time, stft = sums / len(val_pairs)
        return LossParts(float(bce), float(time), float(stft), float(cfg.lam))

    def _epoch_batches(self, source: PairPool | Sequence[TrainPair]) -> List[List[TrainPair]]:
        pairs = source.sample(self.rng) if isinstance(source, PairPool) else list(source)
        order = self.rng.permutation(len(pairs))
        pairs = [pairs[i] for i in order]
        return [pairs[i : i + self.cfg.batch] for i in range(0, len(pairs), self.cfg.batch)]

    def _train_batch(self, batch: Sequence[TrainPair]) -> Tuple[float, LossParts]:
        X, Y = _pairs_xy(batch)
        try:
            d_loss = self.d_step(X, Y)
            parts = self.g_step(X, Y)
        except NonFiniteError as e:
            raise TrainingDivergedError(
                f"training diverged at iteration {self.iteration + 1}: {e}", self.checkpoints
            ) from e
        return d_loss, parts

    def _checkpoint(self, val_pairs: Sequence[TrainPair]) -> Checkpoint:
        try:
            parts = self.validate(val_pairs)
            if not np.isfinite(parts.total):
                raise NonFiniteError(f"validation loss is {parts.total}")
        except NonFiniteError as e:
            raise TrainingDivergedError(
                f"training diverged at iteration {self.iteration}: {e}", self.checkpoints
            ) from e
        checkpoint = Checkpoint(self.iteration, self.generator.copy_params(), parts.total, parts)
        self.checkpoints.append(checkpoint)
        logger.info("checkpoint iteration=%d val_total=%.6g", self.iteration, parts.total)
        return checkpoint

    def _log(self, d_losses: List[float], g_parts: List[LossParts]):
        self.history.append(
            TrainLog(
                self.iteration,
                float(np.mean(d_losses)),
                float(np.mean([p.bce for p in g_parts])),
                float(np.mean([p.time for p in g_parts])),
                float(np.mean([p.stft for p in g_parts])),
            )
        )

    def train(
        self, pairs: PairPool | Sequence[TrainPair], val_pairs: Sequence[TrainPair] | None = None
    ) -> List[Checkpoint]:
        """Alternate D and G updates per batch for ``max_iters`` epochs or batches.

        A checkpoint (validation composite loss plus a generator snapshot) is
        taken before training and every ``checkpoint_every`` units after.
        """
        cfg = self.cfg
        if len(pairs) == 0:
            raise EmptyInputError("no training pairs")
        if not val_pairs:
            warnings.warn("No validation pairs; checkpoints are scored on the training pairs")
            val_pairs = pairs.sample(utils.make_rng(cfg.seed, _VAL_NOISE)) if isinstance(pairs, PairPool) else list(pairs)

        if not self.checkpoints:
            self._checkpoint(val_pairs)
        if cfg.schedule == "epochs":
            for _ in range(cfg.max_iters):
                d_losses, g_parts = [], []
                for batch in self._epoch_batches(pairs):
                    d_loss, parts = self._train_batch(batch)
                    d_losses.append(d_loss)
                    g_parts.append(parts)
                self.iteration += 1
                self._after_unit(d_losses, g_parts, val_pairs)
        else:
            done = 0
            while done < cfg.max_iters:
                for batch in self._epoch_batches(pairs):
                    d_loss, parts = self._train_batch(batch)
                    self.iteration += 1
                    done += 1
                    self._after_unit([d_loss], [parts], val_pairs)
                    if done >= cfg.max_iters:
                        break
        return self.checkpoints

    def _after_unit(self, d_losses: List[float], g_parts: List[LossParts], val_pairs):
        self._log(d_losses, g_parts)
        last = self.history[-1]
        logger.debug(
            "iteration=%d d_loss=%.4g g_bce=%.4g g_time=%.4g g_stft=%.4g",
            last.iteration, last.d_loss, last.g_bce, last.g_time, last.g_stft,
        )
        if self.iteration % self.cfg.checkpoint_every == 0 or self._is_last():
            last.val_total = self._checkpoint(val_pairs).val_loss

    def _is_last(self) -> bool:
        return self.iteration == self.cfg.max_iters


def train_opgan(
    pairs: PairPool | Sequence[TrainPair],
    val_pairs: Sequence[TrainPair] | None,
    cfg: GanConfig | None = None,
) -> List[Checkpoint]:
    return OpGAN(cfg).train(pairs, val_pairs)


def select_checkpoint(
    checkpoints: Sequence[Checkpoint],
    mode: str = "loss",
    scorer: Callable[[Checkpoint], float] | None = None,
) -> Checkpoint:
    """The checkpoint whose generator params go downstream.

    ``loss`` takes the lowest validation composite loss (earliest on ties);
    ``detection`` takes the highest ``scorer(checkpoint)``, ties broken by
    validation loss.
    """
    if not checkpoints:
        raise EmptyInputError("no checkpoints to select from")
    if mode == "loss":
        return checkpoints[int(np.argmin([c.val_loss for c in checkpoints]))]
    if mode != "detection":
        raise ValueError(f"unknown selection mode {mode!r}")
    if scorer is None:
        raise ValueError("detection selection needs a scorer")
    for checkpoint in checkpoints:
        checkpoint.score = float(scorer(checkpoint))
        logger.info("checkpoint iteration=%d score=%.4f", checkpoint.iteration, checkpoint.score)
    return min(checkpoints, key=lambda c: (-c.score, c.val_loss, c.iteration))


def synthesize_faults(
    generator: SelfONN,
    healthy: Sequence[Segment],
    seed: int = 0,
    batch: int = 8,
) -> List[Segment]:
    """One synthetic faulty segment per healthy input, ``G(X, z)`` clamped to
    [-1, 1]. The output keeps the input's working condition with the fault
    type ``synthetic``."""
    noise_channels = generator.spec.input_channels - 1
    rng = utils.make_rng(seed)
    out: List[Segment] = []
    for start in range(0, len(healthy), batch):
        chunk = healthy[start : start + batch]
        for s in chunk:
            check_normalized(s.samples)
        X = _stack(chunk)
        z = rng.standard_normal((len(chunk), noise_channels, X.shape[-1])).astype(DTYPE)
        Y = np.clip(generator(np.concatenate([X, z], axis=1)), -1.0, 1.0)
        for s, y in zip(chunk, Y):
            out.append(
                Segment(y[0].astype(DTYPE), s.condition.with_fault("synthetic"), s.source_record, s.index)
            )
    return out


def save_checkpoints(
    checkpoints: Sequence[Checkpoint],
    history: Sequence[TrainLog],
    out_dir: str,
    spec,
) -> pd.DataFrame:
    """``generator_<iteration>.sonn`` per checkpoint plus ``metrics.csv``."""
    os.makedirs(out_dir, exist_ok=True)
    for checkpoint in checkpoints:
        save_model(spec, checkpoint.params, os.path.join(out_dir, f"generator_{checkpoint.iteration:06d}.sonn"))
    metrics = pd.DataFrame(
        [[h.iteration, h.d_loss, h.g_bce, h.g_time, h.g_stft, h.val_total] for h in history],
        columns=METRICS_COLUMNS,
    )
    metrics.to_csv(os.path.join(out_dir, METRICS_FILE), index=False)
    return metrics
