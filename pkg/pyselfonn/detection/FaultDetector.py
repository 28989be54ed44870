from __future__ import annotations

import logging
from typing import List, Sequence, Union

import numpy as np

from .. import utils
from ..core.Adam import Adam
from ..core.buffers import DTYPE, as_buffer
from ..core.losses import mse_loss, mse_loss_grad
from ..dsp.segments import Segment, check_normalized
from ..errors import EmptyInputError, NonFiniteError, TrainingDivergedError
from ..nn.functional import conv_output_length
from ..nn.NetworkSpec import LayerSpec, NetworkSpec, check_spec
from ..nn.SelfONN import Params, SelfONN
from .DetectorConfig import DetectorConfig

logger = logging.getLogger(__name__)

HEALTHY = "healthy"
FAULTY = "faulty"
LABELS = (HEALTHY, FAULTY)

SegmentLike = Union[Segment, np.ndarray]


def build_detector(cfg: DetectorConfig | None = None) -> NetworkSpec:
    """Strided operational layers, a flatten, a hidden dense layer and a
    two-neuron (healthy, faulty) output, tanh everywhere."""
    cfg = cfg or DetectorConfig.defaults()
    layers: List[LayerSpec] = []
    channels, length = 1, cfg.segment_length
    for i, (k, s) in enumerate(zip(cfg.kernels, cfg.strides), start=1):
        layers.append(
            LayerSpec(f"conv{i}", "op_conv", channels, cfg.hidden_channels, k, cfg.q, stride=s, padding=cfg.padding)
        )
        channels = cfg.hidden_channels
        length = conv_output_length(length, k, s, cfg.padding)
    features = channels * length
    layers.append(LayerSpec("fc1", "dense", features, cfg.dense_hidden, q=cfg.dense_q))
    layers.append(LayerSpec("fc2", "dense", cfg.dense_hidden, cfg.outputs, q=cfg.dense_q))
    return check_spec(NetworkSpec(1, cfg.segment_length, tuple(layers)))


def _samples(x: SegmentLike) -> np.ndarray:
    samples = x.samples if isinstance(x, Segment) else np.asarray(x)
    check_normalized(samples)
    return as_buffer(samples)


def _batch(segments: Sequence[SegmentLike]) -> np.ndarray:
    return np.stack([_samples(s) for s in segments])[:, None, :]


def targets(faulty: np.ndarray) -> np.ndarray:
    """(+1, -1) for healthy rows, (-1, +1) for faulty rows."""
    faulty = np.asarray(faulty, dtype=bool)
    out = np.where(faulty[:, None], [-1.0, 1.0], [1.0, -1.0])
    return out.astype(DTYPE)


def label_of(output: np.ndarray) -> str:
    """Argmax readout; an exact tie reads as healthy."""
    return FAULTY if output[1] > output[0] else HEALTHY


class FaultDetector(object):
    def __init__(self, cfg: DetectorConfig | None = None, params: Sequence[np.ndarray] | None = None):
        self.cfg = cfg or DetectorConfig.defaults()
        self.network = SelfONN(build_detector(self.cfg))
        if params is None:
            self.network.init_params(utils.make_rng(self.cfg.seed, 0))
        else:
            self.network.set_params(params)

    @classmethod
    def from_network(
        cls, spec: NetworkSpec, params: Sequence[np.ndarray], cfg: DetectorConfig | None = None
    ) -> "FaultDetector":
        """Detector around a network read from a model file; ``cfg`` supplies the
        training and batching settings only."""
        detector = cls.__new__(cls)
        detector.cfg = cfg or DetectorConfig.defaults()
        detector.network = SelfONN(spec, params)
        return detector

    @property
    def params(self) -> Params:
        return self.network.params

    def _balanced_batches(self, n_healthy: int, n_faulty: int, rng: np.random.Generator):
        half = self.cfg.batch // 2
        steps = -(-max(n_healthy, n_faulty) // half)

        def draw(n):
            reps = -(-steps * half // n)
            return np.concatenate([rng.permutation(n) for _ in range(reps)])[: steps * half]

        h, f = draw(n_healthy), draw(n_faulty)
        for i in range(steps):
            yield h[i * half : (i + 1) * half], f[i * half : (i + 1) * half]

    def fit(self, healthy: Sequence[SegmentLike], faulty: Sequence[SegmentLike]) -> Params:
        """MSE against +-1 targets with class-balanced batches; returns the final params."""
        if len(healthy) == 0 or len(faulty) == 0:
            raise EmptyInputError(
                f"detector training needs both classes, got {len(healthy)} healthy and {len(faulty)} faulty"
            )
        cfg = self.cfg
        X_h, X_f = _batch(healthy), _batch(faulty)
        t_h = targets(np.zeros(len(X_h), dtype=bool))
        t_f = targets(np.ones(len(X_f), dtype=bool))
        opt = Adam(self.network.params, lr=cfg.lr)
        rng = utils.make_rng(cfg.seed, 1)

        for epoch in range(1, cfg.epochs + 1):
            losses = []
            for ih, jf in self._balanced_batches(len(X_h), len(X_f), rng):
                X = np.concatenate([X_h[ih], X_f[jf]])
                t = np.concatenate([t_h[ih], t_f[jf]])
                out, trace = self.network.forward(X, return_trace=True)
                try:
                    loss = mse_loss(out, t)
                    grads, _ = self.network.backward(trace, mse_loss_grad(out, t))
                    self.network.set_params(opt.step(self.network.params, grads))
                except NonFiniteError as e:
                    raise TrainingDivergedError(f"detector training diverged in epoch {epoch}: {e}") from e
                losses.append(loss)
            logger.debug("detector epoch=%d loss=%.6g", epoch, float(np.mean(losses)))
        if cfg.epochs:
            logger.info("detector trained: epochs=%d final_loss=%.6g", cfg.epochs, float(np.mean(losses)))
        return self.network.copy_params()

    def outputs(self, segments: Sequence[SegmentLike]) -> np.ndarray:
        """``(n, 2)`` network outputs, evaluated in batches of ``cfg.batch``."""
        if len(segments) == 0:
            return np.zeros((0, 2), dtype=DTYPE)
        step = self.cfg.batch
        return np.concatenate(
            [self.network(_batch(segments[i : i + step])) for i in range(0, len(segments), step)]
        )

    def segment_scores(self, segments: Sequence[SegmentLike]) -> np.ndarray:
        """output[faulty] - output[healthy]; positive means faulty."""
        out = self.outputs(segments)
        return out[:, 1] - out[:, 0]

    def classify(self, segments: Sequence[SegmentLike]) -> List[str]:
        return [label_of(o) for o in self.outputs(segments)]

    def classify_segment(self, x: SegmentLike) -> str:
        return label_of(self.network(_samples(x)[None]))


def train_detector(
    healthy: Sequence[SegmentLike],
    synthetic_faulty: Sequence[SegmentLike],
    cfg: DetectorConfig | None = None,
) -> Params:
    return FaultDetector(cfg).fit(healthy, synthetic_faulty)


def classify_segment(params: Sequence[np.ndarray], x: SegmentLike, cfg: DetectorConfig | None = None) -> str:
    return FaultDetector(cfg, params).classify_segment(x)
