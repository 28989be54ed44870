"""Zero-shot fault detection by blind domain transition, end to end.

Stages: train the Op-GAN on a source machine, synthesize faults from real
healthy target data, train the detector on real-healthy + synthetic-faulty
target segments and evaluate it on held-out real target data.
"""

from __future__ import annotations

import logging
import os
import warnings
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple

import numpy as np
import pandas as pd

from . import utils
from .config import Config
from .data.splits import (
    TestSet,
    build_test_set,
    split_by_speed,
    split_faulty,
    split_healthy,
    split_records,
)
from .data.WorkingCondition import Record
from .detection.EvalReport import EvalReport
from .detection.evaluation import evaluate, recall_at_far
from .detection.FaultDetector import FaultDetector
from .dsp.segments import SAMPLE_RATE, Segment, normalize_segment, segments_from_record
from .dsp.spectral import WINDOW_LENGTH, spectrogram
from .errors import EmptyInputError, PipelineStageError, TrainingDivergedError
from .gan.OpGAN import Checkpoint, OpGAN, save_checkpoints, select_checkpoint, synthesize_faults
from .gan.PairPool import PairPool, TrainPair
from .nn.SelfONN import SelfONN
from .nn.serialization import save_model
from .RunLedger import RunLedger

logger = logging.getLogger(__name__)

REPORT_FILE = "report.csv"
BASELINE_REPORT_FILE = "baseline_report.csv"
GENERATOR_FILE = "generator.sonn"
DETECTOR_FILE = "detector.sonn"
COMPARISON_TIME_FILE = "comparison_time.csv"
COMPARISON_SPECTROGRAM_FILE = "comparison_spectrogram.csv"

TIME_COLUMNS = ["trio", "sensor", "speed", "load", "kind", "source_record", "sample", "value"]
SPECTROGRAM_COLUMNS = ["trio", "sensor", "kind", "frame", "bin", "freq_hz", "power"]

# rng stream ids under PipelineConfig.seed
_VAL_PAIRS, _SELECTION = 10, 11


@contextmanager
def stage(name: str):
    """Tag any failure inside the block with the pipeline stage it came from."""
    logger.info("stage %s", name)
    try:
        yield
    except PipelineStageError:
        raise
    except Exception as e:
        raise PipelineStageError(name, e) from e


@dataclass
class SourceData(object):
    pool: PairPool
    val_pairs: List[TrainPair]
    val_healthy: List[Segment]
    val_faulty: List[Segment]
    val_speed: float


@dataclass
class TargetData(object):
    train_healthy: List[Segment]
    test_healthy: List[Segment]
    faulty: List[Record]


@dataclass
class PipelineResult(object):
    report: EvalReport
    ledger: RunLedger
    checkpoint: Checkpoint
    generator: SelfONN
    detector: FaultDetector
    baseline: EvalReport | None = None


def prepare_source(records: Sequence[Record], cfg: Config) -> SourceData:
    """Condition-matched training pairs and a held-out speed for validation."""
    healthy, faulty = split_records(records)
    if not healthy or not faulty:
        raise EmptyInputError("the source dataset needs healthy and faulty records")
    h_segments = [s for r in healthy for s in segments_from_record(r)]
    f_segments = [s for r in faulty for s in segments_from_record(r)]
    speeds = sorted({s.condition.speed for s in h_segments})
    if len(speeds) < 2:
        raise EmptyInputError("holding out a validation speed needs at least two source speeds")
    val_speed = cfg.pipeline.val_speed if cfg.pipeline.val_speed is not None else speeds[-1]
    train_h, val_h = split_by_speed(h_segments, val_speed)
    train_f, val_f = split_by_speed(f_segments, val_speed)
    if not val_h or not val_f:
        raise EmptyInputError(f"no source segments recorded at validation speed {val_speed:g}")
    pool = PairPool(train_h, train_f)
    val_pairs = PairPool(val_h, val_f).sample(utils.make_rng(cfg.pipeline.seed, _VAL_PAIRS))
    logger.info(
        "source: %d training pairs per epoch, %d validation pairs at %g rpm",
        len(pool), len(val_pairs), val_speed,
    )
    return SourceData(pool, val_pairs, val_h, val_f, val_speed)


def prepare_target(records: Sequence[Record], cfg: Config) -> TargetData:
    healthy, faulty = split_records(records)
    if not healthy:
        raise EmptyInputError("the target dataset has no healthy records")
    train_h, test_h = split_healthy(healthy, cfg.pipeline.train_fraction, cfg.pipeline.seed)
    logger.info("target: %d healthy train, %d healthy test segments, %d faulty records",
                len(train_h), len(test_h), len(faulty))
    return TargetData(train_h, test_h, faulty)


def train_gan(source: SourceData, cfg: Config, out_dir: str | None = None) -> OpGAN:
    """Train the Op-GAN. A divergence after at least one checkpoint falls back
    to the checkpoints recorded so far."""
    gan = OpGAN(cfg.gan)
    try:
        gan.train(source.pool, source.val_pairs)
    except TrainingDivergedError as e:
        if not e.checkpoints:
            raise
        warnings.warn(f"{e}; continuing with {len(e.checkpoints)} earlier checkpoint(s)")
        gan.checkpoints = list(e.checkpoints)
    if out_dir:
        save_checkpoints(gan.checkpoints, gan.history, os.path.join(out_dir, "gan"), gan.generator.spec)
    return gan


def renormalize(segments: Sequence[Segment]) -> List[Segment]:
    """Min-max normalize synthetic segments the way every real segment is."""
    out = []
    for s in segments:
        samples, degenerate = normalize_segment(s.samples)
        out.append(Segment(samples, s.condition, s.source_record, s.index, degenerate))
    return out


def detection_scorer(gan: OpGAN, source: SourceData, cfg: Config) -> Callable[[Checkpoint], float]:
    """Scores a checkpoint by the segment recall, at ``selection_far``, of a
    small detector trained on its synthetic faults for the validation speed."""
    rng = utils.make_rng(cfg.pipeline.seed, _SELECTION)
    order = rng.permutation(len(source.val_healthy))
    half = max(1, len(order) // 2)
    fit_h = [source.val_healthy[i] for i in sorted(order[:half])]
    score_h = [source.val_healthy[i] for i in sorted(order[half:])] or fit_h
    det_cfg = cfg.detector.replace(epochs=cfg.pipeline.selection_epochs)

    def score(checkpoint: Checkpoint) -> float:
        generator = SelfONN(gan.generator.spec, checkpoint.params)
        synthetic = renormalize(synthesize_faults(generator, fit_h, cfg.pipeline.seed, cfg.gan.batch))
        detector = FaultDetector(det_cfg)
        detector.fit(fit_h, synthetic)
        return recall_at_far(
            detector.segment_scores(score_h), detector.segment_scores(source.val_faulty), cfg.pipeline.selection_far
        )

    return score


def choose_checkpoint(gan: OpGAN, source: SourceData, cfg: Config) -> Checkpoint:
    scorer = detection_scorer(gan, source, cfg) if cfg.pipeline.selection_mode == "detection" else None
    checkpoint = select_checkpoint(gan.checkpoints, cfg.pipeline.selection_mode, scorer)
    logger.info("selected checkpoint iteration=%d val_total=%.6g", checkpoint.iteration, checkpoint.val_loss)
    return checkpoint


def synthesize_target(generator: SelfONN, target: TargetData, cfg: Config) -> List[Segment]:
    return renormalize(synthesize_faults(generator, target.train_healthy, cfg.pipeline.seed, cfg.gan.batch))


def train_target_detector(
    healthy: Sequence[Segment], faulty: Sequence[Segment], cfg: Config
) -> FaultDetector:
    detector = FaultDetector(cfg.detector)
    detector.fit(healthy, faulty)
    return detector


def local_baseline(target: TargetData, test: TestSet, cfg: Config) -> EvalReport:
    """Same detector trained on real target faults; an upper bound for the
    zero-shot result."""
    fault_train, fault_test = split_faulty(target.faulty, cfg.pipeline.train_fraction, cfg.pipeline.seed)
    detector = train_target_detector(target.train_healthy, fault_train, cfg)
    baseline_test = TestSet(fault_test + test.healthy_records)
    return evaluate(detector, baseline_test, cfg.pipeline.exclude_sensors, cfg.pipeline.effective_workers)


def run_pipeline(
    source: Sequence[Record],
    target: Sequence[Record],
    cfg: Config | None = None,
    out_dir: str | None = None,
    source_name: str = "source",
    target_name: str = "target",
) -> PipelineResult:
    cfg = cfg or Config()
    ledger = RunLedger([("source", source_name), ("target", target_name)])
    ledger.update(cfg.items())

    with stage("prepare"):
        source_data = prepare_source(source, cfg)
        target_data = prepare_target(target, cfg)
        if not target_data.faulty:
            raise EmptyInputError("the target dataset has no faulty records to evaluate")
    with stage("train-gan"):
        gan = train_gan(source_data, cfg, out_dir)
    with stage("select"):
        checkpoint = choose_checkpoint(gan, source_data, cfg)
        generator = SelfONN(gan.generator.spec, checkpoint.params)
    with stage("synthesize"):
        synthetic = synthesize_target(generator, target_data, cfg)
    with stage("train-detector"):
        detector = train_target_detector(target_data.train_healthy, synthetic, cfg)
    with stage("evaluate"):
        test = build_test_set(target_data.faulty, target_data.test_healthy)
        report = evaluate(detector, test, cfg.pipeline.exclude_sensors, cfg.pipeline.effective_workers)
    baseline = None
    if cfg.pipeline.local_baseline:
        with stage("baseline"):
            baseline = local_baseline(target_data, test, cfg)

    ledger.update(
        [
            ("val_speed", f"{source_data.val_speed:g}"),
            ("checkpoint_iteration", checkpoint.iteration),
            ("checkpoint_val_loss", repr(checkpoint.val_loss)),
            ("synthetic_segments", len(synthetic)),
            ("test_records", len(test.records)),
            ("summary", report.summary()),
        ]
    )
    if baseline is not None:
        ledger.set("baseline_summary", baseline.summary())

    if out_dir:
        with stage("write"):
            comparison = fault_comparison(target_data.train_healthy, synthetic, target_data.faulty)
            write_outputs(out_dir, report, ledger, generator, detector, baseline, comparison)
    return PipelineResult(report, ledger, checkpoint, generator, detector, baseline)


def write_outputs(
    out_dir: str,
    report: EvalReport,
    ledger: RunLedger,
    generator: SelfONN | None = None,
    detector: FaultDetector | None = None,
    baseline: EvalReport | None = None,
    comparison: Tuple[pd.DataFrame, pd.DataFrame] | None = None,
):
    os.makedirs(out_dir, exist_ok=True)
    report.to_csv(os.path.join(out_dir, REPORT_FILE))
    if baseline is not None:
        baseline.to_csv(os.path.join(out_dir, BASELINE_REPORT_FILE))
    if generator is not None:
        save_model(generator.spec, generator.params, os.path.join(out_dir, GENERATOR_FILE))
    if detector is not None:
        save_model(detector.network.spec, detector.params, os.path.join(out_dir, DETECTOR_FILE))
    if comparison is not None:
        comparison[0].to_csv(os.path.join(out_dir, COMPARISON_TIME_FILE), index=False)
        comparison[1].to_csv(os.path.join(out_dir, COMPARISON_SPECTROGRAM_FILE), index=False)
    ledger.save(out_dir)


def synthetic_records(segments: Sequence[Segment]) -> List[Record]:
    """Synthetic segments regrouped into one record per source record, for writing to disk."""
    grouped = {}
    for s in segments:
        grouped.setdefault(s.source_record, []).append(s)
    records = []
    for source, parts in sorted(grouped.items()):
        parts = sorted(parts, key=lambda s: s.index)
        samples = np.concatenate([p.samples for p in parts]).astype(np.float32)
        records.append(Record(f"{source}_synthetic", parts[0].condition, samples))
    return records



def fault_comparison(
    healthy: Sequence[Segment], synthetic: Sequence[Segment], faulty: Sequence[Record]
) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """One real-healthy / synthetic / real-faulty trio per sensor, in the time
    domain and as power spectrograms.

    ``synthetic`` is aligned with ``healthy``. The faulty segment is the first
    segment of the first faulty record sharing the trio's working condition;
    sensors without such a record are skipped.
    """
    trios = []
    seen = set()
    for h, s in zip(healthy, synthetic):
        sensor = h.condition.sensor
        if sensor in seen:
            continue
        match = next((r for r in faulty if r.condition.key == h.key), None)
        if match is None:
            continue
        seen.add(sensor)
        trios.append((h, s, segments_from_record(match)[0]))

    freqs = np.fft.rfftfreq(WINDOW_LENGTH, 1.0 / SAMPLE_RATE)
    time_parts, spec_parts = [], []
    for trio, segments in enumerate(sorted(trios, key=lambda t: t[0].condition.sensor)):
        for kind, seg in zip(("healthy", "synthetic", "faulty"), segments):
            c = seg.condition
            time_parts.append(
                pd.DataFrame(
                    {
                        "trio": trio,
                        "sensor": c.sensor,
                        "speed": c.speed,
                        "load": c.load,
                        "kind": kind,
                        "source_record": seg.source_record,
                        "sample": np.arange(seg.samples.size),
                        "value": seg.samples,
                    }
                )
            )
            power = spectrogram(seg.samples)
            frames, bins = np.meshgrid(np.arange(power.shape[0]), np.arange(power.shape[1]), indexing="ij")
            spec_parts.append(
                pd.DataFrame(
                    {
                        "trio": trio,
                        "sensor": c.sensor,
                        "kind": kind,
                        "frame": frames.ravel(),
                        "bin": bins.ravel(),
                        "freq_hz": freqs[bins.ravel()],
                        "power": power.ravel(),
                    }
                )
            )
    if not time_parts:
        return pd.DataFrame(columns=TIME_COLUMNS), pd.DataFrame(columns=SPECTROGRAM_COLUMNS)
    return (
        pd.concat(time_parts, ignore_index=True)[TIME_COLUMNS],
        pd.concat(spec_parts, ignore_index=True)[SPECTROGRAM_COLUMNS],
    )
