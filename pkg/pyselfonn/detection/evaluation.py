from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np

from .. import utils
from ..core.buffers import DTYPE
from ..data.splits import TestRecord, TestSet
from ..dsp.segments import SAMPLE_RATE
from ..errors import EmptyInputError
from ..nn.SelfONN import SelfONN
from .EvalReport import EvalReport
from .FaultDetector import FAULTY, HEALTHY, LABELS, FaultDetector

logger = logging.getLogger(__name__)

# a record is faulty once this many of its segments are
MIN_FAULTY_SEGMENTS = 2


@dataclass(frozen=True)
class RecordVerdict(object):
    record_id: str
    segment_labels: Tuple[str, ...]
    label: str
    faulty_segment_count: int


def classify_record(segment_labels: Sequence[str], record_id: str = "") -> RecordVerdict:
    if len(segment_labels) == 0:
        raise EmptyInputError(f"record {record_id!r} has no segment labels")
    unknown = set(segment_labels) - set(LABELS)
    if unknown:
        raise ValueError(f"unknown segment labels {sorted(unknown)}")
    count = sum(1 for label in segment_labels if label == FAULTY)
    label = FAULTY if count >= MIN_FAULTY_SEGMENTS else HEALTHY
    return RecordVerdict(record_id, tuple(segment_labels), label, count)


def _verdict(detector: FaultDetector, record: TestRecord) -> RecordVerdict:
    return classify_record(detector.classify(record.segments), record.record_id)


def evaluate(
    detector: FaultDetector,
    test_set: TestSet,
    exclude_sensors: Sequence[int] = (),
    workers: int = 1,
) -> EvalReport:
    """Classify every test record and aggregate recall per sensor, segment FAR
    and record precision. Sensors in ``exclude_sensors`` are left out of every
    count."""
    excluded = set(exclude_sensors)
    records = [r for r in test_set.records if r.sensor not in excluded]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            verdicts = list(pool.map(lambda r: _verdict(detector, r), records))
    else:
        verdicts = [_verdict(detector, r) for r in records]

    detected: Dict[int, int] = {}
    totals: Dict[int, int] = {}
    fa_segments = healthy_segments = fa_records = healthy_records = 0
    for record, verdict in zip(records, verdicts):
        if record.faulty:
            totals[record.sensor] = totals.get(record.sensor, 0) + 1
            detected[record.sensor] = detected.get(record.sensor, 0) + (verdict.label == FAULTY)
        else:
            healthy_records += 1
            fa_records += verdict.label == FAULTY
            healthy_segments += len(verdict.segment_labels)
            fa_segments += verdict.faulty_segment_count
    report = EvalReport.from_counts(detected, totals, fa_segments, healthy_segments, fa_records, healthy_records)
    logger.info("evaluation: %s", report.summary())
    return report


def recall_at_far(healthy_scores: np.ndarray, faulty_scores: np.ndarray, far: float = 0.05) -> float:
    """Segment recall at the threshold that lets through at most ``far`` of
    the healthy scores."""
    healthy_scores = np.asarray(healthy_scores, dtype=np.float64)
    faulty_scores = np.asarray(faulty_scores, dtype=np.float64)
    if healthy_scores.size == 0 or faulty_scores.size == 0:
        raise EmptyInputError("recall at fixed FAR needs healthy and faulty scores")
    ordered = np.sort(healthy_scores)[::-1]
    allowed = int(np.floor(far * ordered.size))
    threshold = ordered[allowed] if allowed < ordered.size else -np.inf
    return float(np.mean(faulty_scores > threshold))


def benchmark_inference(
    detector: FaultDetector,
    generator: SelfONN | None = None,
    repeats: int = 20,
    seed: int = 0,
) -> Dict[str, float]:
    """Mean wall-clock seconds per one-second segment and the matching
    real-time factors (segment duration / processing time)."""
    rng = utils.make_rng(seed)
    length = detector.network.spec.input_length
    x = rng.uniform(-1.0, 1.0, length).astype(DTYPE)
    result: Dict[str, float] = {}
    duration = length / SAMPLE_RATE

    detector.classify_segment(x)
    start = time.perf_counter()
    for _ in range(repeats):
        detector.classify_segment(x)
    result["detector_seconds"] = (time.perf_counter() - start) / repeats
    result["detector_realtime_factor"] = duration / result["detector_seconds"]

    if generator is not None:
        noise, g_length = generator.spec.input_channels - 1, generator.spec.input_length
        g_x = rng.uniform(-1.0, 1.0, (1, g_length)).astype(DTYPE)
        inp = np.concatenate([g_x, rng.standard_normal((noise, g_length)).astype(DTYPE)])
        g_duration = g_length / SAMPLE_RATE
        generator(inp)
        start = time.perf_counter()
        for _ in range(repeats):
            generator(inp)
        result["generator_seconds"] = (time.perf_counter() - start) / repeats
        result["generator_realtime_factor"] = g_duration / result["generator_seconds"]
    return result

