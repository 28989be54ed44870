from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import TYPE_CHECKING, List, Tuple

import numpy as np

from ..errors import NotNormalizedError

if TYPE_CHECKING:
    from ..data.WorkingCondition import Record, WorkingCondition

SAMPLE_RATE = 4096
SEGMENT_LENGTH = 4096
NORMALIZED_TOLERANCE = 1e-5


@dataclass(frozen=True, eq=False)
class Segment(object):
    """One second of normalized vibration from ``source_record``."""

    samples: np.ndarray
    condition: "WorkingCondition"
    source_record: str
    index: int
    degenerate: bool = False

    @property
    def key(self):
        return self.condition.key


def segment_record(samples: np.ndarray, fs: int = SAMPLE_RATE) -> List[np.ndarray]:
    """Consecutive non-overlapping one-second windows; the partial tail is dropped."""
    if fs != SAMPLE_RATE:
        raise ValueError(f"records must be sampled at {SAMPLE_RATE} Hz, got {fs}")
    samples = np.asarray(samples)
    count = samples.shape[-1] // SEGMENT_LENGTH
    return [samples[i * SEGMENT_LENGTH : (i + 1) * SEGMENT_LENGTH] for i in range(count)]


def normalize_segment(x: np.ndarray) -> Tuple[np.ndarray, bool]:
    """Map min to -1 and max to +1. Returns ``(normalized, degenerate)``.

    A constant segment has no range to map; it comes back as zeros with the
    degenerate flag set.
    """
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise ValueError("segment contains NaN or Inf")
    x_min = x.min()
    x_max = x.max()
    if x_max == x_min:
        return np.zeros(x.shape, dtype=np.float32), True
    out = 2.0 * (x - x_min) / (x_max - x_min) - 1.0
    return out.astype(np.float32), False


def check_normalized(x: np.ndarray):
    x = np.asarray(x)
    if x.size and (x.min() < -1.0 - NORMALIZED_TOLERANCE or x.max() > 1.0 + NORMALIZED_TOLERANCE):
        raise NotNormalizedError(
            f"segment range [{x.min():.4g}, {x.max():.4g}] is outside [-1, 1]; normalize it first"
        )


def segments_from_record(record: "Record") -> List[Segment]:
    segments: List[Segment] = []
    degenerate = 0
    for i, window in enumerate(segment_record(record.samples)):
        samples, flag = normalize_segment(window)
        degenerate += flag
        segments.append(Segment(samples, record.condition, record.id, i, flag))
    if degenerate:
        warnings.warn(f"Record {record.id}: {degenerate} constant segment(s) mapped to zeros")
    return segments
