from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

from .. import utils
from ..dsp.segments import Segment, segments_from_record
from ..errors import EmptyInputError
from .WorkingCondition import Record

TRAIN_FRACTION = 0.71


@dataclass(eq=False)
class TestRecord(object):
    __test__ = False

    record_id: str
    sensor: int
    faulty: bool
    segments: List[Segment]


@dataclass(eq=False)
class TestSet(object):
    __test__ = False

    records: List[TestRecord] = field(default_factory=list)

    @property
    def faulty_records(self) -> List[TestRecord]:
        return [r for r in self.records if r.faulty]

    @property
    def healthy_records(self) -> List[TestRecord]:
        return [r for r in self.records if not r.faulty]

    @property
    def healthy_segments(self) -> List[Segment]:
        return [s for r in self.healthy_records for s in r.segments]


def split_records(records: Sequence[Record]) -> Tuple[List[Record], List[Record]]:
    """(healthy, faulty), each sorted by record id."""
    ordered = sorted(records, key=lambda r: r.id)
    return [r for r in ordered if r.condition.is_healthy], [r for r in ordered if not r.condition.is_healthy]


def _split_segments(
    records: Sequence[Record], fraction: float, seed: int
) -> Tuple[List[Segment], List[Segment]]:
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"train fraction must lie in (0, 1), got {fraction}")
    train: List[Segment] = []
    test: List[Segment] = []
    for i, record in enumerate(sorted(records, key=lambda r: r.id)):
        segments = segments_from_record(record)
        n = len(segments)
        if n == 0:
            continue
        n_train = int(round(fraction * n))
        if n >= 2:
            n_train = min(max(n_train, 1), n - 1)
        order = utils.make_rng(seed, i).permutation(n)
        chosen = sorted(order[:n_train])
        rest = sorted(order[n_train:])
        train.extend(segments[j] for j in chosen)
        test.extend(segments[j] for j in rest)
    return train, test


def split_healthy(
    healthy: Sequence[Record], fraction: float = TRAIN_FRACTION, seed: int = 0
) -> Tuple[List[Segment], List[Segment]]:
    """Per-condition random split of healthy segments into (train, test).

    Every healthy record is one working condition; each contributes
    ``round(fraction * n)`` segments to the training pool (at least one to
    each side when it has two or more), so both pools cover every condition.
    """
    train, test = _split_segments(healthy, fraction, seed)
    if not train:
        raise EmptyInputError("no healthy segments to split")
    return train, test


def split_faulty(
    faulty: Sequence[Record], fraction: float = TRAIN_FRACTION, seed: int = 0
) -> Tuple[List[Segment], List[TestRecord]]:
    """Real faulty training segments plus the held-out remainder of every
    faulty record as a test record. Used by the local baseline only."""
    train, test = _split_segments(faulty, fraction, seed)
    if not train:
        raise EmptyInputError("no faulty segments to split")
    by_source: Dict[str, List[Segment]] = {}
    for segment in test:
        by_source.setdefault(segment.source_record, []).append(segment)
    records = [
        TestRecord(source, segments[0].condition.sensor, True, segments)
        for source, segments in sorted(by_source.items())
    ]
    return train, records


def build_test_set(
    faulty: Sequence[Record], healthy_test: Sequence[Segment], record_length: int | None = None
) -> TestSet:
    """Faulty records as they are; held-out healthy segments chunked into
    pseudo-records of ``record_length`` segments per source record."""
    test = TestSet()
    lengths = []
    for record in sorted(faulty, key=lambda r: r.id):
        segments = segments_from_record(record)
        if segments:
            lengths.append(len(segments))
            test.records.append(TestRecord(record.id, record.condition.sensor, True, segments))

    chunk = record_length or (max(lengths) if lengths else 30)
    by_source: Dict[str, List[Segment]] = {}
    for segment in healthy_test:
        by_source.setdefault(segment.source_record, []).append(segment)
    for source in sorted(by_source):
        segments = by_source[source]
        for start in range(0, len(segments), chunk):
            part = segments[start : start + chunk]
            test.records.append(
                TestRecord(f"{source}#{start // chunk}", part[0].condition.sensor, False, part)
            )
    return test


def split_by_speed(segments: Sequence[Segment], val_speed: float) -> Tuple[List[Segment], List[Segment]]:
    """(train, validation): validation takes every segment recorded at ``val_speed``."""
    train = [s for s in segments if abs(s.condition.speed - val_speed) > 1e-6]
    val = [s for s in segments if abs(s.condition.speed - val_speed) <= 1e-6]
    return train, val
