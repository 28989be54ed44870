from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Sequence, Tuple

import pandas as pd

REPORT_COLUMNS = ["sensor_id", "detected", "total", "recall", "far", "precision"]
OVERALL = "overall"


def _ratio(num: int, den: int) -> float | None:
    return num / den if den else None


@dataclass
class EvalReport(object):
    """Record-wise recall per sensor, segment-wise false-alarm rate and
    record-wise precision. Metrics whose denominator is empty are ``None``."""

    sensors: Dict[int, Tuple[int, int]] = field(default_factory=dict)
    false_alarm_segments: int = 0
    healthy_segments: int = 0
    false_alarm_records: int = 0
    healthy_records: int = 0

    @classmethod
    def from_counts(
        cls,
        detected: Mapping[int, int] | Sequence[int],
        totals: Mapping[int, int] | Sequence[int] | int,
        false_alarm_segments: int = 0,
        healthy_segments: int = 0,
        false_alarm_records: int = 0,
        healthy_records: int = 0,
    ) -> "EvalReport":
        """Sequences are numbered from sensor 1; an integer total applies to every sensor."""
        if not isinstance(detected, Mapping):
            detected = {i: d for i, d in enumerate(detected, start=1)}
        if isinstance(totals, int):
            totals = {s: totals for s in detected}
        elif not isinstance(totals, Mapping):
            totals = {i: t for i, t in enumerate(totals, start=1)}
        if set(detected) != set(totals):
            raise ValueError("detected and total counts name different sensors")
        sensors = {}
        for s in sorted(detected):
            d, t = int(detected[s]), int(totals[s])
            if not 0 <= d <= t:
                raise ValueError(f"sensor {s}: detected {d} outside [0, {t}]")
            sensors[s] = (d, t)
        if not 0 <= false_alarm_segments <= healthy_segments:
            raise ValueError("false alarm segment count exceeds the healthy segment count")
        if not 0 <= false_alarm_records <= healthy_records:
            raise ValueError("false alarm record count exceeds the healthy record count")
        return cls(sensors, false_alarm_segments, healthy_segments, false_alarm_records, healthy_records)

    @property
    def detected(self) -> int:
        return sum(d for d, _ in self.sensors.values())

    @property
    def total_faulty(self) -> int:
        return sum(t for _, t in self.sensors.values())

    def sensor_recall(self, sensor: int) -> float | None:
        d, t = self.sensors[sensor]
        return _ratio(d, t)

    @property
    def recall(self) -> float | None:
        return _ratio(self.detected, self.total_faulty)

    @property
    def far(self) -> float | None:
        return _ratio(self.false_alarm_segments, self.healthy_segments)

    @property
    def precision(self) -> float | None:
        return _ratio(self.detected, self.detected + self.false_alarm_records)

    def without_sensors(self, sensors: Sequence[int]) -> "EvalReport":
        kept = {s: c for s, c in self.sensors.items() if s not in set(sensors)}
        return EvalReport(
            kept, self.false_alarm_segments, self.healthy_segments, self.false_alarm_records, self.healthy_records
        )

    def to_frame(self) -> pd.DataFrame:
        rows: List[list] = [
            [str(s), d, t, _ratio(d, t), None, None] for s, (d, t) in sorted(self.sensors.items())
        ]
        rows.append([OVERALL, self.detected, self.total_faulty, self.recall, self.far, self.precision])
        frame = pd.DataFrame(rows, columns=REPORT_COLUMNS)
        return frame.astype({"recall": float, "far": float, "precision": float})

    def to_csv(self, path: str | None = None) -> str | None:
        return self.to_frame().to_csv(path, index=False, na_rep="NA", float_format="%.6f")

    def summary(self) -> str:
        def pct(v):
            return "NA" if v is None else f"{100.0 * v:.1f}%"

        return (
            f"recall={pct(self.recall)} ({self.detected}/{self.total_faulty}) "
            f"far={pct(self.far)} ({self.false_alarm_segments}/{self.healthy_segments}) "
            f"precision={pct(self.precision)}"
        )
