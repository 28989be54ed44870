from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..dsp.segments import SAMPLE_RATE

FAULT_TYPES = ("healthy", "inner", "outer", "synthetic")


@dataclass(frozen=True)
class WorkingCondition(object):
    machine: str
    sensor: int
    speed: float
    load: float
    fault_type: str = "healthy"
    defect_mm: float = 0.0

    @property
    def key(self) -> Tuple[str, int, float, float]:
        """Everything but the fault configuration; used to match healthy and faulty data."""
        return self.machine, self.sensor, self.speed, self.load

    @property
    def is_healthy(self) -> bool:
        return self.fault_type == "healthy"

    @property
    def shaft_rate(self) -> float:
        return self.speed / 60.0

    def with_fault(self, fault_type: str, defect_mm: float = 0.0) -> "WorkingCondition":
        return WorkingCondition(self.machine, self.sensor, self.speed, self.load, fault_type, defect_mm)

    def label(self) -> str:
        base = f"{self.machine}_s{self.sensor}_{self.speed:g}rpm_{self.load:g}kN"
        if self.is_healthy:
            return f"{base}_healthy"
        return f"{base}_{self.fault_type}_{self.defect_mm:g}mm"


@dataclass(frozen=True, eq=False)
class Record(object):
    id: str
    condition: WorkingCondition
    samples: np.ndarray

    @property
    def duration(self) -> float:
        return len(self.samples) / SAMPLE_RATE
