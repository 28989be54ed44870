from __future__ import annotations

import json
import warnings
from typing import Any, Dict, List, Tuple

from .. import utils
from ..errors import DatasetError
from .WorkingCondition import FAULT_TYPES, WorkingCondition

BUILTIN_MACHINES = ("A", "B", "M1", "M2")


class MachineCatalog(object):
    """Working-condition grid of one machine, read from a JSON description.

    The ``machine`` section lists sensors, speeds, loads, the fault
    configurations and the record durations; synthetic machines carry an
    extra ``signal`` section with the simulator parameters.
    """

    def __init__(self, data: Dict[str, Any] | None = None):
        self._loaded: bool = False
        self.name: str = ""
        self.sensors: List[int] = []
        self.speeds: List[float] = []
        self.loads: List[float] = []
        self.faults: List[Tuple[str, float]] = []
        self.fault_configurations: int = 0
        self.defect_range: Tuple[float, float] = (0.0, 0.0)
        self.healthy_seconds: int = 0
        self.faulty_seconds: int = 0
        self.synthetic: bool = False
        self.signal: Dict[str, Any] = {}
        if data is not None:
            self.load_dict(data)

    def load(self, file: str, encoding="utf-8", errors="strict") -> bool:
        with open(file, "r", encoding=encoding, errors=errors) as f:
            data = json.load(f)
        if not isinstance(data, dict) or not data:
            return False
        return self.load_dict(data)

    def load_dict(self, data: Dict[str, Any]) -> bool:
        machine = data.get("machine", None)
        if not isinstance(machine, dict):
            return False
        try:
            self.name = str(machine["name"])
            self.sensors = [int(s) for s in machine["sensors"]]
            self.speeds = [float(s) for s in machine["speeds"]]
            self.loads = [float(v) for v in machine["loads"]]
            self.faults = [(str(t), float(d)) for t, d in machine.get("faults", [])]
            self.fault_configurations = int(machine.get("fault_configurations", len(self.faults)))
            low, high = machine["defect_range"]
            self.defect_range = (float(low), float(high))
            self.healthy_seconds = int(machine["healthy_seconds"])
            self.faulty_seconds = int(machine["faulty_seconds"])
        except (KeyError, TypeError, ValueError) as e:
            warnings.warn(f"Invalid machine description: {e}")
            return False
        self.signal = dict(data.get("signal", {}))
        self.synthetic = bool(self.signal)
        self._loaded = True
        return True

    def is_loaded(self) -> bool:
        return self._loaded

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "machine": {
                "name": self.name,
                "sensors": self.sensors,
                "speeds": self.speeds,
                "loads": self.loads,
                "faults": [list(f) for f in self.faults],
                "fault_configurations": self.fault_configurations,
                "defect_range": list(self.defect_range),
                "healthy_seconds": self.healthy_seconds,
                "faulty_seconds": self.faulty_seconds,
            }
        }
        if self.signal:
            data["signal"] = self.signal
        return data

    def healthy_conditions(self) -> List[WorkingCondition]:
        return [
            WorkingCondition(self.name, sensor, speed, load)
            for sensor in self.sensors
            for speed in self.speeds
            for load in self.loads
        ]

    def conditions(self) -> List[WorkingCondition]:
        """Every healthy and faulty working condition (needs an explicit fault list)."""
        out: List[WorkingCondition] = []
        for healthy in self.healthy_conditions():
            out.append(healthy)
            out.extend(healthy.with_fault(t, d) for t, d in self.faults)
        return out

    def expected_counts(self) -> Tuple[int, int]:
        """(healthy records, faulty records) of the complete corpus."""
        healthy = len(self.sensors) * len(self.speeds) * len(self.loads)
        return healthy, healthy * self.fault_configurations

    def duration_of(self, condition: WorkingCondition) -> int:
        return self.healthy_seconds if condition.is_healthy else self.faulty_seconds

    def validate(self, condition: WorkingCondition):
        if condition.machine != self.name:
            raise DatasetError(f"condition for machine {condition.machine!r} checked against {self.name!r}")
        if condition.sensor not in self.sensors:
            raise DatasetError(f"machine {self.name} has no sensor {condition.sensor}")
        if not any(abs(condition.speed - s) < 1e-6 for s in self.speeds):
            raise DatasetError(f"machine {self.name} does not run at {condition.speed:g} RPM")
        if not any(abs(condition.load - v) < 1e-6 for v in self.loads):
            raise DatasetError(f"machine {self.name} has no {condition.load:g} kN load setting")
        if condition.fault_type not in FAULT_TYPES:
            raise DatasetError(f"unknown fault type {condition.fault_type!r}")
        if condition.fault_type in ("inner", "outer"):
            low, high = self.defect_range
            if not low - 1e-6 <= condition.defect_mm <= high + 1e-6:
                raise DatasetError(
                    f"defect size {condition.defect_mm:g} mm outside [{low:g}, {high:g}] mm"
                )

    @classmethod
    def builtin(cls, name: str) -> "MachineCatalog":
        data = utils.load_builtin_machine(name)
        catalog = cls(data) if data else cls()
        if not catalog.is_loaded():
            raise DatasetError(f"unknown machine id {name!r}")
        return catalog
