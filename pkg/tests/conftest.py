import numpy as np
import pytest

from pyselfonn.data import SynthMachine, WorkingCondition
from pyselfonn.dsp import Segment, normalize_segment


@pytest.fixture
def small_machine():
    """Built-in M1 with short records: 3 s healthy, 2 s faulty."""
    machine = SynthMachine.builtin("M1")
    machine.catalog.healthy_seconds = 3
    machine.catalog.faulty_seconds = 2
    return machine


def make_segment(
    rng: np.random.Generator,
    sensor: int = 1,
    speed: float = 600.0,
    fault_type: str = "healthy",
    source: str = "rec",
    index: int = 0,
    length: int = 4096,
) -> Segment:
    samples, _ = normalize_segment(rng.normal(size=length))
    condition = WorkingCondition("M1", sensor, speed, 0.15)
    if fault_type != "healthy":
        condition = condition.with_fault(fault_type, 1.0)
    return Segment(samples, condition, source, index)
