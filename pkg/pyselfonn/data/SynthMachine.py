from __future__ import annotations

from dataclasses import asdict, dataclass, replace
from typing import Any, Dict, List, Tuple

import numpy as np
from scipy import signal as sps

from .. import utils
from ..dsp.segments import SAMPLE_RATE
from ..errors import DatasetError
from .MachineCatalog import MachineCatalog
from .WorkingCondition import Record, WorkingCondition

_FAULT_CODES = {"healthy": 0, "outer": 1, "inner": 2}


@dataclass(frozen=True)
class SynthMachineParams(object):
    harmonic_amplitudes: Tuple[float, ...] = (1.0, 0.6, 0.3)
    resonance_hz: float = 1200.0
    decay_rate: float = 400.0
    outer_multiplier: float = 3.57
    inner_multiplier: float = 5.43
    impulse_gain: float = 1.5
    noise_sigma: float = 0.05
    slip: float = 0.01
    sensor_gains: Tuple[float, ...] = (1.0,)
    sensor_smoothing: Tuple[float, ...] = (0.0,)
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.resonance_hz < SAMPLE_RATE / 2:
            raise ValueError(f"resonance {self.resonance_hz} Hz must lie in (0, {SAMPLE_RATE / 2}) Hz")
        if not self.harmonic_amplitudes or min(self.harmonic_amplitudes) <= 0.0:
            raise ValueError("harmonic amplitudes must be positive")
        if min(self.sensor_gains) <= 0.0 or self.impulse_gain <= 0.0:
            raise ValueError("gains must be positive")
        if any(not 0.0 <= a < 1.0 for a in self.sensor_smoothing):
            raise ValueError("sensor smoothing coefficients must lie in [0, 1)")
        if len(self.sensor_gains) != len(self.sensor_smoothing):
            raise ValueError("one gain and one smoothing coefficient per sensor")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SynthMachineParams":
        kwargs = dict(data)
        for key in ("harmonic_amplitudes", "sensor_gains", "sensor_smoothing"):
            if key in kwargs:
                kwargs[key] = tuple(float(v) for v in kwargs[key])
        try:
            return cls(**kwargs)
        except TypeError as e:
            raise DatasetError(f"invalid synthetic machine parameters: {e}") from e

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        for key in ("harmonic_amplitudes", "sensor_gains", "sensor_smoothing"):
            data[key] = list(data[key])
        return data


class SynthMachine(object):
    """Desk-scale stand-in for a test rig: shaft harmonics plus, for faulty
    bearings, a train of resonance-ringing impulses at the race fault rate."""

    def __init__(self, catalog: MachineCatalog, params: SynthMachineParams | None = None):
        if params is None:
            if not catalog.synthetic:
                raise DatasetError(f"machine {catalog.name} has no simulator parameters")
            params = SynthMachineParams.from_dict(catalog.signal)
        if len(params.sensor_gains) < len(catalog.sensors):
            raise DatasetError(f"machine {catalog.name}: simulator defines fewer sensors than the catalog")
        self.catalog = catalog
        self.params = params

    @classmethod
    def builtin(cls, name: str, seed: int | None = None) -> "SynthMachine":
        """``seed`` replaces the machine's own noise and phase seed."""
        catalog = MachineCatalog.builtin(name)
        machine = cls(catalog)
        if seed is not None:
            machine.params = replace(machine.params, seed=int(seed))
            catalog.signal["seed"] = int(seed)
        return machine

    def _sensor_slot(self, sensor: int) -> int:
        return self.catalog.sensors.index(sensor)

    def record(self, condition: WorkingCondition, seconds: int | None = None) -> Record:
        self.catalog.validate(condition)
        if condition.fault_type == "synthetic":
            raise DatasetError("the simulator only produces healthy, inner and outer conditions")
        p = self.params
        seconds = self.catalog.duration_of(condition) if seconds is None else seconds
        n = int(seconds) * SAMPLE_RATE
        t = np.arange(n) / SAMPLE_RATE
        f_r = condition.shaft_rate

        key_ids = (condition.sensor, int(round(condition.speed)), int(round(condition.load * 1000)))
        phase_rng = utils.make_rng(p.seed, *key_ids)
        rng = utils.make_rng(
            p.seed,
            *key_ids,
            _FAULT_CODES[condition.fault_type],
            int(round(condition.defect_mm * 1000)),
        )

        phases = phase_rng.uniform(0.0, 2.0 * np.pi, size=len(p.harmonic_amplitudes))
        x = np.zeros(n)
        for h, (amp, phi) in enumerate(zip(p.harmonic_amplitudes, phases), start=1):
            x += amp * np.sin(2.0 * np.pi * h * f_r * t + phi)
        x += p.noise_sigma * rng.standard_normal(n)

        if not condition.is_healthy:
            x += self._impulses(condition, n, rng)

        slot = self._sensor_slot(condition.sensor)
        alpha = p.sensor_smoothing[slot]
        if alpha > 0.0:
            x = sps.lfilter([1.0 - alpha], [1.0, -alpha], x)
        x *= p.sensor_gains[slot]
        return Record(condition.label(), condition, x.astype(np.float32))

    def _impulses(self, condition: WorkingCondition, n: int, rng: np.random.Generator) -> np.ndarray:
        p = self.params
        f_r = condition.shaft_rate
        multiplier = p.inner_multiplier if condition.fault_type == "inner" else p.outer_multiplier
        period = 1.0 / (multiplier * f_r)

        count = int(np.ceil(n / SAMPLE_RATE / period)) + 1
        intervals = period * (1.0 + p.slip * rng.standard_normal(count))
        times = rng.uniform(0.0, period) + np.concatenate([[0.0], np.cumsum(intervals[:-1])])
        times = times[times < n / SAMPLE_RATE]

        amplitudes = np.full(times.shape, p.impulse_gain * condition.defect_mm)
        if condition.fault_type == "inner":
            # inner race defects pass through the load zone once per revolution
            amplitudes *= 1.0 + 0.5 * np.cos(2.0 * np.pi * f_r * times)

        train = np.zeros(n)
        np.add.at(train, np.minimum((times * SAMPLE_RATE).astype(int), n - 1), amplitudes)
        tau = np.arange(int(6.0 / p.decay_rate * SAMPLE_RATE) + 1) / SAMPLE_RATE
        ring = np.exp(-p.decay_rate * tau) * np.sin(2.0 * np.pi * p.resonance_hz * tau)
        return sps.fftconvolve(train, ring)[:n]

    def generate(self, seconds: Dict[str, int] | None = None) -> List[Record]:
        """All working conditions of the machine, healthy ones first per sensor/speed/load."""
        seconds = seconds or {}
        records = []
        for condition in self.catalog.conditions():
            kind = "healthy" if condition.is_healthy else "faulty"
            records.append(self.record(condition, seconds.get(kind)))
        return records


def synth_machine(params: SynthMachineParams, condition: WorkingCondition, catalog: MachineCatalog | None = None) -> Record:
    catalog = catalog or MachineCatalog.builtin(condition.machine)
    return SynthMachine(catalog, params).record(condition)


def generate_dataset(
    name: str, seconds: Dict[str, int] | None = None, seed: int | None = None
) -> Tuple[MachineCatalog, List[Record]]:
    machine = SynthMachine.builtin(name, seed)
    return machine.catalog, machine.generate(seconds)
