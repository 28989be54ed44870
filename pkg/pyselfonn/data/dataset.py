from __future__ import annotations

import json
import os
import warnings
from collections import Counter
from typing import Dict, Iterable, List, Tuple

import numpy as np
import pandas as pd

from ..dsp.segments import SAMPLE_RATE
from ..errors import DatasetError
from .MachineCatalog import MachineCatalog
from .WorkingCondition import Record, WorkingCondition

MANIFEST = "manifest.csv"
MACHINE_FILE = "machine.json"
MANIFEST_COLUMNS = ["file", "machine", "sensor", "speed", "load", "fault_type", "defect_mm", "duration_s"]
_SAMPLE_DTYPE = np.dtype("<f4")


def write_dataset(records: Iterable[Record], root: str, catalogs: Iterable[MachineCatalog] = ()) -> pd.DataFrame:
    """One directory per machine, one raw float file per record, one manifest."""
    os.makedirs(root, exist_ok=True)
    rows = []
    for record in records:
        c = record.condition
        rel = os.path.join(c.machine, f"{record.id}.f32")
        path = os.path.join(root, rel)
        os.makedirs(os.path.dirname(path), exist_ok=True)
        np.ascontiguousarray(record.samples, dtype=_SAMPLE_DTYPE).tofile(path)
        rows.append(
            [rel.replace(os.sep, "/"), c.machine, c.sensor, c.speed, c.load, c.fault_type, c.defect_mm, record.duration]
        )
    for catalog in catalogs:
        directory = os.path.join(root, catalog.name)
        os.makedirs(directory, exist_ok=True)
        with open(os.path.join(directory, MACHINE_FILE), "w", encoding="utf-8") as f:
            json.dump(catalog.to_dict(), f, indent=2)
    manifest = pd.DataFrame(rows, columns=MANIFEST_COLUMNS)
    manifest.to_csv(os.path.join(root, MANIFEST), index=False)
    return manifest


def _catalog_for(root: str, machine: str, cache: Dict[str, MachineCatalog]) -> MachineCatalog:
    if machine in cache:
        return cache[machine]
    local = os.path.join(root, machine, MACHINE_FILE)
    if os.path.isfile(local):
        catalog = MachineCatalog()
        if not catalog.load(local):
            raise DatasetError(f"invalid machine description {local}")
    else:
        catalog = MachineCatalog.builtin(machine)
    cache[machine] = catalog
    return catalog


def load_dataset(root: str) -> Tuple[List[Record], pd.DataFrame]:
    manifest_path = os.path.join(root, MANIFEST)
    if not os.path.isdir(root):
        raise DatasetError(f"dataset directory not found: {root}")
    if not os.path.isfile(manifest_path):
        raise DatasetError(f"no {MANIFEST} in {root}")
    manifest = pd.read_csv(manifest_path)
    missing = [c for c in MANIFEST_COLUMNS if c not in manifest.columns]
    if missing:
        raise DatasetError(f"manifest is missing columns {missing}")
    if manifest.empty:
        raise DatasetError(f"manifest in {root} lists no records")

    catalogs: Dict[str, MachineCatalog] = {}
    records: List[Record] = []
    for row in manifest.itertuples(index=False):
        condition = WorkingCondition(
            str(row.machine),
            int(row.sensor),
            float(row.speed),
            float(row.load),
            str(row.fault_type),
            float(row.defect_mm),
        )
        catalog = _catalog_for(root, condition.machine, catalogs)
        catalog.validate(condition)

        path = os.path.join(root, str(row.file))
        if not os.path.isfile(path):
            raise DatasetError(f"record file missing: {path}")
        samples = np.fromfile(path, dtype=_SAMPLE_DTYPE).astype(np.float32)
        duration = float(row.duration_s)
        if samples.size != int(round(duration * SAMPLE_RATE)):
            raise DatasetError(
                f"{row.file}: {samples.size} samples, manifest says {duration:g} s "
                f"({int(round(duration * SAMPLE_RATE))} samples)"
            )
        if condition.fault_type != "synthetic" and int(round(duration)) != catalog.duration_of(condition):
            raise DatasetError(
                f"{row.file}: {duration:g} s record, machine {catalog.name} records last "
                f"{catalog.duration_of(condition)} s"
            )
        record_id = os.path.splitext(os.path.basename(str(row.file)))[0]
        records.append(Record(record_id, condition, samples))

    _check_inventory(records, catalogs)
    return records, manifest


def _check_inventory(records: List[Record], catalogs: Dict[str, MachineCatalog]):
    real = [r for r in records if r.condition.fault_type != "synthetic"]
    counts = Counter((r.condition.machine, r.condition.is_healthy) for r in real)
    present = {r.condition.machine for r in real}
    for name, catalog in catalogs.items():
        if catalog.fault_configurations == 0 or name not in present:
            continue
        healthy, faulty = counts[(name, True)], counts[(name, False)]
        want_healthy, want_faulty = catalog.expected_counts()
        if (healthy, faulty) != (want_healthy, want_faulty):
            warnings.warn(
                f"Partial corpus for machine {name}: {healthy}/{want_healthy} healthy and "
                f"{faulty}/{want_faulty} faulty records"
            )


def parse_dataset_spec(spec: str, seed: int | None = None) -> Tuple[List[Record], List[MachineCatalog]]:
    """``synth:<name>`` builds a built-in synthetic machine in memory; anything else is a directory.

    ``seed`` only applies to synthetic machines.
    """
    if spec.startswith("synth:"):
        from .SynthMachine import SynthMachine

        machine = SynthMachine.builtin(spec.split(":", 1)[1], seed)
        return machine.generate(), [machine.catalog]
    records, manifest = load_dataset(spec)
    cache: Dict[str, MachineCatalog] = {}
    for machine in sorted(set(manifest["machine"].astype(str))):
        _catalog_for(spec, machine, cache)
    return records, list(cache.values())
