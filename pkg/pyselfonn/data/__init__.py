from .dataset import load_dataset, parse_dataset_spec, write_dataset
from .MachineCatalog import MachineCatalog
from .splits import (
    TestRecord,
    TestSet,
    build_test_set,
    split_by_speed,
    split_faulty,
    split_healthy,
    split_records,
)
from .SynthMachine import SynthMachine, SynthMachineParams, generate_dataset, synth_machine
from .WorkingCondition import Record, WorkingCondition

__all__ = [
    "load_dataset",
    "parse_dataset_spec",
    "write_dataset",
    "MachineCatalog",
    "TestRecord",
    "TestSet",
    "build_test_set",
    "split_by_speed",
    "split_faulty",
    "split_healthy",
    "split_records",
    "SynthMachine",
    "SynthMachineParams",
    "generate_dataset",
    "synth_machine",
    "Record",
    "WorkingCondition",
]
