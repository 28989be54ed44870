from .DetectorConfig import DetectorConfig
from .EvalReport import EvalReport
from .evaluation import (
    RecordVerdict,
    benchmark_inference,
    classify_record,
    evaluate,
    recall_at_far,
)
from .FaultDetector import (
    FAULTY,
    HEALTHY,
    FaultDetector,
    build_detector,
    classify_segment,
    train_detector,
)

__all__ = [
    "DetectorConfig",
    "EvalReport",
    "RecordVerdict",
    "benchmark_inference",
    "classify_record",
    "evaluate",
    "recall_at_far",
    "FAULTY",
    "HEALTHY",
    "FaultDetector",
    "build_detector",
    "classify_segment",
    "train_detector",
]
