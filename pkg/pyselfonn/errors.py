from __future__ import annotations

from typing import Any, List


class SelfONNError(Exception):
    pass


class ShapeMismatchError(SelfONNError, ValueError):
    pass


class NonFiniteError(SelfONNError, FloatingPointError):
    pass


class SpecError(SelfONNError, ValueError):
    pass


class ModelFormatError(SelfONNError, ValueError):
    pass


class ConfigError(SelfONNError, ValueError):
    pass


class DatasetError(SelfONNError, OSError):
    pass


class NotNormalizedError(SelfONNError, ValueError):
    pass


class EmptyInputError(SelfONNError, ValueError):
    pass


class TrainingDivergedError(SelfONNError):
    """Raised when a loss turns non-finite.

    ``checkpoints`` holds everything recorded before the divergence, so the
    caller can still fall back to the last good generator.
    """

    def __init__(self, message: str, checkpoints: List[Any] | None = None):
        super().__init__(message)
        self.checkpoints: List[Any] = list(checkpoints or [])


class PipelineStageError(SelfONNError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause
