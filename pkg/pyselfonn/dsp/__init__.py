from .segments import (
    SAMPLE_RATE,
    SEGMENT_LENGTH,
    Segment,
    check_normalized,
    normalize_segment,
    segment_record,
    segments_from_record,
)
from .spectral import (
    HOP_LENGTH,
    WINDOW_LENGTH,
    frame_count,
    hanning,
    naive_dft,
    spectral_l1,
    spectrogram,
    spectrogram_backward,
    stft,
)

__all__ = [
    "SAMPLE_RATE",
    "SEGMENT_LENGTH",
    "Segment",
    "check_normalized",
    "normalize_segment",
    "segment_record",
    "segments_from_record",
    "HOP_LENGTH",
    "WINDOW_LENGTH",
    "frame_count",
    "hanning",
    "naive_dft",
    "spectral_l1",
    "spectrogram",
    "spectrogram_backward",
    "stft",
]
