import warnings

import numpy as np
import pytest
from numpy.testing import assert_allclose

from pyselfonn.data import Record, WorkingCondition
from pyselfonn.dsp import (
    check_normalized,
    frame_count,
    hanning,
    naive_dft,
    normalize_segment,
    segment_record,
    segments_from_record,
    spectral_l1,
    spectrogram,
    spectrogram_backward,
    stft,
)
from pyselfonn.errors import NotNormalizedError, ShapeMismatchError

from .gradcheck import numeric_grad, rel_error


def test_default_stft_shape():
    x = np.random.default_rng(0).uniform(-1, 1, 4096)
    assert frame_count(4096) == 31
    assert spectrogram(x).shape == (31, 129)
    assert stft(np.zeros((3, 4096))).shape == (3, 31, 129)


def test_hann_window_is_symmetric_and_peaks_at_one():
    w = hanning(256)
    assert w[0] == pytest.approx(0.0)
    assert w[-1] == pytest.approx(0.0)
    assert_allclose(w, w[::-1])
    assert_allclose(hanning(5), [0.0, 0.5, 1.0, 0.5, 0.0], atol=1e-12)
    with pytest.raises(ValueError):
        hanning(1)


def test_fft_matches_naive_dft():
    rng = np.random.default_rng(1)
    x = rng.uniform(-1, 1, 4096)
    z = stft(x)
    for i in (0, 7, 30):
        frame = x[i * 128 : i * 128 + 256] * hanning(256)
        assert np.max(np.abs(z[i] - naive_dft(frame))) < 1e-4


def test_pure_tone_lands_in_its_bin():
    t = np.arange(4096) / 4096
    power = spectrogram(np.sin(2 * np.pi * 512 * t))
    # 512 Hz at 4096 Hz over a 256-sample window is bin 32
    assert np.all(np.argmax(power, axis=1) == 32)


def test_short_signal_is_rejected():
    with pytest.raises(ShapeMismatchError):
        spectrogram(np.zeros(100))


def test_spectrogram_gradient():
    rng = np.random.default_rng(2)
    x = rng.normal(size=64)
    g = rng.normal(size=(7, 9))
    analytic = spectrogram_backward(x, g, window=16, hop=8)
    numeric = numeric_grad(lambda: float(np.sum(spectrogram(x, 16, 8) * g)), x)
    assert rel_error(analytic, numeric) < 1e-6


@pytest.mark.parametrize("mode", ["power", "complex"])
def test_spectral_l1_gradient(mode):
    rng = np.random.default_rng(3)
    a = rng.normal(size=(2, 64))
    b = rng.normal(size=(2, 64))
    loss, grad = spectral_l1(a, b, mode, window=16, hop=8)
    numeric = numeric_grad(lambda: spectral_l1(a, b, mode, window=16, hop=8)[0], a)
    assert loss > 0
    assert rel_error(grad, numeric) < 1e-5


def test_spectral_l1_of_identical_signals_is_zero():
    x = np.random.default_rng(4).uniform(-1, 1, 4096)
    for mode in ("power", "complex"):
        loss, grad = spectral_l1(x, x.copy(), mode)
        assert loss == 0.0
        assert not grad.any()
    with pytest.raises(ValueError):
        spectral_l1(x, x, "phase")


def test_normalization_maps_extremes_to_unit_range():
    x = np.array([3.0, 5.0, 4.0, 7.0])
    y, degenerate = normalize_segment(x)
    assert not degenerate
    assert y.dtype == np.float32
    assert_allclose(y, [-1.0, 0.0, -0.5, 1.0])
    check_normalized(y)


def test_constant_segment_is_degenerate():
    y, degenerate = normalize_segment(np.full(16, 2.5))
    assert degenerate
    assert not y.any()


def test_check_normalized():
    check_normalized(np.array([-1.0, 1.0 + 1e-6]))
    with pytest.raises(NotNormalizedError):
        check_normalized(np.array([0.0, 1.01]))


def test_segmenting_drops_the_partial_tail():
    assert len(segment_record(np.zeros(3 * 4096 + 100))) == 3
    with pytest.raises(ValueError):
        segment_record(np.zeros(8192), fs=8000)


def test_segments_from_record_warns_on_constant_windows():
    rng = np.random.default_rng(5)
    samples = np.concatenate([rng.normal(size=4096), np.ones(4096)]).astype(np.float32)
    record = Record("r1", WorkingCondition("M1", 1, 1000.0, 0.0), samples)
    with pytest.warns(UserWarning, match="constant"):
        segments = segments_from_record(record)
    assert [s.index for s in segments] == [0, 1]
    assert [s.degenerate for s in segments] == [False, True]
    assert segments[0].source_record == "r1"
    assert segments[0].samples.min() == -1.0 and segments[0].samples.max() == 1.0


def test_segments_from_clean_record_do_not_warn():
    samples = np.sin(np.arange(8192) / 10.0)
    record = Record("r2", WorkingCondition("M1", 1, 1000.0, 0.0), samples)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert len(segments_from_record(record)) == 2


def test_hann_window_of_four():
    assert_allclose(hanning(4), [0.0, 0.75, 0.75, 0.0], atol=1e-12)


def test_spectrogram_of_silence_and_scaling():
    assert not spectrogram(np.zeros(4096)).any()
    x = np.random.default_rng(6).uniform(-1, 1, 4096)
    for a in (0.5, 3.0, -2.0):
        assert_allclose(spectrogram(a * x), a * a * spectrogram(x), rtol=1e-9, atol=1e-9)


def test_normalization_over_many_segments():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        x = rng.normal(loc=rng.uniform(-5, 5), scale=rng.uniform(0.01, 10), size=4096)
        y, degenerate = normalize_segment(x)
        assert not degenerate
        assert y[np.argmin(x)] == -1.0 and y[np.argmax(x)] == 1.0
        assert y.min() == -1.0 and y.max() == 1.0


def test_normalization_is_affine_invariant_and_idempotent():
    rng = np.random.default_rng(8)
    for _ in range(50):
        x = rng.normal(size=4096)
        y, _ = normalize_segment(x)
        shifted, _ = normalize_segment(rng.uniform(0.1, 100) * x + rng.uniform(-50, 50))
        assert_allclose(shifted, y, atol=1e-5)
        again, _ = normalize_segment(y)
        assert_allclose(again, y, atol=1e-6)


def test_segments_concatenate_to_the_record_prefix():
    x = np.random.default_rng(9).normal(size=5 * 4096 + 1234)
    parts = segment_record(x)
    assert len(parts) == 5
    assert_allclose(np.concatenate(parts), x[: 5 * 4096])


@pytest.mark.parametrize("length,count", [(4095, 0), (4096, 1), (122880, 30)])
def test_segment_counts(length, count):
    assert len(segment_record(np.zeros(length))) == count
