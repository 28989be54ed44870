import itertools

import numpy as np
import pytest
from numpy.testing import assert_array_equal

from pyselfonn.data import TestRecord, TestSet
from pyselfonn.detection import (
    FAULTY,
    HEALTHY,
    DetectorConfig,
    EvalReport,
    FaultDetector,
    benchmark_inference,
    classify_record,
    classify_segment,
    evaluate,
    recall_at_far,
    train_detector,
)
from pyselfonn.detection.FaultDetector import label_of, targets
from pyselfonn.dsp import normalize_segment
from pyselfonn.errors import EmptyInputError, NotNormalizedError

from .conftest import make_segment

LENGTH = 256


def tiny_config(**changes) -> DetectorConfig:
    values = dict(
        segment_length=LENGTH,
        kernels=(9, 5),
        strides=(4, 2),
        hidden_channels=4,
        dense_hidden=8,
        batch=8,
        epochs=0,
        lr=1e-2,
    )
    values.update(changes)
    return DetectorConfig(**values)


def tone(rng, index=0):
    t = np.arange(LENGTH)
    samples, _ = normalize_segment(np.sin(2 * np.pi * 2 * t / LENGTH + rng.uniform(0, 2 * np.pi)))
    return samples


def noise(rng):
    return normalize_segment(rng.normal(size=LENGTH))[0]


def test_record_rule():
    assert classify_record([HEALTHY] * 30).label == HEALTHY
    assert classify_record([FAULTY] + [HEALTHY] * 29).label == HEALTHY
    verdict = classify_record([HEALTHY, FAULTY, HEALTHY, FAULTY], "r7")
    assert verdict.label == FAULTY
    assert verdict.faulty_segment_count == 2
    assert verdict.record_id == "r7"
    assert classify_record([FAULTY]).label == HEALTHY


def test_record_rule_matches_the_count_for_every_short_record():
    for n in range(1, 7):
        for labels in itertools.product((HEALTHY, FAULTY), repeat=n):
            expected = FAULTY if labels.count(FAULTY) >= 2 else HEALTHY
            assert classify_record(labels).label == expected


def test_record_rule_is_monotone():
    labels = [HEALTHY] * 10
    seen_faulty = False
    for i in range(10):
        labels[i] = FAULTY
        label = classify_record(labels).label
        assert not (seen_faulty and label == HEALTHY)
        seen_faulty = label == FAULTY


def test_record_rule_errors():
    with pytest.raises(EmptyInputError):
        classify_record([])
    with pytest.raises(ValueError):
        classify_record(["broken"])


def test_report_metrics_from_counts():
    report = EvalReport.from_counts([108, 102, 104, 100, 100], 108, 38, 6000, 1, 200)
    assert report.detected == 514
    assert report.total_faulty == 540
    assert report.recall == pytest.approx(514 / 540)
    assert report.far == pytest.approx(38 / 6000)
    assert report.precision == pytest.approx(514 / 515)
    assert report.sensor_recall(1) == 1.0
    assert report.summary().startswith("recall=95.2% (514/540) far=0.6% (38/6000)")

    without = report.without_sensors([1])
    assert without.total_faulty == 432
    assert without.detected == 406


def test_report_lower_recall():
    report = EvalReport.from_counts({1: 81, 2: 82, 3: 82, 4: 82, 5: 82}, 108)
    assert report.detected == 409
    assert report.recall == pytest.approx(0.757, abs=1e-3)
    assert report.far is None
    assert "far=NA" in report.summary()


def test_report_six_sensor_counts():
    report = EvalReport.from_counts([87, 80, 87, 81, 89, 90], 90, 38, 6000)
    assert report.detected == 514 and report.total_faulty == 540
    assert report.recall == pytest.approx(0.9519, abs=1e-4)
    assert report.far == pytest.approx(38 / 6000)
    assert report.sensor_recall(6) == 1.0
    assert report.summary().startswith("recall=95.2% (514/540)")


def test_report_five_sensor_counts():
    report = EvalReport.from_counts([108, 59, 81, 99, 62], 108)
    assert report.detected == 409 and report.total_faulty == 540
    assert report.recall == pytest.approx(0.7574, abs=1e-4)
    assert report.sensor_recall(2) == pytest.approx(59 / 108)
    assert report.without_sensors([2, 5]).recall == pytest.approx(288 / 324)


def test_report_without_data_has_absent_metrics():
    report = EvalReport()
    assert report.recall is None and report.far is None and report.precision is None
    frame = report.to_frame()
    assert list(frame["sensor_id"]) == ["overall"]
    assert "NA" in report.to_csv()


def test_report_csv(tmp_path):
    report = EvalReport.from_counts([3, 4], [4, 4], 1, 10, 0, 2)
    path = tmp_path / "report.csv"
    report.to_csv(str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == "sensor_id,detected,total,recall,far,precision"
    assert lines[1] == "1,3,4,0.750000,NA,NA"
    assert lines[-1] == "overall,7,8,0.875000,0.100000,1.000000"


def test_report_rejects_impossible_counts():
    with pytest.raises(ValueError):
        EvalReport.from_counts([5], [4])
    with pytest.raises(ValueError):
        EvalReport.from_counts([1], [4], 11, 10)
    with pytest.raises(ValueError):
        EvalReport.from_counts({1: 1}, {2: 1})


def test_recall_at_far():
    healthy = np.arange(100, dtype=float)
    faulty = np.array([50.0, 94.5, 95.5, 200.0])
    # at most 5 healthy scores may pass: the threshold is 94
    assert recall_at_far(healthy, faulty, 0.05) == 0.75
    assert recall_at_far(healthy, faulty, 0.0) == 0.25
    with pytest.raises(EmptyInputError):
        recall_at_far([], faulty)


def test_targets_and_readout():
    assert_array_equal(targets(np.array([False, True])), [[1, -1], [-1, 1]])
    assert label_of(np.array([0.2, 0.3])) == FAULTY
    assert label_of(np.array([0.3, 0.2])) == HEALTHY
    assert label_of(np.array([0.25, 0.25])) == HEALTHY


def test_detector_architecture_follows_config():
    detector = FaultDetector(tiny_config())
    shapes = detector.network.layer_shapes()
    assert [out[1] for _, out in shapes[:2]] == [62, 29]
    assert shapes[-1][1] == (2, 0)


def test_zero_epochs_keeps_the_initial_params():
    rng = np.random.default_rng(0)
    detector = FaultDetector(tiny_config())
    initial = detector.network.copy_params()
    params = detector.fit([tone(rng)], [noise(rng)])
    assert all(np.array_equal(a, b) for a, b in zip(initial, params))


def test_fit_needs_both_classes():
    with pytest.raises(EmptyInputError):
        FaultDetector(tiny_config(epochs=1)).fit([tone(np.random.default_rng(0))], [])


def test_unnormalized_input_is_rejected():
    detector = FaultDetector(tiny_config())
    with pytest.raises(NotNormalizedError):
        detector.classify_segment(np.full(LENGTH, 2.0))


def test_detector_learns_a_separable_problem():
    rng = np.random.default_rng(1)
    healthy = [tone(rng) for _ in range(16)]
    faulty = [noise(rng) for _ in range(16)]
    params = train_detector(healthy, faulty, tiny_config(epochs=60))

    test_rng = np.random.default_rng(2)
    labels = [classify_segment(params, tone(test_rng), tiny_config()) for _ in range(10)]
    labels += [classify_segment(params, noise(test_rng), tiny_config()) for _ in range(10)]
    expected = [HEALTHY] * 10 + [FAULTY] * 10
    assert np.mean([a == b for a, b in zip(labels, expected)]) >= 0.9


def test_training_is_reproducible():
    rng = np.random.default_rng(3)
    healthy = [tone(rng) for _ in range(6)]
    faulty = [noise(rng) for _ in range(6)]
    a = train_detector(healthy, faulty, tiny_config(epochs=2))
    b = train_detector(healthy, faulty, tiny_config(epochs=2))
    assert all(np.array_equal(p, q) for p, q in zip(a, b))


class _FixedDetector(object):
    """Labels a segment faulty when its first sample is positive."""

    def classify(self, segments):
        return [FAULTY if s.samples[0] > 0 else HEALTHY for s in segments]


def _record(record_id, sensor, faulty, signs):
    rng = np.random.default_rng(0)
    segments = []
    for i, sign in enumerate(signs):
        s = make_segment(rng, sensor=sensor, index=i, source=record_id, length=8)
        samples = s.samples.copy()
        samples[0] = 0.5 * sign
        segments.append(type(s)(samples, s.condition, record_id, i))
    return TestRecord(record_id, sensor, faulty, segments)


@pytest.fixture
def test_set():
    return TestSet(
        [
            _record("f1", 1, True, [1, 1, -1]),
            _record("f2", 1, True, [1, -1, -1]),
            _record("f3", 2, True, [1, 1, 1]),
            _record("h1", 1, False, [-1, -1, 1]),
            _record("h2", 2, False, [1, 1, -1]),
        ]
    )


@pytest.mark.parametrize("workers", [1, 3])
def test_evaluate_aggregates_records(test_set, workers):
    report = evaluate(_FixedDetector(), test_set, workers=workers)
    assert report.sensors == {1: (1, 2), 2: (1, 1)}
    assert (report.false_alarm_segments, report.healthy_segments) == (3, 6)
    assert (report.false_alarm_records, report.healthy_records) == (1, 2)
    assert report.precision == pytest.approx(2 / 3)


def test_evaluate_excludes_sensors(test_set):
    report = evaluate(_FixedDetector(), test_set, exclude_sensors=[2])
    assert report.sensors == {1: (1, 2)}
    assert (report.false_alarm_segments, report.healthy_segments) == (1, 3)


def test_benchmark_reports_realtime_factors():
    timings = benchmark_inference(FaultDetector(tiny_config()), repeats=2)
    assert set(timings) == {"detector_seconds", "detector_realtime_factor"}
    assert timings["detector_seconds"] > 0
    assert timings["detector_realtime_factor"] == pytest.approx(
        LENGTH / 4096 / timings["detector_seconds"]
    )


@pytest.mark.slow
def test_full_size_detector_fits_separable_segments():
    from pyselfonn.config import load_config

    rng = np.random.default_rng(11)
    t = np.arange(4096) / 4096.0
    healthy, faulty = [], []
    for i in range(32):
        base = np.sin(2 * np.pi * (10 + i % 5) * t + rng.uniform(0, 2 * np.pi))
        healthy.append(normalize_segment(base)[0])
        impulses = np.zeros(4096)
        impulses[rng.integers(0, 128) :: 256] = 4.0
        ringing = np.convolve(impulses, np.exp(-np.arange(64) / 8.0) * np.sin(np.arange(64) * 1.8))[:4096]
        faulty.append(normalize_segment(base + ringing)[0])

    cfg = load_config("desk").detector.replace(epochs=50)
    detector = FaultDetector(cfg)
    detector.fit(healthy, faulty)
    assert detector.classify(healthy) == [HEALTHY] * 32
    assert detector.classify(faulty) == [FAULTY] * 32
