from pyselfonn.data import SynthMachine, build_test_set, split_healthy, split_records
from pyselfonn.detection import DetectorConfig, FaultDetector, evaluate
from pyselfonn.dsp import segments_from_record

records = SynthMachine.builtin("M2").generate({"healthy": 12, "faulty": 4})
healthy, faulty = split_records(records)
train_h, test_h = split_healthy(healthy)
train_f = [s for r in faulty[::2] for s in segments_from_record(r)]

detector = FaultDetector(DetectorConfig(epochs=10, lr=1e-3, batch=16))
detector.fit(train_h, train_f)
report = evaluate(detector, build_test_set(faulty[1::2], test_h))
print(report.summary())
