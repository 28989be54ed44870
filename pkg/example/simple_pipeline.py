from pyselfonn.config import load_config
from pyselfonn.data import SynthMachine
from pyselfonn.pipeline import run_pipeline

source = SynthMachine.builtin("M1").generate()
target = SynthMachine.builtin("M2").generate()
result = run_pipeline(source, target, load_config("desk"), "out/simple_pipeline", "synth:M1", "synth:M2")
print(result.report.to_csv(), end="")
print(result.report.summary())
