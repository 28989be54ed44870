import numpy as np

from pyselfonn.data import SynthMachine, split_records
from pyselfonn.dsp import segments_from_record
from pyselfonn.gan import GanConfig, OpGAN, PairPool, select_checkpoint, synthesize_faults
from pyselfonn.nn import SelfONN

records = SynthMachine.builtin("M1").generate({"healthy": 6, "faulty": 3})
healthy, faulty = split_records(records)
pool = PairPool(
    [s for r in healthy for s in segments_from_record(r)],
    [s for r in faulty for s in segments_from_record(r)],
)

gan = OpGAN(GanConfig(gen_width=8, disc_width=8, max_iters=4, checkpoint_every=2))
checkpoints = gan.train(pool, pool.sample(np.random.default_rng(0))[:16])
best = select_checkpoint(checkpoints)
print(f"checkpoint {best.iteration}: val_total={best.val_loss:.4f}")

generator = SelfONN(gan.generator.spec, best.params)
synthetic = synthesize_faults(generator, pool.healthy[:4])
print([s.condition.label() for s in synthetic])
