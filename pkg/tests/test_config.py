import json

import pytest

from pyselfonn.config import Config, PipelineConfig, load_config, parse_config_text
from pyselfonn.detection import DetectorConfig
from pyselfonn.errors import ConfigError
from pyselfonn.gan import GanConfig
from pyselfonn.RunLedger import RunLedger


def test_defaults_come_from_the_builtin_config():
    cfg = Config()
    assert cfg.gan.lam == 100.0
    assert cfg.gan.disc_q is None and cfg.gan.discriminator_q == 3
    assert cfg.gan.disc_kernels == (4, 4, 4, 4, 4, 6)
    assert cfg.detector.kernels == (81, 41, 21, 7, 7)
    assert cfg.pipeline.train_fraction == 0.71
    assert cfg.pipeline.exclude_sensors == ()
    assert cfg.gan == GanConfig() and cfg.detector == DetectorConfig() and cfg.pipeline == PipelineConfig()


def test_builtin_desk_config():
    cfg = load_config("desk")
    assert cfg.gan.gen_width == 16
    assert cfg.gan.max_iters == 8
    assert cfg.detector.epochs == 30
    assert cfg.pipeline.deterministic
    assert cfg.pipeline.effective_workers == 1
    # untouched fields keep their defaults
    assert cfg.gan.lam == 100.0
    assert cfg.gan.beta1 == 0.9


def test_parse_key_value_text():
    text = """
    # comment
    gan.lam = 10   # inline
    gan.disc_kernels = 4,4,6
    pipeline.exclude_sensors = 1, 3
    """
    values = parse_config_text(text)
    assert values == {"gan": {"lam": "10", "disc_kernels": "4,4,6"}, "pipeline": {"exclude_sensors": "1, 3"}}
    cfg = Config().update(values)
    assert cfg.gan.lam == 10.0
    assert cfg.gan.disc_kernels == (4, 4, 6)
    assert cfg.pipeline.exclude_sensors == (1, 3)


@pytest.mark.parametrize(
    "text",
    ["gan.lam", "lam=10", "gan.lam=ten", "gan.color=red", "unknown.x=1", "gan.batch=0", "pipeline.workers=1.5"],
)
def test_bad_config_text(text):
    with pytest.raises(ConfigError):
        Config().update(parse_config_text(text))


def test_config_files(tmp_path):
    flat = tmp_path / "run.cfg"
    flat.write_text("detector.epochs=3\npipeline.selection_mode=detection\n")
    cfg = load_config(str(flat))
    assert cfg.detector.epochs == 3
    assert cfg.pipeline.selection_mode == "detection"

    js = tmp_path / "run.json"
    js.write_text(json.dumps({"gan": {"q": 2, "disc_q": 1}, "pipeline": {"val_speed": 900}}))
    cfg = load_config(str(js))
    assert cfg.gan.q == 2 and cfg.gan.discriminator_q == 1
    assert cfg.pipeline.val_speed == 900.0

    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(str(broken))
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "absent.cfg"))


def test_with_seed_reaches_every_section():
    cfg = Config().with_seed(42)
    assert cfg.gan.seed == cfg.detector.seed == cfg.pipeline.seed == 42


def test_deterministic_forces_one_worker():
    assert PipelineConfig(workers=4).effective_workers == 4
    assert PipelineConfig(workers=4, deterministic=True).effective_workers == 1


def test_ledger_rebuilds_the_config(tmp_path):
    cfg = load_config("desk").with_seed(7).update({"pipeline": {"exclude_sensors": "2"}, "gan": {"disc_q": "1"}})
    ledger = RunLedger([("source", "synth:M1"), ("checkpoint_iteration", 4)])
    ledger.update(cfg.items())
    path = ledger.save(str(tmp_path))
    assert path.endswith("ledger.txt")

    again = RunLedger.load(str(tmp_path))
    assert again.items() == ledger.items()
    assert again.get("checkpoint_iteration") == "4"
    assert again.config() == cfg


def test_ledger_rejects_multiline_values_and_bad_lines():
    with pytest.raises(ValueError):
        RunLedger([("summary", "a\nb")])
    with pytest.raises(ConfigError):
        RunLedger.from_text("no equals sign here\n")
