import numpy as np
import pytest

from pyselfonn.cli import build_parser, main
from pyselfonn.data import load_dataset
from pyselfonn.detection import DetectorConfig, build_detector
from pyselfonn.nn import init_params, save_model

TINY = """
gan.gen_width=2
gan.disc_width=2
gan.q=2
gan.max_iters=1
detector.hidden_channels=4
detector.dense_hidden=8
detector.epochs=1
detector.batch=8
"""


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "tiny.cfg"
    path.write_text(TINY)
    return str(path)


def gen_data(out, machine, *extra):
    return main(
        ["gen-data", "--machine", machine, "--healthy-seconds", "3", "--faulty-seconds", "2", "--out", str(out)]
        + list(extra)
    )


def test_usage_errors_exit_with_2(capsys):
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 2
    err = capsys.readouterr().err.strip().splitlines()
    assert err[0].startswith("usage: pyselfonn")
    assert err[-1].startswith("error stage=usage type=ArgumentError message=")

    with pytest.raises(SystemExit) as info:
        main(["train-gan"])
    assert info.value.code == 2
    err = capsys.readouterr().err.strip().splitlines()
    assert err[0].startswith("usage: pyselfonn train-gan")
    assert err[-1].startswith("error stage=usage type=ArgumentError message=")
    assert "--source" in err[-1]

    with pytest.raises(SystemExit) as info:
        main(["gen-data", "--machine", "M1", "--seed", "x"])
    assert info.value.code == 2
    assert capsys.readouterr().err.strip().splitlines()[-1].startswith("error stage=usage")


def test_parser_knows_every_command():
    parser = build_parser()
    for argv in (
        ["gen-data", "--machine", "M1"],
        ["train-gan", "--source", "d"],
        ["synthesize", "--generator", "g", "--target", "t"],
        ["train-detector", "--target", "t", "--synthetic", "s"],
        ["evaluate", "--detector", "d", "--target", "t"],
        ["pipeline", "--source", "s", "--target", "t", "--baseline"],
        ["inspect", "model.sonn", "--bench"],
    ):
        args = parser.parse_args(argv + ["--seed", "3", "--deterministic"])
        assert args.seed == 3 and args.deterministic


def test_gen_data_writes_a_loadable_dataset(tmp_path, capsys):
    assert gen_data(tmp_path / "m2", "M2") == 0
    records, manifest = load_dataset(str(tmp_path / "m2"))
    assert len(records) == 12 * 7
    assert "wrote 84 records" in capsys.readouterr().out


def test_inspect_describes_a_model(tmp_path, capsys):
    spec = build_detector(DetectorConfig())
    path = tmp_path / "detector.sonn"
    save_model(spec, init_params(spec, np.random.default_rng(0)), str(path))
    assert main(["inspect", str(path)]) == 0
    out = capsys.readouterr().out
    assert out.startswith("network input_channels=1 input_length=4096")
    assert "total params=63458" in out


def test_errors_print_one_line_and_exit_1(tmp_path, capsys):
    assert main(["inspect", str(tmp_path / "missing.sonn")]) == 1
    err = capsys.readouterr().err.strip().splitlines()
    assert err[-1].startswith("error stage=inspect type=FileNotFoundError message=")

    assert main(["inspect", "x.sonn", "--config", "no-such-config"]) == 1
    assert capsys.readouterr().err.strip().startswith("error stage=config type=ConfigError")


def test_missing_dataset_is_reported_by_command(tmp_path, capsys, config_file):
    gen_data(tmp_path / "m1", "M1")
    capsys.readouterr()
    code = main(
        ["pipeline", "--source", str(tmp_path / "missing"), "--target", str(tmp_path / "m1"), "--config", config_file]
    )
    assert code == 1
    assert capsys.readouterr().err.strip().startswith("error stage=pipeline type=DatasetError")


def test_stagewise_commands(tmp_path, capsys, config_file):
    gen_data(tmp_path / "m1", "M1")
    gen_data(tmp_path / "m2", "M2")
    common = ["--config", config_file, "--deterministic"]

    assert main(["train-gan", "--source", str(tmp_path / "m1"), "--out", str(tmp_path / "gan")] + common) == 0
    assert (tmp_path / "gan" / "generator.sonn").is_file()
    assert (tmp_path / "gan" / "gan" / "metrics.csv").is_file()

    assert (
        main(
            ["synthesize", "--generator", str(tmp_path / "gan" / "generator.sonn"),
             "--target", str(tmp_path / "m2"), "--out", str(tmp_path / "syn")] + common
        )
        == 0
    )
    synthetic, _ = load_dataset(str(tmp_path / "syn"))
    assert len(synthetic) == 12
    assert all(r.condition.fault_type == "synthetic" for r in synthetic)

    assert (
        main(
            ["train-detector", "--target", str(tmp_path / "m2"), "--synthetic", str(tmp_path / "syn"),
             "--out", str(tmp_path / "det")] + common
        )
        == 0
    )
    capsys.readouterr()
    assert (
        main(
            ["evaluate", "--detector", str(tmp_path / "det" / "detector.sonn"),
             "--target", str(tmp_path / "m2"), "--out", str(tmp_path / "eval")] + common
        )
        == 0
    )
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "sensor_id,detected,total,recall,far,precision"
    assert (tmp_path / "eval" / "report.csv").is_file()
    assert (tmp_path / "eval" / "ledger.txt").is_file()


def test_pipeline_command(tmp_path, capsys, config_file):
    gen_data(tmp_path / "m1", "M1")
    gen_data(tmp_path / "m2", "M2")
    capsys.readouterr()
    code = main(
        ["pipeline", "--source", str(tmp_path / "m1"), "--target", str(tmp_path / "m2"),
         "--config", config_file, "--out", str(tmp_path / "run"), "--seed", "5"]
    )
    assert code == 0
    assert "overall" in capsys.readouterr().out
    ledger = (tmp_path / "run" / "ledger.txt").read_text()
    assert "pipeline.seed=5" in ledger
    assert "gan.max_iters=1" in ledger


def test_gen_data_honours_the_seed(tmp_path):
    for name, seed in (("a", "7"), ("b", "7"), ("c", "8")):
        assert gen_data(tmp_path / name, "M1", "--seed", seed) == 0
    a, b, c = (load_dataset(str(tmp_path / name))[0][0].samples for name in "abc")
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
