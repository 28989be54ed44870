from __future__ import annotations

import argparse
import logging
import os
import sys
from typing import Sequence

from . import __version__
from .config import Config, load_config
from .data.dataset import load_dataset, parse_dataset_spec, write_dataset
from .data.splits import build_test_set
from .data.SynthMachine import SynthMachine
from .detection.evaluation import benchmark_inference, evaluate
from .detection.FaultDetector import FaultDetector
from .dsp.segments import segments_from_record
from .errors import PipelineStageError
from .nn.NetworkSpec import format_spec, layer_shapes
from .nn.SelfONN import SelfONN
from .nn.serialization import load_model, save_model
from .pipeline import (
    DETECTOR_FILE,
    GENERATOR_FILE,
    REPORT_FILE,
    choose_checkpoint,
    prepare_source,
    prepare_target,
    run_pipeline,
    synthesize_target,
    synthetic_records,
    train_gan,
    train_target_detector,
)
from .RunLedger import RunLedger

logger = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    """Usage errors get the same one-line error format as failed commands."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(_error_line("usage", argparse.ArgumentError(None, message)), file=sys.stderr)
        self.exit(2)


def _common() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="seed for every random stream")
    common.add_argument("--config", default=None, help="key=value or JSON config file, or a built-in name")
    common.add_argument("--deterministic", action="store_true", help="single-threaded, bit-reproducible run")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("-v", "--verbose", action="count", default=0)
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(
        prog="pyselfonn", description="Zero-shot bearing fault detection with operational GANs."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", parents=[common], help="write a synthetic machine dataset")
    p.add_argument("--machine", required=True, help="built-in synthetic machine (M1, M2)")
    p.add_argument("--healthy-seconds", type=int, default=None)
    p.add_argument("--faulty-seconds", type=int, default=None)

    p = sub.add_parser("train-gan", parents=[common], help="train the Op-GAN on a source machine")
    p.add_argument("--source", required=True, help="dataset directory or synth:<machine>")

    p = sub.add_parser("synthesize", parents=[common], help="synthesize faults from target healthy data")
    p.add_argument("--generator", required=True, help="generator model file")
    p.add_argument("--target", required=True)

    p = sub.add_parser("train-detector", parents=[common], help="train the detector on a target machine")
    p.add_argument("--target", required=True)
    p.add_argument("--synthetic", required=True, help="directory written by 'synthesize'")

    p = sub.add_parser("evaluate", parents=[common], help="evaluate a detector on held-out target data")
    p.add_argument("--detector", required=True, help="detector model file")
    p.add_argument("--target", required=True)

    p = sub.add_parser("pipeline", parents=[common], help="run all four stages")
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--baseline", action="store_true", help="also train on real target faults")

    p = sub.add_parser("inspect", parents=[common], help="describe a model file")
    p.add_argument("model")
    p.add_argument("--bench", action="store_true", help="time inference per one-second segment")
    return parser


def _config(args) -> Config:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    if args.deterministic:
        cfg = Config(cfg.gan, cfg.detector, cfg.pipeline.replace(deterministic=True))
    if getattr(args, "baseline", False):
        cfg = Config(cfg.gan, cfg.detector, cfg.pipeline.replace(local_baseline=True))
    return cfg


def _ledger(args, cfg: Config, **extra) -> RunLedger:
    ledger = RunLedger([("command", args.command)])
    ledger.update(extra.items())
    ledger.update(cfg.items())
    return ledger


def cmd_gen_data(args, cfg: Config):
    machine = SynthMachine.builtin(args.machine, args.seed)
    if args.healthy_seconds is not None:
        machine.catalog.healthy_seconds = args.healthy_seconds
    if args.faulty_seconds is not None:
        machine.catalog.faulty_seconds = args.faulty_seconds
    records = machine.generate()
    write_dataset(records, args.out, [machine.catalog])
    print(f"wrote {len(records)} records of machine {args.machine} to {args.out}")


def cmd_train_gan(args, cfg: Config):
    records, _ = parse_dataset_spec(args.source, args.seed)
    source = prepare_source(records, cfg)
    gan = train_gan(source, cfg, args.out)
    checkpoint = choose_checkpoint(gan, source, cfg)
    save_model(gan.generator.spec, checkpoint.params, os.path.join(args.out, GENERATOR_FILE))
    _ledger(
        args, cfg, source=args.source, checkpoint_iteration=checkpoint.iteration,
        checkpoint_val_loss=repr(checkpoint.val_loss),
    ).save(args.out)
    print(f"checkpoint iteration={checkpoint.iteration} val_total={checkpoint.val_loss:.6g}")


def cmd_synthesize(args, cfg: Config):
    spec, params = load_model(args.generator)
    records, catalogs = parse_dataset_spec(args.target, args.seed)
    target = prepare_target(records, cfg)
    synthetic = synthesize_target(SelfONN(spec, params), target, cfg)
    out = synthetic_records(synthetic)
    write_dataset(out, args.out, catalogs)
    _ledger(args, cfg, generator=args.generator, target=args.target).save(args.out)
    print(f"wrote {len(synthetic)} synthetic segments in {len(out)} records to {args.out}")


def cmd_train_detector(args, cfg: Config):
    records, _ = parse_dataset_spec(args.target, args.seed)
    target = prepare_target(records, cfg)
    synthetic_data, _ = load_dataset(args.synthetic)
    synthetic = [s for r in synthetic_data for s in segments_from_record(r)]
    detector = train_target_detector(target.train_healthy, synthetic, cfg)
    os.makedirs(args.out, exist_ok=True)
    save_model(detector.network.spec, detector.params, os.path.join(args.out, DETECTOR_FILE))
    _ledger(args, cfg, target=args.target, synthetic=args.synthetic).save(args.out)
    print(f"trained detector on {len(target.train_healthy)} healthy and {len(synthetic)} synthetic segments")


def cmd_evaluate(args, cfg: Config):
    spec, params = load_model(args.detector)
    detector = FaultDetector.from_network(spec, params, cfg.detector)
    records, _ = parse_dataset_spec(args.target, args.seed)
    target = prepare_target(records, cfg)
    test = build_test_set(target.faulty, target.test_healthy)
    report = evaluate(detector, test, cfg.pipeline.exclude_sensors, cfg.pipeline.effective_workers)
    os.makedirs(args.out, exist_ok=True)
    report.to_csv(os.path.join(args.out, REPORT_FILE))
    _ledger(args, cfg, detector=args.detector, target=args.target, summary=report.summary()).save(args.out)
    print(report.to_csv(), end="")


def cmd_pipeline(args, cfg: Config):
    source, _ = parse_dataset_spec(args.source, args.seed)
    target, _ = parse_dataset_spec(args.target, args.seed)
    result = run_pipeline(source, target, cfg, args.out, args.source, args.target)
    print(result.report.to_csv(), end="")
    if result.baseline is not None:
        print(f"baseline: {result.baseline.summary()}")


def cmd_inspect(args, cfg: Config):
    spec, params = load_model(args.model)
    print(format_spec(spec), end="")
    for layer, (in_shape, out_shape) in zip(spec.layers, layer_shapes(spec)):
        print(f"{layer.name:<8} {layer.kind:<8} params={layer.n_params():>8} in={in_shape} out={out_shape}")
    print(f"total params={sum(int(p.size) for p in params)}")
    if args.bench:
        network = SelfONN(spec, params)
        if spec.layers[-1].kind == "dense":
            timings = benchmark_inference(FaultDetector.from_network(spec, params, cfg.detector))
        else:
            timings = benchmark_inference(FaultDetector(cfg.detector), network)
        for key, value in timings.items():
            print(f"{key}={value:.6g}")


COMMANDS = {
    "gen-data": cmd_gen_data,
    "train-gan": cmd_train_gan,
    "synthesize": cmd_synthesize,
    "train-detector": cmd_train_detector,
    "evaluate": cmd_evaluate,
    "pipeline": cmd_pipeline,
    "inspect": cmd_inspect,
}


def _error_line(stage: str, error: BaseException) -> str:
    message = " ".join(str(error).split())
    return f"error stage={stage} type={type(error).__name__} message={message}"


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    stage = "config"
    try:
        cfg = _config(args)
        stage = args.command
        COMMANDS[args.command](args, cfg)
    except PipelineStageError as e:
        print(_error_line(e.stage, e.cause), file=sys.stderr)
        return 1
    except Exception as e:
        logger.debug("command failed", exc_info=True)
        print(_error_line(stage, e), file=sys.stderr)
        return 1
    return 0