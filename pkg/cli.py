"""
Command-line interface for the uplink scheduling simulator.

Verbs: generate, train, evaluate, compare, bench-latency. Every flag overrides one
path of the run configuration; --set overrides any path.
"""
import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

from dotenv import load_dotenv

from src.config import SCHEDULERS, RunConfig, load_config, parse_override
from src.errors import ConfigurationError, SolverInfeasibleError
from src.harness import ExperimentRunner, compare_schedulers, records_to_csv, run_id_for
from src.network.channel import load_realizations, save_realizations
from src.reports.generator import ReportGenerator

logger = logging.getLogger("uplink")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3

# flag dest -> configuration path
FLAG_PATHS = {
    "scheduler": "scheduler",
    "tech": "tech",
    "reward_mode": "reward_mode",
    "fading": "fading",
    "cells": "cells",
    "devices_per_cell": "devices_per_cell",
    "sc_count": "sc_count",
    "timeslots": "timeslots",
    "omega_train": "omega_train",
    "omega_test": "omega_test",
    "seed": "seed",
    "mixed_tech": "mixed_tech",
    "measure_latency": "measure_latency",
    "keep_traces": "keep_traces",
    "run_dir": "run_dir",
}

REPORT_WRITERS = {
    "md": ("report.md", ReportGenerator.generate_markdown),
    "html": ("report.html", ReportGenerator.generate_html),
    "json": ("report.json", ReportGenerator.generate_json),
    "pdf": ("report.pdf", ReportGenerator.generate_pdf),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON or YAML run configuration")
    common.add_argument("--preset", default="default", help="base preset: default or tiny")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="PATH=VALUE",
                        help="override one configuration path, e.g. hyper.epsilon=0.1")
    common.add_argument("--log-level", default=None, help="logging level (default: $UPLINK_LOG_LEVEL or INFO)")
    common.add_argument("--scheduler", choices=SCHEDULERS)
    common.add_argument("--tech")
    common.add_argument("--reward-mode", dest="reward_mode", choices=("edge", "centralized"))
    common.add_argument("--fading", dest="fading", action="store_true", default=None)
    common.add_argument("--no-fading", dest="fading", action="store_false")
    common.add_argument("--cells", type=int)
    common.add_argument("--devices-per-cell", dest="devices_per_cell", type=int)
    common.add_argument("--sc-count", dest="sc_count", type=int)
    common.add_argument("--timeslots", type=int)
    common.add_argument("--omega-train", dest="omega_train", type=int)
    common.add_argument("--omega-test", dest="omega_test", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--mixed-tech", dest="mixed_tech", action="store_true", default=None)
    common.add_argument("--measure-latency", dest="measure_latency", action="store_true", default=None)
    common.add_argument("--keep-traces", dest="keep_traces", action="store_true", default=None)
    common.add_argument("--run-dir", dest="run_dir")

    parser = argparse.ArgumentParser(prog="uplink", description="Uplink RB-sharing scheduler simulator")
    verbs = parser.add_subparsers(dest="verb", required=True)

    generate = verbs.add_parser("generate", parents=[common], help="write the train and test realization sets")
    generate.add_argument("--out", help="output directory (default: <run_dir>/<run_id>/realizations)")

    train = verbs.add_parser("train", parents=[common], help="train DRL agents or calibrate baselines")
    train.add_argument("--realizations", help="directory holding train.json from 'generate'")

    evaluate = verbs.add_parser("evaluate", parents=[common], help="train if needed, evaluate, write the run")
    evaluate.add_argument("--realizations", help="directory holding train.json / test.json from 'generate'")
    evaluate.add_argument("--checkpoints", help="load DRL agents from this directory instead of training")
    evaluate.add_argument("--report", choices=sorted(REPORT_WRITERS), action="append", default=[])

    compare = verbs.add_parser("compare", parents=[common], help="run several schedulers on the same network")
    compare.add_argument("--schedulers", required=True, help="comma-separated scheduler names")
    compare.add_argument("--report", choices=sorted(REPORT_WRITERS), action="append", default=[])

    verbs.add_parser("bench-latency", parents=[common], help="median per-timeslot train and test latency")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    overrides = [(path, getattr(args, dest)) for dest, path in FLAG_PATHS.items() if getattr(args, dest) is not None]
    overrides += [parse_override(text) for text in args.overrides]
    return load_config(args.config, preset=args.preset, overrides=overrides)


def _run_path(config: RunConfig) -> Path:
    return Path(config.run_dir) / run_id_for(config)


def _load_split(directory: Optional[str], split: str):
    if not directory:
        return None
    path = Path(directory) / f"{split}.json"
    if not path.exists():
        return None
    return load_realizations(path)


def _write_reports(report: dict, directory: Path, formats: List[str]) -> None:
    for fmt in formats:
        name, writer = REPORT_WRITERS[fmt]
        content = writer(report)
        target = directory / name
        if isinstance(content, bytes):
            target.write_bytes(content)
        else:
            target.write_text(content)
        logger.info("Wrote %s", target)


def _print_summary(summary: dict) -> None:
    print(f"{summary['scheduler']} ({summary['tech']}, {summary['omega_test']} test realizations)")
    for metric in ("am", "gm", "hm"):
        stats = summary["metrics"].get(metric)
        if stats:
            print(f"  {metric.upper()}  q1={stats['q1']:.1f}  median={stats['median']:.1f}  q3={stats['q3']:.1f}")


def cmd_generate(args, config: RunConfig) -> int:
    runner = ExperimentRunner(config)
    out = Path(args.out) if args.out else _run_path(config) / "realizations"
    for split in ("train", "test"):
        path = save_realizations(out / f"{split}.json", runner.generate(split))
        print(f"Wrote {path}")
    return EXIT_OK


def cmd_train(args, config: RunConfig) -> int:
    runner = ExperimentRunner(config)
    train_set = _load_split(args.realizations, "train") or runner.generate("train")
    records = runner.train(train_set)
    path = _run_path(config)
    path.mkdir(parents=True, exist_ok=True)
    (path / "config.json").write_text(config.to_json())
    if records:
        (path / "train_metrics.csv").write_text(records_to_csv(records))
    if runner.environment is not None:
        runner.environment.save(path / "checkpoints")
        print(f"Saved checkpoints to {path / 'checkpoints'}")
    if runner.compensation:
        print("Calibrated ICI compensation (dBm): " + json.dumps(runner.compensation, sort_keys=True))
    return EXIT_OK


def cmd_evaluate(args, config: RunConfig) -> int:
    runner = ExperimentRunner(config)
    train_set = _load_split(args.realizations, "train")
    test_set = _load_split(args.realizations, "test")
    if args.checkpoints:
        test_set = test_set or runner.generate("test")
        runner.load_checkpoints(args.checkpoints, test_set[0])
    result = runner.run_experiment(train_set=train_set, test_set=test_set)
    _write_reports(result.to_report(), result.run_path, args.report)
    _print_summary(result.summary)
    print(f"Results in {result.run_path}")
    return EXIT_OK


def cmd_compare(args, config: RunConfig) -> int:
    names = [name.strip() for name in args.schedulers.split(",") if name.strip()]
    configs = [config.with_overrides([("scheduler", name)]).validate() for name in names]
    comparison = compare_schedulers(configs, write=True)
    directory = Path(config.run_dir) / f"compare-{config.tech}-seed{config.seed}"
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "comparison.json").write_text(json.dumps(comparison.to_dict(), indent=2, sort_keys=True))
    _write_reports(comparison.to_dict(), directory, args.report)
    print(ReportGenerator.generate_markdown(comparison.to_dict()))
    return EXIT_OK


def cmd_bench_latency(args, config: RunConfig) -> int:
    latency = ExperimentRunner(config).bench_latency()
    for phase in ("train_ms", "test_ms"):
        value = latency[phase]
        print(f"{config.scheduler} {phase}: {'-' if value is None else f'{value:.4f}'}")
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "compare": cmd_compare,
    "bench-latency": cmd_bench_latency,
}


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    level = (args.log_level or os.getenv("UPLINK_LOG_LEVEL", "INFO")).upper()
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        config = resolve_config(args)
        return COMMANDS[args.verb](args, config)
    except ConfigurationError as e:
        logger.error("Configuration error: %s", e)
        return EXIT_CONFIG
    except SolverInfeasibleError as e:
        logger.error("Benchmark infeasible: %s", e)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
