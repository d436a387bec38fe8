"""Command-line entry point.

    typicality-lab run <experiment> [--config FILE] [--seed S]
                                    [--workers W] [--out DIR]
    typicality-lab list [--json]
    typicality-lab validate --config FILE

Exit codes: 0 when every metric passes, 1 on metric failure, 2 on
configuration errors, 3 on numerical or integration errors. The default
output root is the TYPICALITY_LAB_OUT environment variable, falling back
to ./runs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict

from ..errors import ConfigurationError, DomainError, IntegrationError
from . import registry
from .config import build_config

EXIT_PASS = 0
EXIT_METRIC_FAILURE = 1
EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_ERROR = 3


def _make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="typicality-lab",
        description="reproducible desk-scale experiments on typicality and statistics "
        "in deterministic dynamics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment and write its artifacts")
    run.add_argument("experiment", nargs="?", help="experiment name (see 'list')")
    run.add_argument("--config", help="YAML config file")
    run.add_argument("--seed", type=int, help="override the seed")
    run.add_argument("--workers", type=int, help="override the worker count")
    run.add_argument("--out", help="override the output directory")

    lst = sub.add_parser("list", help="list every experiment with defaults")
    lst.add_argument("--json", action="store_true", help="machine-readable catalog")

    val = sub.add_parser("validate", help="check a config file and echo the resolved values")
    val.add_argument("--config", required=True, help="YAML config file")
    return parser


def _default_out(experiment: str, seed: int) -> str:
    root = os.environ.get("TYPICALITY_LAB_OUT", "runs")
    return os.path.join(root, experiment, f"seed{seed}")


def _cmd_run(args) -> int:
    if args.experiment is None and args.config is None:
        print("run needs an experiment name or a --config file", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    config = build_config(
        registry.EXPERIMENTS,
        experiment=args.experiment,
        config_path=args.config,
        seed=args.seed,
        workers=args.workers,
        out=args.out,
    )
    report = registry.run_experiment(config)
    out_dir = config.out or _default_out(config.experiment, config.seed)
    registry.write_report_artifacts(report, out_dir)
    for metric in report.metrics:
        status = "pass" if metric.passed else ("FAIL" if metric.passed is not None else "info")
        print(f"[{status}] {metric.name} = {metric.value:.6g}" + (f" (tol {metric.tolerance:g})" if metric.tolerance is not None else ""))
    for key, value in report.flags.items():
        print(f"[flag] {key}: {value}")
    print(f"report written to {out_dir}")
    return EXIT_PASS if report.passed() else EXIT_METRIC_FAILURE


def _cmd_list(args) -> int:
    if args.json:
        print(json.dumps(registry.catalog(), indent=2))
    else:
        print(registry.list_experiments())
    return EXIT_PASS


def _cmd_validate(args) -> int:
    config = build_config(registry.EXPERIMENTS, config_path=args.config)
    echo = {
        "experiment": config.experiment,
        "seed": config.seed,
        "workers": config.workers,
        "out": config.out,
        "tolerances": config.tolerances,
        "params": asdict(config.params),
    }
    print(json.dumps(echo, indent=2))
    return EXIT_PASS


def main(argv: list[str] | None = None) -> int:
    parser = _make_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "list":
            return _cmd_list(args)
        if args.command == "validate":
            return _cmd_validate(args)
        return EXIT_CONFIG_ERROR
    except (ConfigurationError, DomainError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except IntegrationError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL_ERROR


if __name__ == "__main__":
    sys.exit(main())
