"""``dyadlab <experiment> [flags]``: run one experiment and write its report."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import ConfigError, RunConfig
from .experiments import EXPERIMENTS, list_experiments, run_experiment

EXIT_OK, EXIT_CONFIG, EXIT_VIOLATION = 0, 1, 2


def _json_object(text: str):
    try:
        value = json.loads(text)
    except json.JSONDecodeError as exc:
        raise argparse.ArgumentTypeError(f"invalid JSON: {exc}") from exc
    if not isinstance(value, dict):
        raise argparse.ArgumentTypeError("expected a JSON object")
    return value


def _depths(text: str):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad depth list {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    names = ", ".join(EXPERIMENTS)
    parser = argparse.ArgumentParser(
        prog="dyadlab",
        description="Seeded dyadic experiments with deterministic JSON or CSV reports.",
        epilog=f"experiments: {names}.  Use 'dyadlab list' for descriptions.",
    )
    parser.add_argument("experiment", help="experiment name, or 'list'")
    parser.add_argument("--depth", type=int, help="lattice depth n (1..12, default 8)")
    parser.add_argument("--depths", type=_depths, help="comma-separated depths, e.g. 4,6,8")
    parser.add_argument("--trials", type=int, help="trials per depth (default 100)")
    parser.add_argument("--seed", type=int, help="master seed (default 1)")
    parser.add_argument("--p", type=float, help="exponent p > 1 (default 2)")
    parser.add_argument("--weight", type=_json_object, help='weight spec, e.g. {"kind":"cascade","rho":0.3}')
    parser.add_argument("--symbols", type=_json_object, help='symbol generator, e.g. {"kind":"chain"}')
    parser.add_argument("--out", help="report path (default: stdout)")
    parser.add_argument("--format", choices=("json", "csv"), help="report format (default json)")
    parser.add_argument("--config", help="JSON config file; flags override its values")
    return parser


def _config_from_args(args) -> RunConfig:
    overrides = {
        k: v for k, v in vars(args).items()
        if k != "config" and v is not None
    }
    if args.config:
        return RunConfig.from_file(args.config, overrides)
    return RunConfig.from_mapping(overrides)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage; usage errors are config errors here
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG

    if args.experiment == "list":
        for name, desc in list_experiments():
            print(f"{name:20s} {desc}")
        return EXIT_OK
    if args.experiment not in EXPERIMENTS:
        parser.print_usage(sys.stderr)
        print(f"dyadlab: unknown experiment {args.experiment!r}; try 'dyadlab list'", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = _config_from_args(args)
    except ConfigError as exc:
        parser.print_usage(sys.stderr)
        print(f"dyadlab: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    report = run_experiment(cfg)
    text = report.to_csv() if cfg.format == "csv" else report.to_json()
    if cfg.out:
        try:
            Path(cfg.out).write_text(text)
        except OSError as exc:
            print(f"dyadlab: cannot write {cfg.out}: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    else:
        sys.stdout.write(text)
    for v in report.violations[:20]:
        print(f"violation: {v}", file=sys.stderr)
    if report.violations:
        print(f"dyadlab: {len(report.violations)} contract violation(s)", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
