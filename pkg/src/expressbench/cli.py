"""Command line entry point: ``expressbench <experiment> [options]``.

Exit codes: 0 success, 2 invalid configuration or existing output,
3 strict-mode violation, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import yaml

from .config import EXPERIMENTS, RunConfig, default_config_dict
from .errors import CapacityError, ValidationError
from .runner import OutputExistsError, run

FULL_SCALE = {"resource_samples": 10_000, "pairs": 10_000_000}


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="expressbench", description="Expressibility and resource benchmarks for state families.")
    sub = p.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        s = sub.add_parser(name)
        s.add_argument("--config", type=Path, help="YAML run configuration (defaults to a small built-in grid)")
        s.add_argument("--seed", type=_u64, help="master seed; overrides the config value")
        s.add_argument("--threads", type=_positive, help="worker threads (results do not depend on it)")
        s.add_argument("--out", type=Path, help="output directory; overrides the config value")
        s.add_argument("--strict", action="store_true", help="exit nonzero on Welch-bound violations")
        s.add_argument("--overwrite", action="store_true", help="replace outputs of a previous run")
        s.add_argument("--full-scale", action="store_true", help="use 1e4 resource samples and 1e7 pairs")
    return p


def load_config(args: argparse.Namespace) -> RunConfig:
    if args.config is not None:
        data = yaml.safe_load(args.config.read_text(encoding="utf-8"))
        if not isinstance(data, dict):
            raise ValidationError(f"{args.config}: config document must be a mapping")
        declared = data.get("experiment", args.experiment)
        if declared != args.experiment:
            raise ValidationError(f"{args.config} is a {declared!r} config, not {args.experiment!r}")
        data["experiment"] = args.experiment
    else:
        data = default_config_dict(args.experiment)
    if args.seed is not None:
        data["seed"] = args.seed
    if args.threads is not None:
        data["threads"] = args.threads
    if args.out is not None:
        data["output_dir"] = str(args.out)
    if args.full_scale:
        data["sampling"] = {**data.get("sampling", {}), **FULL_SCALE}
    return RunConfig.from_dict(data)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args)
        result = run(config, Path(config.output_dir), overwrite=args.overwrite, strict=args.strict)
    except (ValidationError, CapacityError, OutputExistsError, yaml.YAMLError) as e:
        print(f"expressbench: error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"expressbench: I/O error: {e}", file=sys.stderr)
        return 4
    for f in result.files:
        print(f)
    if result.exit_code:
        for v in result.manifest.get("welch_violations", []):
            print(f"expressbench: Welch violation: {v}", file=sys.stderr)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
