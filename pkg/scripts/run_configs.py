"""Run every YAML config in configs/ (or the ones named) through the CLI.

    python3 scripts/run_configs.py                      # all configs
    python3 scripts/run_configs.py configs/haar_reference.yaml --threads 4
"""

import argparse
import sys
import time
from pathlib import Path

import yaml

from expressbench.cli import main as cli_main

ROOT = Path(__file__).resolve().parent.parent


def main() -> int:
    p = argparse.ArgumentParser()
    p.add_argument("configs", nargs="*", type=Path)
    p.add_argument("--threads", default="1")
    p.add_argument("--overwrite", action="store_true")
    p.add_argument("--full-scale", action="store_true")
    args = p.parse_args()
    paths = args.configs or sorted((ROOT / "configs").glob("*.yaml"))
    worst = 0
    for path in paths:
        experiment = yaml.safe_load(path.read_text())["experiment"]
        argv = [experiment, "--config", str(path), "--threads", args.threads]
        if args.overwrite:
            argv.append("--overwrite")
        if args.full_scale:
            argv.append("--full-scale")
        t0 = time.perf_counter()
        code = cli_main(argv)
        print(f"{path.name}: exit {code} after {time.perf_counter() - t0:.1f}s", file=sys.stderr)
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
