"""Print mean normalized resources against L/n or chi/n from a resources run.

    python3 scripts/summarize_resources.py out/resources_vs_size
"""

import csv
import sys
from pathlib import Path


def main(out_dir: str) -> None:
    with open(Path(out_dir) / "resources_summary.csv", newline="") as f:
        rows = list(csv.DictReader(f))
    print(f"{'family':10} {'n':>3} {'hp':>4} {'hp/n':>6} {'S~':>8} {'+-':>8} {'M~':>8} {'+-':>8}")
    for r in sorted(rows, key=lambda r: (r["family"], int(r["hyperparameter"] or 0) / int(r["n"]), int(r["n"]))):
        hp = r["hyperparameter"]
        ratio = f"{int(hp) / int(r['n']):.3f}" if hp else "-"
        print(f"{r['family']:10} {r['n']:>3} {hp or '-':>4} {ratio:>6} "
              f"{float(r['mean_S_norm']):8.4f} {float(r['se_S_norm']):8.1e} "
              f"{float(r['mean_M_norm']):8.4f} {float(r['se_M_norm']):8.1e}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "out/resources_vs_size")
