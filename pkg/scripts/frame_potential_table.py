"""Tabulate rescaled frame potentials (rows: ensembles, columns: t).

    python3 scripts/frame_potential_table.py out/frame_potentials_n10
"""

import csv
import sys
from collections import defaultdict
from pathlib import Path


def main(out_dir: str) -> None:
    table = defaultdict(dict)
    with open(Path(out_dir) / "frame_potentials.csv", newline="") as f:
        for r in csv.DictReader(f):
            key = (r["family"], r["n"], r["hyperparameter"] or "-")
            mark = "!" if r["welch_violation"] == "true" else ""
            table[key][int(r["t"])] = f"{float(r['rescaled']):.4g}+-{float(r['error']):.1g}{mark}"
    ts = sorted({t for v in table.values() for t in v})
    print("ensemble".ljust(20) + "".join(f"t={t}".ljust(20) for t in ts))
    for (fam, n, hp), v in table.items():
        print(f"{fam} n={n} {hp}".ljust(20) + "".join(v.get(t, "").ljust(20) for t in ts))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "out/frame_potentials_n10")
