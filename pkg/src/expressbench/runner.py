"""Batch experiments driven by a :class:`RunConfig`.

Each experiment writes one or two CSV files plus ``manifest.json`` into the
output directory. The manifest is written with ``status: incomplete`` before
any work starts and rewritten at the end. CSV contents depend only on the
config and seed, never on the thread count.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import CONFIG_DIALECT, RunConfig
from .ensembles import EnsembleSpec, Family
from .errors import DegenerateReferenceError
from .expressibility import (
    KL_LABEL,
    FidelityPool,
    build_fidelity_pool,
    frame_potentials,
    kde_fit,
    kl_divergence_vs_haar,
)
from .resources import HaarReference, ensemble_resources, haar_reference, parameter_threshold_scan

MANIFEST = "manifest.json"
UNREACHED = "unreached"
OUTPUTS = {
    "resources": ("resources.csv", "resources_summary.csv"),
    "frame-potentials": ("frame_potentials.csv",),
    "expressibility": ("expressibility.csv",),
    "haar-reference": ("haar_reference.csv",),
    "threshold-scan": ("threshold_scan.csv", "threshold_scan_points.csv"),
}
FRAME_ERROR_LABEL = "jackknife(delete-block) on the pool mean of F^t"


class OutputExistsError(FileExistsError):
    pass


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "" if math.isnan(v) else format(float(v), ".17g")
    return str(v)


def write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    path.write_text(buf.getvalue(), encoding="utf-8")


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    m = math.fsum(x) / len(x)
    if len(x) < 2:
        return m, float("nan")
    return m, math.sqrt(math.fsum((x - m) ** 2) / (len(x) - 1) / len(x))


@dataclass
class RunResult:
    out_dir: Path
    files: list[Path]
    manifest: dict
    exit_code: int = 0


@dataclass
class _Run:
    config: RunConfig
    out: Path
    overwrite: bool
    strict: bool
    manifest: dict = field(default_factory=dict)
    references: dict = field(default_factory=dict)

    def __post_init__(self):
        names = OUTPUTS[self.config.experiment] + (MANIFEST,)
        existing = [n for n in names if (self.out / n).exists()]
        if existing and not self.overwrite:
            raise OutputExistsError(f"{self.out} already holds {existing}; pass --overwrite to replace")
        self.out.mkdir(parents=True, exist_ok=True)
        for n in existing:
            (self.out / n).unlink()
        self.manifest = {
            "status": "incomplete",
            "toolkit_version": __version__,
            "experiment": self.config.experiment,
            "config_dialect": CONFIG_DIALECT,
            "config": self.config.to_dict(),
            "threads": self.config.threads,
            "tasks": [],
            "resamples": {},
            "estimators": {},
            "warnings": [],
        }
        self.flush()

    def flush(self) -> None:
        (self.out / MANIFEST).write_text(json.dumps(self.manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    def task(self, name: str, seconds: float, **extra) -> None:
        self.manifest["tasks"].append({"task": name, "seconds": round(seconds, 6), **extra})

    def reference(self, n: int) -> HaarReference:
        if n not in self.references:
            t0 = time.perf_counter()
            c = self.config
            if c.normalization == "asymptotic":
                ref = HaarReference.asymptotic(n)
            else:
                ref = haar_reference(n, c.sampling.reference_samples, c.seed, c.threads)
            self.references[n] = ref
            self.task(f"haar-reference n={n}", time.perf_counter() - t0, mode=ref.mode)
            self.manifest.setdefault("references", {})[str(n)] = ref.to_dict()
        return self.references[n]

    def pool(self, spec: EnsembleSpec) -> FidelityPool:
        c = self.config
        cache = None
        if c.pool_cache:
            hp = spec.hyperparameter if spec.hyperparameter is not None else 0
            cache = Path(c.pool_cache) / f"{spec.kind.value}_n{spec.num_qubits}_hp{hp}_seed{spec.master_seed}_pairs{c.sampling.pairs}.pool"
            if cache.exists():
                pool = FidelityPool.load(cache)
                if pool.ensemble == spec.to_dict() and pool.pair_count == c.sampling.pairs:
                    self.task(f"pool {spec.label} (cached)", 0.0)
                    return pool
        t0 = time.perf_counter()
        pool = build_fidelity_pool(spec, c.sampling.pairs, c.threads)
        self.task(f"pool {spec.label}", time.perf_counter() - t0, pairs=c.sampling.pairs)
        self.manifest["resamples"][f"pool {spec.label}"] = pool.resamples
        if cache is not None:
            cache.parent.mkdir(parents=True, exist_ok=True)
            pool.save(cache)
        return pool

    def kl(self, spec: EnsembleSpec):
        pool = self.pool(spec)
        t0 = time.perf_counter()
        e = self.config.estimation
        est = kl_divergence_vs_haar(kde_fit(pool, e.bandwidth, e.reflect), pool, 1 << spec.num_qubits, e.jackknife_blocks)
        self.task(f"kl {spec.label}", time.perf_counter() - t0)
        return est

    def finish(self, files: list[Path], exit_code: int = 0) -> RunResult:
        self.manifest["status"] = "complete" if exit_code == 0 else "failed-strict"
        self.manifest["outputs"] = [f.name for f in files]
        self.flush()
        return RunResult(self.out, files, self.manifest, exit_code)


def _hp(spec: EnsembleSpec):
    return spec.hyperparameter


def _ratio(x, ref: float):
    if abs(ref) < 1e-9:
        raise DegenerateReferenceError(f"reference mean {ref!r}")
    return x / ref


def run_resources(config: RunConfig, out: Path | None = None, overwrite: bool = False, strict: bool = False) -> RunResult:
    run = _Run(config, Path(out or config.output_dir), overwrite, strict)
    run.manifest["estimators"]["entanglement"] = "max over contiguous cuts of von Neumann entropy (bits)"
    run.manifest["estimators"]["magic"] = "stabilizer 2-Renyi entropy (bits)"
    run.manifest["estimators"]["normalization"] = config.normalization
    rows, summary = [], []
    for spec in config.specs():
        ref = run.reference(spec.num_qubits)
        t0 = time.perf_counter()
        b = ensemble_resources(spec, config.sampling.resource_samples, workers=config.threads)
        run.task(f"resources {spec.label}", time.perf_counter() - t0, samples=len(b.magic))
        run.manifest["resamples"][f"resources {spec.label}"] = b.resamples
        try:
            s_norm = _ratio(b.entanglement, ref.mean_entanglement)
        except DegenerateReferenceError:
            s_norm = np.full_like(b.entanglement, np.nan)
            run.manifest["warnings"].append(f"n={spec.num_qubits}: zero entanglement reference, S_norm left empty")
        try:
            m_norm = _ratio(b.magic, ref.mean_magic)
        except DegenerateReferenceError:
            m_norm = np.full_like(b.magic, np.nan)
            run.manifest["warnings"].append(f"n={spec.num_qubits}: zero magic reference, M_norm left empty")
        for i in range(len(b.magic)):
            rows.append([spec.kind.value, spec.num_qubits, _hp(spec), i, b.entanglement[i], b.magic[i], s_norm[i], m_norm[i]])
        stats = []
        for col in (b.entanglement, b.magic, s_norm, m_norm):
            stats.extend(_mean_se(col))
        summary.append(
            [spec.kind.value, spec.num_qubits, _hp(spec), spec.parameter_count, len(b.magic)]
            + stats
            + [float(np.max(b.entanglement)), float(np.quantile(s_norm, 0.5)), float(np.quantile(m_norm, 0.5))]
        )
    files = [run.out / n for n in OUTPUTS["resources"]]
    write_csv(files[0], ["family", "n", "hyperparameter", "sample_index", "S", "M", "S_norm", "M_norm"], rows)
    write_csv(
        files[1],
        ["family", "n", "hyperparameter", "P", "samples", "mean_S", "se_S", "mean_M", "se_M",
         "mean_S_norm", "se_S_norm", "mean_M_norm", "se_M_norm", "max_S", "median_S_norm", "median_M_norm"],
        summary,
    )
    return run.finish(files)


def run_frame_potentials(config: RunConfig, out: Path | None = None, overwrite: bool = False, strict: bool = False) -> RunResult:
    run = _Run(config, Path(out or config.output_dir), overwrite, strict)
    run.manifest["estimators"]["frame_potential_error"] = FRAME_ERROR_LABEL
    rows, violations = [], []
    for spec in config.specs():
        pool = run.pool(spec)
        for e in frame_potentials(pool, config.sampling.t_max, 1 << spec.num_qubits, config.estimation.jackknife_blocks):
            rows.append([spec.kind.value, spec.num_qubits, _hp(spec), e.t, e.raw_value, e.haar_value, e.rescaled, e.std_error, e.welch_violation])
            if e.welch_violation:
                violations.append(f"{spec.label} t={e.t}: rescaled {e.rescaled:.6g} < 1 - 3*{e.std_error:.3g}")
    run.manifest["welch_violations"] = violations
    files = [run.out / OUTPUTS["frame-potentials"][0]]
    write_csv(files[0], ["family", "n", "hyperparameter", "t", "raw", "haar", "rescaled", "error", "welch_violation"], rows)
    return run.finish(files, 3 if strict and violations else 0)


def _with_haar_rows(specs: list[EnsembleSpec], seed: int) -> list[EnsembleSpec]:
    have = {s.num_qubits for s in specs if s.kind is Family.HAAR}
    extra = [EnsembleSpec(Family.HAAR, n, master_seed=seed) for n in sorted({s.num_qubits for s in specs} - have)]
    return specs + extra


def run_expressibility(config: RunConfig, out: Path | None = None, overwrite: bool = False, strict: bool = False) -> RunResult:
    run = _Run(config, Path(out or config.output_dir), overwrite, strict)
    run.manifest["estimators"]["kl"] = KL_LABEL
    rows = []
    for spec in _with_haar_rows(config.specs(), config.seed):
        est = run.kl(spec)
        p = spec.parameter_count
        rows.append([spec.kind.value, spec.num_qubits, _hp(spec), p, p / spec.num_qubits, est.value, est.std_error, est.estimator])
    files = [run.out / OUTPUTS["expressibility"][0]]
    write_csv(files[0], ["family", "n", "hyperparameter", "P", "P_per_n", "D_KL", "error", "estimator"], rows)
    return run.finish(files)


def run_haar_reference(config: RunConfig, out: Path | None = None, overwrite: bool = False, strict: bool = False) -> RunResult:
    run = _Run(config, Path(out or config.output_dir), overwrite, strict)
    rows = []
    for n in sorted({s.num_qubits for s in config.specs()}):
        r = run.reference(n)
        rows.append([n, r.sample_count, r.mode, r.mean_entanglement, r.entanglement_error, r.mean_magic, r.magic_error,
                     r.mean_fourth_moment, r.fourth_moment_error])
    files = [run.out / OUTPUTS["haar-reference"][0]]
    write_csv(files[0], ["n", "samples", "mode", "mean_S", "se_S", "mean_M", "se_M", "mean_pauli_moment", "se_pauli_moment"], rows)
    return run.finish(files)


def run_threshold_scan(config: RunConfig, out: Path | None = None, overwrite: bool = False, strict: bool = False) -> RunResult:
    run = _Run(config, Path(out or config.output_dir), overwrite, strict)
    th = config.threshold
    run.manifest["estimators"]["threshold"] = f"{th.quantity} target {th.target!r}"
    if th.quantity == "kl":
        run.manifest["estimators"]["kl"] = KL_LABEL
    rows, points = [], []
    for g in config.ensembles:
        if g.family not in (Family.FQNN, Family.MPS, Family.CMPS):
            run.manifest["warnings"].append(f"{g.family.value}: no hyperparameter grid, skipped")
            continue
        for n in g.num_qubits:
            specs = [s for s in g.specs(config.seed) if s.num_qubits == n]
            specs.sort(key=lambda s: s.hyperparameter)
            if th.quantity == "kl":
                hits = []
                for s in specs:
                    est = run.kl(s)
                    ok = est.value <= th.target
                    p = s.parameter_count
                    points.append([g.family.value, n, s.hyperparameter, p, p / n, est.value, est.std_error, ok])
                    if ok:
                        hits.append(p / n)
                threshold = min(hits) if hits else None
            else:
                t0 = time.perf_counter()
                scan = parameter_threshold_scan(
                    g.family, n, th.target, run.reference(n), [s.hyperparameter for s in specs], th.quantity,
                    config.sampling.resource_samples, config.seed, config.threads,
                )
                run.task(f"scan {g.family.value} n={n}", time.perf_counter() - t0)
                for pt in scan.points:
                    points.append([g.family.value, n, pt.hyperparameter, pt.parameter_count, pt.params_per_qubit,
                                   pt.mean, pt.std_error, pt.mean >= th.target])
                threshold = scan.threshold
            rows.append([g.family.value, n, th.quantity, th.target, UNREACHED if threshold is None else threshold])
    files = [run.out / n for n in OUTPUTS["threshold-scan"]]
    write_csv(files[0], ["family", "n", "quantity", "target", "P_per_n"], rows)
    write_csv(files[1], ["family", "n", "hyperparameter", "P", "P_per_n", "value", "error", "meets_target"], points)
    return run.finish(files)


RUNNERS = {
    "resources": run_resources,
    "frame-potentials": run_frame_potentials,
    "expressibility": run_expressibility,
    "haar-reference": run_haar_reference,
    "threshold-scan": run_threshold_scan,
}


def run(config: RunConfig, out: Path | None = None, overwrite: bool = False, strict: bool = False) -> RunResult:
    return RUNNERS[config.experiment](config, out, overwrite, strict)
