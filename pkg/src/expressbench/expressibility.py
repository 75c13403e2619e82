"""Statistics of fidelity pools: frame potentials, KDE densities and KL divergence.

Pool file format (UTF-8 text)::

    # expressbench-pool v1
    # {"ensemble": {...}, "pair_count": 100000, "resamples": 0}
    0.00031883245062618447
    ...

one fidelity per line, printed with 17 significant digits so values reload
bit for bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.ndimage import gaussian_filter1d

from .ensembles import EnsembleSpec, pair_fidelities
from .errors import DegeneratePoolError, DimensionMismatchError, ValidationError
from .parallel import ordered_map

POOL_MAGIC = "# expressbench-pool v1"
DENSITY_FLOOR = 1e-300
MIN_KDE_POOL = 100
DEFAULT_BLOCKS = 100
MAX_T = 16
CELLS_PER_BANDWIDTH = 20
MAX_GRID = 1 << 22
KL_LABEL = "kde-plugin(scott, reflect)+jackknife"


# ---- Haar laws -------------------------------------------------------------

def haar_frame_potential(d: int, t: int) -> float:
    """t! (d-1)! / (d-1+t)!, evaluated as a sum of logs."""
    if d < 2 or not 1 <= t <= MAX_T:
        raise ValidationError(f"need d >= 2 and 1 <= t <= {MAX_T}, got d={d}, t={t}")
    log_val = math.fsum(math.log(k) for k in range(1, t + 1)) - math.fsum(math.log(d + k) for k in range(t))
    return math.exp(log_val)


def haar_fidelity_logpdf(d: int, f):
    """log((d-1)(1-F)^(d-2)); -inf at F = 1 for d > 2."""
    if d < 2:
        raise ValidationError("d must be >= 2")
    f = np.asarray(f, dtype=float)
    if np.any((f < 0) | (f > 1)):
        raise ValidationError("fidelities must lie in [0, 1]")
    if d == 2:
        return np.zeros_like(f)
    with np.errstate(divide="ignore"):
        return math.log(d - 1) + (d - 2) * np.log1p(-f)


def haar_fidelity_pdf(d: int, f):
    return np.exp(haar_fidelity_logpdf(d, f))


# ---- pools -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FidelityPool:
    samples: np.ndarray
    ensemble: dict = field(default_factory=dict)
    resamples: int = 0

    def __post_init__(self):
        s = np.array(self.samples, dtype=float, copy=True).ravel()
        if s.size and (not np.all(np.isfinite(s)) or s.min() < 0 or s.max() > 1):
            raise ValidationError("pool fidelities must lie in [0, 1]")
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def pair_count(self) -> int:
        return self.samples.size

    def save(self, path) -> None:
        meta = {"ensemble": self.ensemble, "pair_count": self.pair_count, "resamples": self.resamples}
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(POOL_MAGIC + "\n")
            fh.write("# " + json.dumps(meta, sort_keys=True) + "\n")
            fh.write("".join(f"{v:.17g}\n" for v in self.samples))

    @classmethod
    def load(cls, path) -> "FidelityPool":
        text = Path(path).read_text(encoding="utf-8")
        head, meta_line, body = text.split("\n", 2)
        if head.strip() != POOL_MAGIC:
            raise ValidationError(f"{path}: not a fidelity pool file")
        meta = json.loads(meta_line[1:])
        samples = np.array(body.split(), dtype=float)
        if samples.size != meta["pair_count"]:
            raise ValidationError(f"{path}: header says {meta['pair_count']} values, found {samples.size}")
        return cls(samples, meta["ensemble"], meta.get("resamples", 0))


def build_fidelity_pool(spec: EnsembleSpec, num_pairs: int, workers: int = 1, chunk_size: int = 512) -> FidelityPool:
    """Fidelities of pairs ``0..num_pairs-1``; independent of ``workers``."""
    if num_pairs < 1:
        raise ValidationError("num_pairs must be >= 1")
    parts = ordered_map(lambda r: pair_fidelities(spec, r), num_pairs, workers, chunk_size)
    return FidelityPool(np.concatenate([p[0] for p in parts]), spec.to_dict(), sum(p[1] for p in parts))


# ---- jackknife -------------------------------------------------------------

def _blocks(n: int, block_count: int) -> list[np.ndarray]:
    if block_count < 10:
        raise ValidationError("jackknife needs at least 10 blocks")
    if n < block_count:
        raise ValidationError(f"{n} samples cannot fill {block_count} blocks")
    return np.array_split(np.arange(n), block_count)


def _jackknife_se(thetas: np.ndarray) -> float:
    g = len(thetas)
    mean = math.fsum(thetas) / g
    return math.sqrt((g - 1) / g * math.fsum((thetas - mean) ** 2))


def jackknife_error(samples, statistic: Callable[[np.ndarray], float], block_count: int = DEFAULT_BLOCKS) -> float:
    """Delete-block jackknife standard error of ``statistic``."""
    x = np.asarray(samples)
    blocks = _blocks(len(x), block_count)
    mask = np.ones(len(x), dtype=bool)
    thetas = []
    for b in blocks:
        mask[b] = False
        thetas.append(statistic(x[mask]))
        mask[b] = True
    return _jackknife_se(np.array(thetas, dtype=float))


# ---- frame potentials ------------------------------------------------------

@dataclass(frozen=True)
class FramePotentialEstimate:
    t: int
    raw_value: float
    haar_value: float
    rescaled: float
    std_error: float  # of the rescaled value
    raw_error: float

    @property
    def welch_violation(self) -> bool:
        return self.rescaled < 1.0 - 3.0 * self.std_error


def _mean_with_jackknife(values: np.ndarray, blocks) -> tuple[float, float]:
    total = math.fsum(values)
    n = len(values)
    if blocks is None:
        return total / n, float("nan")
    # delete-block means from block sums, same as refitting the mean
    thetas = np.array([(total - math.fsum(values[b])) / (n - len(b)) for b in blocks])
    return total / n, _jackknife_se(thetas)


def _pool_dim(pool: FidelityPool, d: int | None) -> int:
    if d is not None:
        return d
    try:
        return 1 << int(pool.ensemble["num_qubits"])
    except (KeyError, TypeError):
        raise ValidationError("pool carries no qubit count; pass d explicitly") from None


def frame_potentials(
    pool: FidelityPool, t_max: int, d: int | None = None, block_count: int = DEFAULT_BLOCKS
) -> list[FramePotentialEstimate]:
    """Estimates for t = 1..t_max from one pool; F**t built by repeated products."""
    d = _pool_dim(pool, d)
    if len(pool) == 0:
        raise ValidationError("empty fidelity pool")
    if not 1 <= t_max <= MAX_T:
        raise ValidationError(f"t_max must be in 1..{MAX_T}")
    f = pool.samples
    blocks = _blocks(len(f), block_count) if len(f) >= block_count else None
    out = []
    power = f.copy()
    for t in range(1, t_max + 1):
        if t > 1:
            power = power * f
        raw, err = _mean_with_jackknife(power, blocks)
        haar = haar_frame_potential(d, t)
        out.append(FramePotentialEstimate(t, raw, haar, raw / haar, err / haar, err))
    return out


def frame_potential(pool: FidelityPool, t: int, d: int | None = None, block_count: int = DEFAULT_BLOCKS) -> FramePotentialEstimate:
    return frame_potentials(pool, t, d, block_count)[-1]


# ---- KDE -------------------------------------------------------------------

def scott_bandwidth(x: np.ndarray) -> float:
    return float(np.std(x, ddof=1) * len(x) ** (-0.2))


@dataclass(frozen=True, eq=False)
class KdeModel:
    """Gaussian KDE on [0, 1] with mirror images about both endpoints.

    ``density`` evaluates a linearly binned approximation (grid step at most
    h/20); ``density_exact`` sums every kernel and its two reflections.
    """

    points: np.ndarray
    bandwidth: float
    reflect: bool = True
    bandwidth_rule: str = "scott"
    _grid: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if not self.bandwidth > 0:
            raise ValidationError("bandwidth must be positive")
        if self._grid is None:
            object.__setattr__(self, "_grid", self._binned_grid())

    def _binned_grid(self) -> np.ndarray:
        m = int(min(MAX_GRID, max(64, math.ceil(CELLS_PER_BANDWIDTH / self.bandwidth))))
        step = 1.0 / m
        # cell centers at (k + 1/2) step; mass outside the outer centers stays in the edge cell
        pos = np.clip(self.points / step - 0.5, 0.0, m - 1.0)
        lo = np.minimum(pos.astype(np.int64), m - 2) if m > 1 else np.zeros(len(pos), np.int64)
        w = pos - lo
        counts = np.bincount(lo, weights=1.0 - w, minlength=m) + np.bincount(lo + 1, weights=w, minlength=m)
        mode = "reflect" if self.reflect else "constant"
        smooth = gaussian_filter1d(counts, self.bandwidth / step, mode=mode, truncate=8.0)
        return smooth / (len(self.points) * step)

    @property
    def grid_size(self) -> int:
        return self._grid.size

    def density(self, f) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        m = self._grid.size
        centers = (np.arange(m) + 0.5) / m
        return np.interp(f, centers, self._grid)

    def density_exact(self, f) -> np.ndarray:
        f = np.atleast_1d(np.asarray(f, dtype=float))
        h = self.bandwidth
        norm = 1.0 / (len(self.points) * h * math.sqrt(2 * math.pi))
        out = np.empty(f.shape)
        for i, x in enumerate(f.ravel()):
            s = np.exp(-0.5 * ((x - self.points) / h) ** 2)
            if self.reflect:
                s = s + np.exp(-0.5 * ((x + self.points) / h) ** 2) + np.exp(-0.5 * ((x - 2 + self.points) / h) ** 2)
            out.flat[i] = math.fsum(s) * norm
        return out

    def integral(self) -> float:
        """Mass on [0, 1] by the midpoint rule on the KDE grid."""
        return float(math.fsum(self._grid) / self._grid.size)


def kde_fit(pool: FidelityPool | np.ndarray, bandwidth_rule: str | float = "scott", reflect: bool = True) -> KdeModel:
    x = pool.samples if isinstance(pool, FidelityPool) else np.asarray(pool, dtype=float)
    if len(x) < MIN_KDE_POOL:
        raise ValidationError(f"KDE needs at least {MIN_KDE_POOL} samples, got {len(x)}")
    if np.ptp(x) == 0:
        raise DegeneratePoolError("pool has zero variance")
    if bandwidth_rule == "scott":
        h = scott_bandwidth(x)
    elif isinstance(bandwidth_rule, (int, float)):
        h = float(bandwidth_rule)
    else:
        raise ValidationError(f"unknown bandwidth rule {bandwidth_rule!r}")
    rule = "scott" if bandwidth_rule == "scott" else f"fixed:{h!r}"
    return KdeModel(x, h, reflect, rule)


# ---- KL divergence ---------------------------------------------------------

@dataclass(frozen=True)
class KlEstimate:
    value: float
    std_error: float
    estimator: str = KL_LABEL


def _kl_plugin(model: KdeModel, f: np.ndarray, d: int) -> float:
    log_p = np.log(np.maximum(model.density(f), DENSITY_FLOOR))
    log_h = np.maximum(haar_fidelity_logpdf(d, f), math.log(DENSITY_FLOOR))
    return math.fsum(log_p - log_h) / len(f)


def kl_divergence_vs_haar(
    model: KdeModel, pool: FidelityPool, d: int, block_count: int = DEFAULT_BLOCKS
) -> KlEstimate:
    """Plug-in estimate of KL(P_mu || P_Haar) over the pool, with jackknife error.

    Each jackknife replicate refits the KDE on the retained samples with the
    model's bandwidth rule.
    """
    if d < 2:
        raise ValidationError("d must be >= 2")
    if pool.ensemble and "num_qubits" in pool.ensemble and 1 << int(pool.ensemble["num_qubits"]) != d:
        raise DimensionMismatchError(f"pool is for {pool.ensemble['num_qubits']} qubits, d = {d}")
    f = pool.samples
    value = _kl_plugin(model, f, d)
    rule: str | float = "scott" if model.bandwidth_rule == "scott" else model.bandwidth
    blocks = _blocks(len(f), block_count)
    mask = np.ones(len(f), dtype=bool)
    thetas = []
    for b in blocks:
        mask[b] = False
        kept = f[mask]
        thetas.append(_kl_plugin(kde_fit(kept, rule, model.reflect), kept, d))
        mask[b] = True
    return KlEstimate(value, _jackknife_se(np.array(thetas)))
