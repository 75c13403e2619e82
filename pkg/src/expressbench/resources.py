"""Entanglement and magic of pure states, and their Haar-normalized forms.

* Entanglement: the largest von Neumann entropy (bits) over the contiguous
  cuts ``{1..l} | {l+1..n}``.
* Magic: the stabilizer 2-Renyi entropy ``M = -log2(sum_P <P>^4) + n`` over
  the ``4**n`` phase-free Hermitian Pauli strings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .ensembles import EnsembleSpec, Family, sample_states
from .errors import CapacityError, DegenerateReferenceError, DimensionMismatchError, ValidationError
from .parallel import ordered_map
from .qstate import StateVector, check_capacity

EIG_FLOOR = 1e-14
SLACK = 1e-9
SPECTRUM_MAX_QUBITS = 12  # the full 4**n table; sums stream row by row
MIN_REFERENCE_SAMPLES = 1000


def _entropy_bits(lam: np.ndarray) -> float:
    lam = lam[lam > EIG_FLOOR]
    return float(-np.sum(lam * np.log2(lam)))


def entanglement_entropies(states: np.ndarray, n: int) -> np.ndarray:
    """Max-cut entropy for each row of a (B, 2**n) array."""
    states = np.atleast_2d(states)
    out = np.zeros(states.shape[0])
    if n < 2:
        return out
    for cut in range(1, n):
        mats = states.reshape(states.shape[0], 1 << cut, 1 << (n - cut))
        sv = np.linalg.svd(mats, compute_uv=False)
        for b in range(states.shape[0]):
            out[b] = max(out[b], _entropy_bits(sv[b] ** 2))
    return out


def entanglement_entropy(state: StateVector) -> float:
    return float(entanglement_entropies(state.amplitudes[None, :], state.num_qubits)[0])


def pauli_spectrum(state: StateVector) -> np.ndarray:
    """Table ``t[x, z] = <i^{|x&z|} X^x Z^z>`` over all masks (O(n 4**n))."""
    if state.num_qubits > SPECTRUM_MAX_QUBITS:
        raise CapacityError(f"full Pauli table limited to {SPECTRUM_MAX_QUBITS} qubits")
    d = state.dim
    out = np.empty((d, d))
    K.pauli_spectrum(np.ascontiguousarray(state.amplitudes), out)
    return out


def pauli_fourth_moment(state: StateVector) -> float:
    return float(K.pauli_fourth_moment(np.ascontiguousarray(state.amplitudes)))


def magic_from_moment(moment: float, n: int) -> float:
    return -math.log2(moment) + n


def stabilizer_renyi_entropy(state: StateVector) -> float:
    check_capacity(state.num_qubits)
    return magic_from_moment(pauli_fourth_moment(state), state.num_qubits)


def fourth_moments(states: np.ndarray) -> np.ndarray:
    states = np.atleast_2d(states)
    return np.array([K.pauli_fourth_moment(np.ascontiguousarray(s)) for s in states])


@dataclass(frozen=True)
class ResourceSample:
    entanglement: float
    magic: float
    normalized_entanglement: float
    normalized_magic: float


@dataclass(frozen=True)
class HaarReference:
    num_qubits: int
    mean_entanglement: float
    mean_magic: float
    entanglement_error: float
    magic_error: float
    sample_count: int
    mode: str = "empirical"  # or "asymptotic"
    mean_fourth_moment: float = field(default=float("nan"))
    fourth_moment_error: float = field(default=float("nan"))

    @classmethod
    def asymptotic(cls, n: int) -> "HaarReference":
        """The large-n constants S = n/2 and M = n - 2."""
        return cls(n, n / 2, float(n - 2), 0.0, 0.0, 0, "asymptotic")

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    mean = math.fsum(x) / len(x)
    if len(x) < 2:
        return mean, float("nan")
    var = math.fsum((x - mean) ** 2) / (len(x) - 1)
    return mean, math.sqrt(var / len(x))


@dataclass(frozen=True)
class ResourceBatch:
    """Per-sample resources of one ensemble; ``moments`` holds sum_P <P>^4."""

    entanglement: np.ndarray
    magic: np.ndarray
    moments: np.ndarray
    resamples: int = 0


def ensemble_resources(
    spec: EnsembleSpec, num_samples: int, stream: str = "sample", workers: int = 1, chunk_size: int = 16
) -> ResourceBatch:
    """Entanglement and magic for samples ``0..num_samples-1`` of ``spec``."""
    n = spec.num_qubits

    def work(idx: range):
        states, res = sample_states(spec, idx, stream)
        return entanglement_entropies(states, n), fourth_moments(states), res

    parts = ordered_map(work, num_samples, workers, chunk_size)
    ent = np.concatenate([p[0] for p in parts]) if parts else np.zeros(0)
    mom = np.concatenate([p[1] for p in parts]) if parts else np.zeros(0)
    magic = -np.log2(mom) + n
    return ResourceBatch(ent, magic, mom, sum(p[2] for p in parts))


def haar_reference(n: int, num_samples: int, seed: int, workers: int = 1) -> HaarReference:
    """Empirical Haar means of S and M from the independent 'reference' stream."""
    if num_samples < MIN_REFERENCE_SAMPLES:
        raise ValidationError(f"Haar reference needs >= {MIN_REFERENCE_SAMPLES} samples")
    check_capacity(n)
    batch = ensemble_resources(EnsembleSpec(Family.HAAR, n, master_seed=seed), num_samples, "reference", workers)
    ms, se_s = _mean_se(batch.entanglement)
    mm, se_m = _mean_se(batch.magic)
    mq, se_q = _mean_se(batch.moments)
    return HaarReference(n, ms, mm, se_s, se_m, num_samples, "empirical", mq, se_q)


def _ratio(value: float, ref: float, what: str) -> float:
    if abs(ref) < SLACK:
        raise DegenerateReferenceError(f"Haar reference {what} is {ref:.3e}; cannot normalize")
    return value / ref


def normalize_resources(sample: tuple[float, float], ref: HaarReference, num_qubits: int | None = None) -> ResourceSample:
    """Divide (S, M) by the reference means."""
    if num_qubits is not None and num_qubits != ref.num_qubits:
        raise DimensionMismatchError(f"sample has {num_qubits} qubits, reference {ref.num_qubits}")
    s, m = float(sample[0]), float(sample[1])
    return ResourceSample(s, m, _ratio(s, ref.mean_entanglement, "entanglement"), _ratio(m, ref.mean_magic, "magic"))


@dataclass(frozen=True)
class ThresholdPoint:
    hyperparameter: int
    parameter_count: int
    params_per_qubit: float
    mean: float
    std_error: float


@dataclass(frozen=True)
class ThresholdScan:
    family: Family
    num_qubits: int
    resource: str
    target: float
    points: tuple
    threshold: float | None  # P/n, or None when the grid never reaches the target

    @property
    def reached(self) -> bool:
        return self.threshold is not None


def parameter_threshold_scan(
    family: Family | str,
    n: int,
    target: float,
    ref: HaarReference,
    grid,
    resource: str = "entanglement",
    num_samples: int = 1000,
    seed: int = 0,
    workers: int = 1,
) -> ThresholdScan:
    """Smallest P/n on the L or chi grid whose mean normalized resource reaches ``target``."""
    family = Family(family)
    if family not in (Family.FQNN, Family.MPS, Family.CMPS):
        raise ValidationError(f"threshold scans need a parameterized family, got {family.value}")
    if not 0 <= target < 1:
        raise ValidationError("target must lie in [0, 1)")
    if resource not in ("entanglement", "magic"):
        raise ValidationError(f"unknown resource {resource!r}")
    if ref.num_qubits != n:
        raise DimensionMismatchError(f"reference has {ref.num_qubits} qubits, scan {n}")
    norm = ref.mean_entanglement if resource == "entanglement" else ref.mean_magic
    _ratio(1.0, norm, resource)
    points = []
    for hp in sorted(set(int(g) for g in grid)):
        kw = {"layers": hp} if family is Family.FQNN else {"bond_dim": hp}
        spec = EnsembleSpec(family, n, master_seed=seed, **kw)
        batch = ensemble_resources(spec, num_samples, workers=workers)
        vals = (batch.entanglement if resource == "entanglement" else batch.magic) / norm
        mean, se = _mean_se(vals)
        points.append(ThresholdPoint(hp, spec.parameter_count, spec.parameter_count / n, mean, se))
    hits = [p.params_per_qubit for p in points if p.mean >= target]
    return ThresholdScan(family, n, resource, target, tuple(points), min(hits) if hits else None)
