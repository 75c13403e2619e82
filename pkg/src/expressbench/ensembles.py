"""State families and their deterministic samplers.

Families: ``FQNN`` (layered Euler-rotation circuit with a CNOT ring), ``MPS``
(random periodic MPS), ``CMPS`` (random Clifford applied to a random MPS),
``HAAR`` and ``STABILIZER``. Sample ``i`` of a spec is a pure function of
``(spec, i, stream)``; see :mod:`expressbench.streams`.

fQNN conventions: each layer applies ``R_Y(alpha) R_Z(beta) R_Y(gamma)`` to
every qubit (``gamma`` acts first), then ``CNOT(q, q+1)`` for ``q = 1..n-1``
followed by ``CNOT(n, 1)``. For ``n = 1`` the ring is empty.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from . import _kernels as K
from .clifford import CliffordTableau, random_bits_needed, _canonical_tableau, _synthesize
from .errors import DegenerateStateError, ValidationError
from .mps import DEGENERATE_NORM_SQ, draw_mps_tensors
from .qstate import StateVector, check_capacity, fidelity, haar_amplitudes
from .streams import substream

TWO_PI = 2.0 * np.pi
MAX_MPS_RESAMPLES = 100


class Family(str, Enum):
    FQNN = "FQNN"
    MPS = "MPS"
    CMPS = "CMPS"
    HAAR = "HAAR"
    STABILIZER = "STABILIZER"


@dataclass(frozen=True)
class EnsembleSpec:
    kind: Family
    num_qubits: int
    layers: int | None = None
    bond_dim: int | None = None
    master_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", Family(self.kind))
        check_capacity(self.num_qubits)
        if self.kind is Family.FQNN:
            if self.layers is None or self.layers < 1:
                raise ValidationError("FQNN needs layers >= 1")
        elif self.kind in (Family.MPS, Family.CMPS):
            if self.bond_dim is None or self.bond_dim < 1:
                raise ValidationError(f"{self.kind.value} needs bond_dim >= 1")
        if not 0 <= int(self.master_seed) < 1 << 64:
            raise ValidationError("master_seed must be an unsigned 64-bit integer")

    @property
    def parameter_count(self) -> int:
        n = self.num_qubits
        if self.kind is Family.FQNN:
            return 3 * n * self.layers
        if self.kind in (Family.MPS, Family.CMPS):
            return 4 * n * self.bond_dim**2
        return 0

    @property
    def hyperparameter(self) -> int | None:
        if self.kind is Family.FQNN:
            return self.layers
        if self.kind in (Family.MPS, Family.CMPS):
            return self.bond_dim
        return None

    @property
    def point(self) -> tuple:
        """Grid coordinate mixed into every substream key."""
        return (self.num_qubits, self.hyperparameter or 0)

    @property
    def label(self) -> str:
        hp = self.hyperparameter
        return f"{self.kind.value}(n={self.num_qubits}" + (f", {hp})" if hp is not None else ")")

    def to_dict(self) -> dict:
        d = {"kind": self.kind.value, "num_qubits": self.num_qubits, "master_seed": int(self.master_seed)}
        if self.layers is not None:
            d["layers"] = self.layers
        if self.bond_dim is not None:
            d["bond_dim"] = self.bond_dim
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "EnsembleSpec":
        return cls(
            Family(d["kind"]),
            int(d["num_qubits"]),
            d.get("layers"),
            d.get("bond_dim"),
            int(d.get("master_seed", 0)),
        )


@dataclass(frozen=True, eq=False)
class FqnnAngles:
    """Angles with shape (L, n, 3): (alpha, beta, gamma) per qubit per layer."""

    angles: np.ndarray

    def __post_init__(self):
        a = np.array(self.angles, dtype=float, copy=True)
        if a.ndim != 3 or a.shape[2] != 3 or a.shape[0] < 1:
            raise ValidationError(f"angles must have shape (L, n, 3), got {a.shape}")
        a.flags.writeable = False
        object.__setattr__(self, "angles", a)

    @property
    def layers(self) -> int:
        return self.angles.shape[0]

    @property
    def num_qubits(self) -> int:
        return self.angles.shape[1]


def sample_fqnn_angles(n: int, layers: int, rng: np.random.Generator) -> FqnnAngles:
    if layers < 1:
        raise ValidationError("FQNN needs layers >= 1")
    a = TWO_PI * rng.random((layers, n, 3))
    a[a >= TWO_PI] = 0.0
    return FqnnAngles(a)


def euler_unitaries(angles: np.ndarray) -> np.ndarray:
    """R_Y(alpha) R_Z(beta) R_Y(gamma) for angle triples in the last axis."""
    a, b, g = angles[..., 0], angles[..., 1], angles[..., 2]
    ca, sa = np.cos(a / 2), np.sin(a / 2)
    cg, sg = np.cos(g / 2), np.sin(g / 2)
    em, ep = np.exp(-0.5j * b), np.exp(0.5j * b)
    out = np.empty(angles.shape[:-1] + (2, 2), dtype=np.complex128)
    # R_Y(a) diag(em, ep) R_Y(g), with R_Y(t) = [[c, -s], [s, c]]
    out[..., 0, 0] = ca * em * cg - sa * ep * sg
    out[..., 0, 1] = -ca * em * sg - sa * ep * cg
    out[..., 1, 0] = sa * em * cg + ca * ep * sg
    out[..., 1, 1] = -sa * em * sg + ca * ep * cg
    return out


@lru_cache(maxsize=None)
def ring_permutation(n: int) -> np.ndarray:
    """Index map with (ring |psi>)[i] = psi[perm[i]] for the CNOT ring."""
    gates = [(q, q + 1) for q in range(1, n)] + ([(n, 1)] if n > 1 else [])
    p = np.arange(1 << n)
    # psi_out[i] = psi[g1(g2(...gk(i)))]: apply the last gate's map first
    for c, t in reversed(gates):
        cbit, tbit = 1 << (n - c), 1 << (n - t)
        p = np.where(p & cbit, p ^ tbit, p)
    p.flags.writeable = False
    return p


def _fqnn_batch(angle_sets: list[np.ndarray], n: int) -> np.ndarray:
    units = euler_unitaries(np.stack(angle_sets))
    out = np.zeros((len(angle_sets), 1 << n), dtype=np.complex128)
    K.fqnn_batch(np.ascontiguousarray(units), ring_permutation(n), out)
    return out


def build_fqnn_state(angles: FqnnAngles) -> StateVector:
    n = angles.num_qubits
    check_capacity(n)
    return StateVector(n, _fqnn_batch([angles.angles], n)[0])


def _clifford_from_stream(n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    # same draw order as clifford.sample_random_clifford
    u = rng.random(n)
    bits = rng.integers(0, 2, size=random_bits_needed(n), dtype=np.uint8)
    return _canonical_tableau(n, u, bits)


def _apply_cliffords(states: np.ndarray, n: int, tableaux: list) -> None:
    codes = [_synthesize(tab, sgn) for tab, sgn in tableaux]
    offsets = np.zeros(len(codes) + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([c.shape[0] for c in codes])
    flat = np.concatenate(codes) if codes else np.zeros((0, 3), np.int64)
    K.apply_gates_batch(states, n, np.ascontiguousarray(flat), offsets)


def _mps_batch(spec: EnsembleSpec, indices, stream: str) -> tuple[np.ndarray, int]:
    n, chi = spec.num_qubits, spec.bond_dim
    gens = [substream(spec.master_seed, "mps", int(i), stream, spec.point) for i in indices]
    tensors = np.stack([draw_mps_tensors(n, chi, g) for g in gens])
    out = np.empty((len(gens), 1 << n), dtype=np.complex128)
    norms = K.mps_states_batch(tensors, out)
    resamples = 0
    for k in np.flatnonzero(norms < DEGENERATE_NORM_SQ):
        for _ in range(MAX_MPS_RESAMPLES):
            resamples += 1
            t = draw_mps_tensors(n, chi, gens[k])[None]
            nrm = K.mps_states_batch(t, out[k : k + 1])
            if nrm[0] >= DEGENERATE_NORM_SQ:
                break
        else:
            raise DegenerateStateError(f"sample {indices[k]}: repeated degenerate MPS draws")
    return out, resamples


def sample_states(spec: EnsembleSpec, indices, stream: str = "sample") -> tuple[np.ndarray, int]:
    """Dense states for the given sample indices as rows of a (B, 2**n) array.

    Returns the states and the number of degenerate MPS draws that were
    resampled. Row ``k`` is bit-identical to ``sample_state(spec, indices[k])``.
    """
    n = spec.num_qubits
    seed, pt = spec.master_seed, spec.point
    indices = [int(i) for i in indices]
    if any(i < 0 for i in indices):
        raise ValueError("sample indices must be non-negative")
    kind = spec.kind
    if kind is Family.HAAR:
        out = np.stack([haar_amplitudes(n, substream(seed, "haar", i, stream, pt)) for i in indices])
        return out, 0
    if kind is Family.FQNN:
        angle_sets = [
            sample_fqnn_angles(n, spec.layers, substream(seed, "fqnn", i, stream, pt)).angles
            for i in indices
        ]
        return _fqnn_batch(angle_sets, n), 0
    if kind is Family.STABILIZER:
        out = np.zeros((len(indices), 1 << n), dtype=np.complex128)
        out[:, 0] = 1.0
        tabs = [_clifford_from_stream(n, substream(seed, "stabilizer-clifford", i, stream, pt)) for i in indices]
        _apply_cliffords(out, n, tabs)
        return out, 0
    out, resamples = _mps_batch(spec, indices, stream)
    if kind is Family.CMPS:
        tabs = [_clifford_from_stream(n, substream(seed, "cmps-clifford", i, stream, pt)) for i in indices]
        _apply_cliffords(out, n, tabs)
    return out, resamples


def sample_state(spec: EnsembleSpec, index: int, stream: str = "sample") -> StateVector:
    states, _ = sample_states(spec, [index], stream)
    return StateVector(spec.num_qubits, states[0])


def sample_clifford(spec: EnsembleSpec, index: int, stream: str = "sample") -> CliffordTableau:
    """The Clifford used by CMPS/STABILIZER sample ``index`` (for inspection/tests)."""
    component = {Family.CMPS: "cmps-clifford", Family.STABILIZER: "stabilizer-clifford"}[spec.kind]
    tab, sgn = _clifford_from_stream(spec.num_qubits, substream(spec.master_seed, component, index, stream, spec.point))
    return CliffordTableau(spec.num_qubits, tab, sgn)


def pair_fidelities(spec: EnsembleSpec, pair_indices) -> tuple[np.ndarray, int]:
    """Fidelities of pairs drawn from the independent 'pair-a'/'pair-b' streams."""
    a, ra = sample_states(spec, pair_indices, "pair-a")
    b, rb = sample_states(spec, pair_indices, "pair-b")
    out = np.empty(a.shape[0])
    K.fidelities(a, b, out)
    return out, ra + rb


def sample_fidelity(spec: EnsembleSpec, pair_index: int) -> float:
    a = sample_state(spec, pair_index, "pair-a")
    b = sample_state(spec, pair_index, "pair-b")
    return fidelity(a, b)
