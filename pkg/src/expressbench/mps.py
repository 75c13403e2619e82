"""Periodic-boundary matrix-product states.

The amplitude of bitstring ``s_1 ... s_n`` is ``Tr[A_1^{s_1} ... A_n^{s_n}]``.
States are kept unnormalized (that is the sampling law); every consumer works
with the normalized state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .clifford import CliffordTableau, conjugate_pauli, invert_tableau
from .errors import DegenerateStateError, DimensionMismatchError, ValidationError
from .qstate import I2, X, Z, PauliString, StateVector, check_capacity

DEGENERATE_NORM_SQ = 1e-28
IMAG_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class Mps:
    num_qubits: int
    bond_dim: int
    tensors: np.ndarray  # (n, 2, chi, chi) complex
    resamples: int = field(default=0, compare=False)

    def __post_init__(self):
        t = np.array(self.tensors, dtype=np.complex128, copy=True)
        n, chi = self.num_qubits, self.bond_dim
        if t.shape != (n, 2, chi, chi):
            raise DimensionMismatchError(f"tensors shape {t.shape}, expected {(n, 2, chi, chi)}")
        t.flags.writeable = False
        object.__setattr__(self, "tensors", t)

    @property
    def parameter_count(self) -> int:
        return 4 * self.num_qubits * self.bond_dim**2

    @classmethod
    def product(cls, site_vectors) -> "Mps":
        """chi = 1 MPS from per-site (a_i, b_i) amplitudes."""
        v = np.asarray(site_vectors, dtype=complex)
        return cls(v.shape[0], 1, v.reshape(v.shape[0], 2, 1, 1))


def draw_mps_tensors(n: int, chi: int, rng: np.random.Generator) -> np.ndarray:
    """4 n chi^2 i.i.d. N(0,1) reals; real parts then imaginary parts per entry."""
    g = rng.standard_normal((n, 2, chi, chi, 2))
    return g[..., 0] + 1j * g[..., 1]


def sample_random_mps(n: int, chi: int, rng: np.random.Generator, max_resamples: int = 100) -> Mps:
    if chi < 1:
        raise ValidationError("bond dimension must be >= 1")
    check_capacity(n)
    for attempt in range(max_resamples + 1):
        m = Mps(n, chi, draw_mps_tensors(n, chi, rng), resamples=attempt)
        if mps_norm_squared(m) >= DEGENERATE_NORM_SQ:
            return m
    raise DegenerateStateError(f"{max_resamples} consecutive degenerate MPS draws")


def _transfer(a: np.ndarray, op: np.ndarray | None = None) -> np.ndarray:
    # sum_{s,s'} op[s,s'] conj(A^s) (x) A^{s'}
    if op is None:
        return np.kron(a[0].conj(), a[0]) + np.kron(a[1].conj(), a[1])
    out = 0
    for s in range(2):
        for sp in range(2):
            if op[s, sp] != 0:
                out = out + op[s, sp] * np.kron(a[s].conj(), a[sp])
    return out


def _trace_of_product(mats) -> tuple[complex, float]:
    """Tr[M_1 ... M_n] as (mantissa, log scale), rescaling as it goes."""
    acc = None
    log_scale = 0.0
    for m in mats:
        acc = m.copy() if acc is None else acc @ m
        s = np.max(np.abs(acc))
        if s > 0:
            acc /= s
            log_scale += np.log(s)
    return complex(np.trace(acc)), log_scale


def mps_norm_squared(m: Mps) -> float:
    val, log_scale = _trace_of_product(_transfer(a) for a in m.tensors)
    return float(val.real * np.exp(log_scale))


def mps_amplitudes(m: Mps) -> np.ndarray:
    """Unnormalized amplitude vector (qubit 1 = most significant bit)."""
    check_capacity(m.num_qubits)
    out = np.empty(1 << m.num_qubits, dtype=np.complex128)
    K.mps_amplitudes(np.ascontiguousarray(m.tensors), out)
    return out


def mps_to_statevector(m: Mps) -> StateVector:
    amps = mps_amplitudes(m)
    nrm2 = K.norm_sq(amps)
    if nrm2 < DEGENERATE_NORM_SQ:
        raise DegenerateStateError(f"MPS norm^2 {nrm2:.3e} below {DEGENERATE_NORM_SQ}")
    K.normalize_inplace(amps)
    return StateVector(m.num_qubits, amps)


def _site_operator(p: PauliString, site: int) -> np.ndarray:
    bit = 1 << (p.num_qubits - 1 - site)
    op = I2
    if p.x_mask & bit:
        op = X
    if p.z_mask & bit:
        op = op @ Z
    return op


def mps_pauli_expectation(m: Mps, p: PauliString) -> float:
    """<P> on the normalized MPS via transfer matrices with Pauli insertions."""
    if p.num_qubits != m.num_qubits:
        raise DimensionMismatchError(f"{p.num_qubits} vs {m.num_qubits} qubits")
    if not p.is_hermitian():
        raise ValidationError(f"{p.label} is not Hermitian")
    num, num_scale = _trace_of_product(
        _transfer(a, _site_operator(p, i)) for i, a in enumerate(m.tensors)
    )
    den, den_scale = _trace_of_product(_transfer(a) for a in m.tensors)
    val = (1j**p.phase_exponent) * num / den.real * np.exp(num_scale - den_scale)
    if abs(val.imag) > IMAG_TOL:
        raise ArithmeticError(f"Hermitian expectation has imaginary part {val.imag:.3e}")
    return float(val.real)


@dataclass(frozen=True)
class PauliSum:
    """Real linear combination of Hermitian Pauli strings on a common n."""

    terms: tuple

    def __post_init__(self):
        terms = tuple((float(c), p) for c, p in self.terms)
        if not terms:
            raise ValidationError("empty Pauli sum")
        n = terms[0][1].num_qubits
        for _, p in terms:
            if p.num_qubits != n:
                raise DimensionMismatchError("mixed qubit counts in Pauli sum")
            if not p.is_hermitian():
                raise ValidationError(f"{p.label} is not Hermitian")
        object.__setattr__(self, "terms", terms)

    @property
    def num_qubits(self) -> int:
        return self.terms[0][1].num_qubits

    def matrix(self) -> np.ndarray:
        return sum(c * p.matrix() for c, p in self.terms)


def pauli_sum_expectation(m: Mps, o: PauliSum) -> float:
    if o.num_qubits != m.num_qubits:
        raise DimensionMismatchError(f"{o.num_qubits} vs {m.num_qubits} qubits")
    return float(sum(c * mps_pauli_expectation(m, p) for c, p in o.terms))


def cmps_expectation(m: Mps, t: CliffordTableau, o: PauliSum) -> float:
    """<MPS| U^dagger O U |MPS> with U^dagger P U obtained by tableau conjugation."""
    if t.num_qubits != m.num_qubits:
        raise DimensionMismatchError(f"{t.num_qubits} vs {m.num_qubits} qubits")
    inv = invert_tableau(t)
    return float(sum(c * mps_pauli_expectation(m, conjugate_pauli(inv, p)) for c, p in o.terms))
