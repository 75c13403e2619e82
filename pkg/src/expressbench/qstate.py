"""Dense statevectors, Pauli strings and the primitive operations on them.

Conventions
-----------
* Qubits are numbered 1..n and qubit 1 is the most significant bit of the
  basis index, so ``|q1 q2 ... qn>`` has index ``q1 * 2**(n-1) + ... + qn``.
* A :class:`PauliString` with masks ``(x, z)`` and phase exponent ``k``
  denotes ``i**k * prod_l X_l**x_l Z_l**z_l`` (X applied after Z on each
  qubit).  Bit ``n - l`` of a mask refers to qubit ``l``, mirroring the basis
  index.  ``Y = i X Z``, so the Hermitian, phase-free string for masks
  ``(x, z)`` carries phase exponent ``popcount(x & z)``.
* Rotations: ``R_Y(t) = exp(-i t Y / 2)``, ``R_Z(t) = exp(-i t Z / 2)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from . import _kernels as K
from .errors import CapacityError, DimensionMismatchError, ValidationError

MAX_QUBITS = 16

NORM_TOL = 1e-10
UNITARY_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S = np.array([[1, 0], [0, 1j]], dtype=complex)
T = np.array([[1, 0], [0, np.exp(1j * np.pi / 4)]], dtype=complex)


def ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(theta: float) -> np.ndarray:
    return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]], dtype=complex)


def check_capacity(n: int) -> None:
    if not isinstance(n, (int, np.integer)) or n < 1 or n > MAX_QUBITS:
        raise CapacityError(f"num_qubits must be in [1, {MAX_QUBITS}], got {n}")


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state on ``num_qubits`` qubits (read-only amplitudes)."""

    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        check_capacity(self.num_qubits)
        amps = np.array(self.amplitudes, dtype=np.complex128, copy=True).reshape(-1)
        if amps.shape[0] != 1 << self.num_qubits:
            raise DimensionMismatchError(
                f"expected {1 << self.num_qubits} amplitudes, got {amps.shape[0]}"
            )
        nrm2 = K.norm_sq(amps)
        if abs(nrm2 - 1.0) > NORM_TOL:
            raise ValidationError(f"state is not normalized (norm^2 = {nrm2!r})")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return 1 << self.num_qubits

    @classmethod
    def from_amplitudes(cls, amplitudes, normalize: bool = True) -> "StateVector":
        amps = np.array(amplitudes, dtype=np.complex128, copy=True).reshape(-1)
        n = int(round(np.log2(amps.shape[0]))) if amps.shape[0] > 0 else 0
        if amps.shape[0] != 1 << n:
            raise DimensionMismatchError(f"length {amps.shape[0]} is not a power of two")
        if normalize:
            nrm2 = K.norm_sq(amps)
            if nrm2 <= 0.0:
                raise ValidationError("cannot normalize the zero vector")
            K.normalize_inplace(amps)
        return cls(n, amps)

    def __repr__(self):
        return f"StateVector(num_qubits={self.num_qubits})"


def _wrap(n: int, amps: np.ndarray) -> StateVector:
    # internal constructor for amplitudes produced by norm-preserving kernels
    return StateVector(n, amps)


def basis_state(n: int, index: int = 0) -> StateVector:
    """Computational basis state ``|index>``; ``|0...0>`` by default."""
    check_capacity(n)
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(n, amps)


def _check_qubit(state: StateVector, q: int) -> None:
    if not isinstance(q, (int, np.integer)) or not 1 <= q <= state.num_qubits:
        raise IndexError(f"qubit {q} out of range [1, {state.num_qubits}]")


def is_unitary(gate: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    gate = np.asarray(gate, dtype=complex)
    return gate.shape == (2, 2) and np.allclose(gate.conj().T @ gate, I2, atol=tol, rtol=0)


def apply_single_qubit(state: StateVector, qubit: int, gate) -> StateVector:
    gate = np.asarray(gate, dtype=complex)
    if not is_unitary(gate):
        raise ValidationError("gate is not a 2x2 unitary within tolerance")
    _check_qubit(state, qubit)
    amps = state.amplitudes.copy()
    K.apply_1q(amps, state.num_qubits, qubit, gate[0, 0], gate[0, 1], gate[1, 0], gate[1, 1])
    return _wrap(state.num_qubits, amps)


def apply_cnot(state: StateVector, control: int, target: int) -> StateVector:
    _check_qubit(state, control)
    _check_qubit(state, target)
    if control == target:
        raise IndexError("control and target must differ")
    amps = state.amplitudes.copy()
    K.apply_cnot(amps, state.num_qubits, control, target)
    return _wrap(state.num_qubits, amps)


def _check_same(a: StateVector, b: StateVector) -> None:
    if a.num_qubits != b.num_qubits:
        raise DimensionMismatchError(f"{a.num_qubits} vs {b.num_qubits} qubits")


def inner_product(a: StateVector, b: StateVector) -> complex:
    """<a|b>, conjugating the first argument."""
    _check_same(a, b)
    return K.vdot(a.amplitudes, b.amplitudes)


def fidelity(a: StateVector, b: StateVector) -> float:
    z = inner_product(a, b)
    return float(min(max(z.real * z.real + z.imag * z.imag, 0.0), 1.0))


def haar_amplitudes(n: int, rng: np.random.Generator) -> np.ndarray:
    """Normalized i.i.d. complex Gaussian vector (real parts drawn first)."""
    d = 1 << n
    g = rng.standard_normal(2 * d)
    amps = g[:d] + 1j * g[d:]
    K.normalize_inplace(amps)
    return amps


def sample_haar_state(n: int, rng: np.random.Generator) -> StateVector:
    check_capacity(n)
    return _wrap(n, haar_amplitudes(n, rng))


@dataclass(frozen=True)
class PauliString:
    num_qubits: int
    x_mask: int
    z_mask: int
    phase_exponent: int = 0

    def __post_init__(self):
        full = (1 << self.num_qubits) - 1
        if self.num_qubits < 1 or self.x_mask & ~full or self.z_mask & ~full:
            raise ValidationError("masks do not fit in num_qubits bits")
        if self.x_mask < 0 or self.z_mask < 0:
            raise ValidationError("masks must be non-negative")
        object.__setattr__(self, "x_mask", int(self.x_mask))
        object.__setattr__(self, "z_mask", int(self.z_mask))
        object.__setattr__(self, "phase_exponent", int(self.phase_exponent) % 4)

    @classmethod
    def hermitian(cls, n: int, x_mask: int, z_mask: int, sign: int = 1) -> "PauliString":
        """The Hermitian string ``sign * sigma_1 (x) ... (x) sigma_n`` for given masks."""
        k = _popcount(x_mask & z_mask) + (2 if sign < 0 else 0)
        return cls(n, x_mask, z_mask, k)

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Parse labels such as ``"XIZ"``, ``"-YY"`` or ``"+iXZ"``."""
        phase = 0
        body = label
        for prefix, k in (("+i", 1), ("-i", 3), ("i", 1), ("+", 0), ("-", 2)):
            if body.startswith(prefix):
                phase, body = k, body[len(prefix):]
                break
        n = len(body)
        if n == 0:
            raise ValidationError("empty Pauli label")
        x = z = 0
        for pos, ch in enumerate(body.upper()):
            bit = 1 << (n - 1 - pos)
            if ch == "X":
                x |= bit
            elif ch == "Z":
                z |= bit
            elif ch == "Y":
                x |= bit
                z |= bit
            elif ch != "I":
                raise ValidationError(f"bad Pauli letter {ch!r}")
        return cls(n, x, z, phase + _popcount(x & z))

    @property
    def letters(self) -> str:
        out = []
        for pos in range(self.num_qubits):
            bit = 1 << (self.num_qubits - 1 - pos)
            out.append("IZXY"[(2 if self.x_mask & bit else 0) + (1 if self.z_mask & bit else 0)])
        return "".join(out)

    @property
    def hermitian_phase(self) -> int:
        """Overall factor relative to the phase-free letters, as an exponent of i."""
        return (self.phase_exponent - _popcount(self.x_mask & self.z_mask)) % 4

    @property
    def label(self) -> str:
        return ("+", "+i", "-", "-i")[self.hermitian_phase] + self.letters

    def is_hermitian(self) -> bool:
        return self.hermitian_phase % 2 == 0

    @property
    def sign(self) -> int:
        if not self.is_hermitian():
            raise ValidationError(f"{self.label} is not Hermitian")
        return 1 if self.hermitian_phase == 0 else -1

    def __mul__(self, other: "PauliString") -> "PauliString":
        if self.num_qubits != other.num_qubits:
            raise DimensionMismatchError("Pauli strings on different qubit counts")
        # Z^z1 X^x2 = (-1)^{z1.x2} X^x2 Z^z1
        k = self.phase_exponent + other.phase_exponent + 2 * _popcount(self.z_mask & other.x_mask)
        return PauliString(self.num_qubits, self.x_mask ^ other.x_mask, self.z_mask ^ other.z_mask, k)

    def commutes_with(self, other: "PauliString") -> bool:
        return (_popcount(self.x_mask & other.z_mask) + _popcount(self.z_mask & other.x_mask)) % 2 == 0

    def matrix(self) -> np.ndarray:
        """Dense 2**n x 2**n matrix; intended for tests at small n."""
        out = np.array([[1j ** self.phase_exponent]], dtype=complex)
        for pos in range(self.num_qubits):
            bit = 1 << (self.num_qubits - 1 - pos)
            m = I2
            if self.x_mask & bit:
                m = X
            if self.z_mask & bit:
                m = m @ Z
            out = np.kron(out, m)
        return out


def _popcount(v: int) -> int:
    return bin(v).count("1")


def all_pauli_strings(n: int):
    """All 4**n Hermitian phase-free strings, ordered by (x_mask, z_mask)."""
    for x, z in product(range(1 << n), repeat=2):
        yield PauliString.hermitian(n, x, z)


def pauli_expectation(state: StateVector, p: PauliString) -> float:
    """<psi|P|psi> for a Hermitian Pauli string."""
    if p.num_qubits != state.num_qubits:
        raise DimensionMismatchError(f"{p.num_qubits} vs {state.num_qubits} qubits")
    if not p.is_hermitian():
        raise ValidationError(f"{p.label} is not Hermitian")
    psi = state.amplitudes
    idx = np.arange(psi.shape[0])
    signs = 1 - 2 * (_parity(idx & p.z_mask))
    # X^x Z^z |b> = (-1)^{z.b} |b ^ x>
    val = K.vdot(psi[idx ^ p.x_mask], signs * psi) * (1j ** p.phase_exponent)
    return float(val.real)


def _parity(v: np.ndarray) -> np.ndarray:
    v = v.copy()
    out = np.zeros_like(v)
    while np.any(v):
        out ^= v & 1
        v >>= 1
    return out


def reduced_density_spectrum(state: StateVector, cut: int) -> np.ndarray:
    """Eigenvalues of the reduced state of qubits 1..cut, descending, length 2**cut."""
    n = state.num_qubits
    if not isinstance(cut, (int, np.integer)) or not 1 <= cut <= n - 1:
        raise IndexError(f"cut {cut} out of range [1, {n - 1}]")
    m = state.amplitudes.reshape(1 << cut, 1 << (n - cut))
    sv = np.linalg.svd(m, compute_uv=False)
    out = np.zeros(1 << cut)
    out[: sv.shape[0]] = sv**2
    return np.sort(out)[::-1]
