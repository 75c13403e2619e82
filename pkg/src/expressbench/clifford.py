"""Clifford tableaux: uniform sampling, Pauli conjugation, inversion, synthesis.

A tableau stores the conjugation map ``P -> U P U^dagger`` of a Clifford ``U``
up to global phase. Row ``j`` (``j < n``) is the image of ``X_{j+1}``, row
``n + j`` the image of ``Z_{j+1}``; each row is ``[x_1..x_n | z_1..z_n]``
describing a Hermitian, phase-free Pauli string, and ``signs[row]`` (0/1)
says whether that image carries a minus sign.

Text dump format (``CliffordTableau.to_text``)::

    clifford-tableau n=2
    10 00 +
    00 11 -
    ...

one line per row in the order X_1..X_n, Z_1..Z_n: x bits, z bits, sign.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba as nb
import numpy as np

from . import _kernels as K
from .errors import DimensionMismatchError, ValidationError
from .qstate import PauliString, StateVector, basis_state, check_capacity

_GATE_NAMES = {K.GATE_H: "H", K.GATE_S: "S", K.GATE_CNOT: "CNOT"}
_GATE_CODES = {v: k for k, v in _GATE_NAMES.items()}


def symplectic_form(n: int) -> np.ndarray:
    lam = np.zeros((2 * n, 2 * n), dtype=np.uint8)
    lam[:n, n:] = np.eye(n, dtype=np.uint8)
    lam[n:, :n] = np.eye(n, dtype=np.uint8)
    return lam


def group_order(n: int) -> int:
    """Size of the n-qubit Clifford group modulo global phases."""
    out = 2 ** (n * n + 2 * n)
    for j in range(1, n + 1):
        out *= 4**j - 1
    return out


@dataclass(frozen=True, eq=False)
class CliffordTableau:
    num_qubits: int
    symplectic: np.ndarray
    signs: np.ndarray

    def __post_init__(self):
        n = self.num_qubits
        m = np.array(self.symplectic, dtype=np.uint8, copy=True) & 1
        s = np.array(self.signs, dtype=np.uint8, copy=True).reshape(-1) & 1
        if m.shape != (2 * n, 2 * n) or s.shape != (2 * n,):
            raise DimensionMismatchError(f"tableau shapes {m.shape}, {s.shape} for n={n}")
        m.flags.writeable = False
        s.flags.writeable = False
        object.__setattr__(self, "symplectic", m)
        object.__setattr__(self, "signs", s)

    @classmethod
    def identity(cls, n: int) -> "CliffordTableau":
        return cls(n, np.eye(2 * n, dtype=np.uint8), np.zeros(2 * n, dtype=np.uint8))

    def __eq__(self, other):
        if not isinstance(other, CliffordTableau):
            return NotImplemented
        return (
            self.num_qubits == other.num_qubits
            and np.array_equal(self.symplectic, other.symplectic)
            and np.array_equal(self.signs, other.signs)
        )

    def __hash__(self):
        return hash((self.num_qubits, self.symplectic.tobytes(), self.signs.tobytes()))

    def key(self) -> bytes:
        return self.symplectic.tobytes() + self.signs.tobytes()

    def is_symplectic(self) -> bool:
        m = self.symplectic.astype(np.int64)
        lam = symplectic_form(self.num_qubits).astype(np.int64)
        return np.array_equal((m @ lam @ m.T) % 2, lam)

    def row_pauli(self, row: int) -> PauliString:
        n = self.num_qubits
        weights = 1 << np.arange(n - 1, -1, -1, dtype=np.int64)
        x = int(self.symplectic[row, :n].astype(np.int64) @ weights)
        z = int(self.symplectic[row, n:].astype(np.int64) @ weights)
        return PauliString.hermitian(n, x, z, -1 if self.signs[row] else 1)

    def images(self) -> list[PauliString]:
        return [self.row_pauli(r) for r in range(2 * self.num_qubits)]

    def to_text(self) -> str:
        n = self.num_qubits
        lines = [f"clifford-tableau n={n}"]
        for r in range(2 * n):
            xs = "".join(str(b) for b in self.symplectic[r, :n])
            zs = "".join(str(b) for b in self.symplectic[r, n:])
            lines.append(f"{xs} {zs} {'-' if self.signs[r] else '+'}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "CliffordTableau":
        lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
        head = lines[0].split()
        if head[0] != "clifford-tableau" or not head[1].startswith("n="):
            raise ValidationError("not a clifford-tableau dump")
        n = int(head[1][2:])
        m = np.zeros((2 * n, 2 * n), dtype=np.uint8)
        s = np.zeros(2 * n, dtype=np.uint8)
        for r, ln in enumerate(lines[1 : 2 * n + 1]):
            xs, zs, sg = ln.split()
            m[r] = [int(c) for c in xs + zs]
            s[r] = sg == "-"
        return cls(n, m, s)


# ---------------------------------------------------------------- kernels
# All kernels below use 0-based qubit columns; gate records are 1-based.


@nb.njit(cache=True, nogil=True)
def _h(tab, sgn, q):
    n = tab.shape[0] // 2
    for r in range(2 * n):
        x = tab[r, q]
        z = tab[r, n + q]
        sgn[r] ^= x & z
        tab[r, q] = z
        tab[r, n + q] = x


@nb.njit(cache=True, nogil=True)
def _s(tab, sgn, q):
    n = tab.shape[0] // 2
    for r in range(2 * n):
        x = tab[r, q]
        sgn[r] ^= x & tab[r, n + q]
        tab[r, n + q] ^= x


@nb.njit(cache=True, nogil=True)
def _cx(tab, sgn, c, t):
    n = tab.shape[0] // 2
    for r in range(2 * n):
        xc = tab[r, c]
        xt = tab[r, t]
        zc = tab[r, n + c]
        zt = tab[r, n + t]
        sgn[r] ^= xc & zt & (xt ^ zc ^ 1)
        tab[r, t] = xt ^ xc
        tab[r, n + c] = zc ^ zt


@nb.njit(cache=True, nogil=True)
def _replay(tab, sgn, gates):
    for g in range(gates.shape[0]):
        op = gates[g, 0]
        if op == 0:
            _h(tab, sgn, gates[g, 1] - 1)
        elif op == 1:
            _s(tab, sgn, gates[g, 1] - 1)
        else:
            _cx(tab, sgn, gates[g, 1] - 1, gates[g, 2] - 1)


@nb.njit(cache=True, nogil=True)
def _emit(tab, sgn, log, k, op, a, b):
    if op == 0:
        _h(tab, sgn, a)
    elif op == 1:
        _s(tab, sgn, a)
    else:
        _cx(tab, sgn, a, b)
    log[k, 0] = op
    log[k, 1] = a + 1
    log[k, 2] = b + 1
    return k + 1


@nb.njit(cache=True, nogil=True)
def _swap(tab, sgn, log, k, a, b):
    k = _emit(tab, sgn, log, k, 2, a, b)
    k = _emit(tab, sgn, log, k, 2, b, a)
    return _emit(tab, sgn, log, k, 2, a, b)


@nb.njit(cache=True, nogil=True)
def _synthesize(tab_in, sgn_in):
    """Gaussian-elimination synthesis over {H, S, CNOT}.

    Appends gates g_1..g_m until the tableau is the identity, then returns the
    inverse sequence, which implements the input Clifford up to phase.
    """
    n = tab_in.shape[0] // 2
    tab = tab_in.copy()
    sgn = sgn_in.copy()
    log = np.zeros((n * (4 * n + 11) + 1, 3), np.int64)
    k = 0
    for q in range(n):
        # pivot: image of X_q gets an x bit on qubit q
        if tab[q, q] == 0:
            done = False
            for i in range(q + 1, n):
                if tab[q, i]:
                    k = _swap(tab, sgn, log, k, i, q)
                    done = True
                    break
            if not done:
                for i in range(q, n):
                    if tab[q, n + i]:
                        k = _emit(tab, sgn, log, k, 0, i, 0)
                        if i != q:
                            k = _swap(tab, sgn, log, k, i, q)
                        break
        # image of X_q -> +-X_q
        for i in range(q + 1, n):
            if tab[q, i]:
                k = _emit(tab, sgn, log, k, 2, q, i)
        anyz = False
        for i in range(q, n):
            if tab[q, n + i]:
                anyz = True
        if anyz:
            if tab[q, n + q] == 0:
                k = _emit(tab, sgn, log, k, 1, q, 0)
            for i in range(q + 1, n):
                if tab[q, n + i]:
                    k = _emit(tab, sgn, log, k, 2, i, q)
            k = _emit(tab, sgn, log, k, 1, q, 0)
        # image of Z_q -> +-Z_q (it anticommutes with X_q, so z_q = 1 here)
        r = n + q
        for i in range(q + 1, n):
            if tab[r, n + i]:
                k = _emit(tab, sgn, log, k, 2, i, q)
        anyx = False
        for i in range(q, n):
            if tab[r, i]:
                anyx = True
        if anyx:
            k = _emit(tab, sgn, log, k, 0, q, 0)
            for i in range(q + 1, n):
                if tab[r, i]:
                    k = _emit(tab, sgn, log, k, 2, q, i)
            if tab[r, n + q]:
                k = _emit(tab, sgn, log, k, 1, q, 0)
            k = _emit(tab, sgn, log, k, 0, q, 0)
    # remaining Pauli: Z = S S flips X images, X = H S S H flips Z images
    for q in range(n):
        if sgn[q]:
            k = _emit(tab, sgn, log, k, 1, q, 0)
            k = _emit(tab, sgn, log, k, 1, q, 0)
        if sgn[n + q]:
            k = _emit(tab, sgn, log, k, 0, q, 0)
            k = _emit(tab, sgn, log, k, 1, q, 0)
            k = _emit(tab, sgn, log, k, 1, q, 0)
            k = _emit(tab, sgn, log, k, 0, q, 0)
    # invert: reverse order, S^dagger = S S S
    m = 0
    for g in range(k):
        m += 3 if log[g, 0] == 1 else 1
    out = np.zeros((m, 3), np.int64)
    j = 0
    for g in range(k - 1, -1, -1):
        reps = 3 if log[g, 0] == 1 else 1
        for _ in range(reps):
            out[j, 0] = log[g, 0]
            out[j, 1] = log[g, 1]
            out[j, 2] = log[g, 2] if log[g, 0] == 2 else 0
            j += 1
    return out


@nb.njit(cache=True, nogil=True)
def _inverse_unit_lower(mat):
    n = mat.shape[0]
    inv = np.zeros((n, n), np.uint8)
    for i in range(n):
        inv[i, i] = 1
        for j in range(i):
            if mat[i, j]:
                for c in range(n):
                    inv[i, c] ^= inv[j, c]
    return inv


@nb.njit(cache=True, nogil=True)
def _matmul2(a, b):
    n, m = a.shape[0], b.shape[1]
    out = np.zeros((n, m), np.uint8)
    for i in range(n):
        for k in range(a.shape[1]):
            if a[i, k]:
                for j in range(m):
                    out[i, j] ^= b[k, j]
    return out


@nb.njit(cache=True, nogil=True)
def _canonical_tableau(n, u, bits):
    """Bravyi-Maslov canonical form F1 . H S . F2 from pre-drawn randomness.

    u holds n uniforms in [0, 1) for the quantum Mallows draw; bits holds
    2n^2 + 2n random bits (diagonals, lower triangles, then the 2n signs).
    """
    had = np.zeros(n, np.uint8)
    perm = np.zeros(n, np.int64)
    avail = np.arange(n)
    n_avail = n
    for i in range(n):
        m = n - i
        eps = 4.0 ** (-m)
        r = 1.0 - u[i]
        index = -int(np.ceil(np.log2(r + (1.0 - r) * eps)))
        if index < m:
            had[i] = 1
            kk = index
        else:
            kk = 2 * m - index - 1
        perm[i] = avail[kk]
        for j in range(kk, n_avail - 1):
            avail[j] = avail[j + 1]
        n_avail -= 1

    pos = 0
    gamma1 = np.zeros((n, n), np.uint8)
    gamma2 = np.zeros((n, n), np.uint8)
    delta1 = np.zeros((n, n), np.uint8)
    delta2 = np.zeros((n, n), np.uint8)
    for i in range(n):
        gamma1[i, i] = bits[pos]
        pos += 1
    for i in range(n):
        gamma2[i, i] = bits[pos]
        pos += 1
    for i in range(n):
        delta1[i, i] = 1
        delta2[i, i] = 1
    for i in range(n):
        for j in range(i):
            gamma1[i, j] = bits[pos]
            gamma1[j, i] = bits[pos]
            pos += 1
    for i in range(n):
        for j in range(i):
            gamma2[i, j] = bits[pos]
            gamma2[j, i] = bits[pos]
            pos += 1
    for i in range(n):
        for j in range(i):
            delta1[i, j] = bits[pos]
            pos += 1
    for i in range(n):
        for j in range(i):
            delta2[i, j] = bits[pos]
            pos += 1

    table1 = np.zeros((2 * n, 2 * n), np.uint8)
    table2 = np.zeros((2 * n, 2 * n), np.uint8)
    prod1 = _matmul2(gamma1, delta1)
    prod2 = _matmul2(gamma2, delta2)
    inv1 = _inverse_unit_lower(delta1).T
    inv2 = _inverse_unit_lower(delta2).T
    table1[:n, :n] = delta1
    table1[n:, :n] = prod1
    table1[n:, n:] = inv1
    table2[:n, :n] = delta2
    table2[n:, :n] = prod2
    table2[n:, n:] = inv2

    # Weyl element (Hadamards on a qubit permutation) sits between the two
    # Borel factors: Bruhat cells B w B are weighted by the Mallows draw.
    weyl = np.zeros((2 * n, 2 * n), np.uint8)
    for i in range(n):
        if had[i]:
            weyl[i, n + perm[i]] = 1
            weyl[n + i, perm[i]] = 1
        else:
            weyl[i, perm[i]] = 1
            weyl[n + i, n + perm[i]] = 1
    tab = _matmul2(_matmul2(table2, weyl), table1)
    sgn = np.empty(2 * n, np.uint8)
    for r in range(2 * n):
        sgn[r] = bits[pos]
        pos += 1
    return tab, sgn


# ------------------------------------------------------------- public API


def random_bits_needed(n: int) -> int:
    return 2 * n * n + 2 * n


def sample_random_clifford(n: int, rng: np.random.Generator) -> CliffordTableau:
    """Uniform Clifford (mod phase) via the canonical-form sampler."""
    check_capacity(n)
    u = rng.random(n)
    bits = rng.integers(0, 2, size=random_bits_needed(n), dtype=np.uint8)
    tab, sgn = _canonical_tableau(n, u, bits)
    return CliffordTableau(n, tab, sgn)


def conjugate_pauli(t: CliffordTableau, p: PauliString) -> PauliString:
    """U P U^dagger, with the overall phase tracked exactly."""
    n = t.num_qubits
    if p.num_qubits != n:
        raise DimensionMismatchError(f"{p.num_qubits} vs {n} qubits")
    out = PauliString(n, 0, 0, p.phase_exponent)
    for l in range(n):
        if p.x_mask >> (n - 1 - l) & 1:
            out = out * t.row_pauli(l)
    for l in range(n):
        if p.z_mask >> (n - 1 - l) & 1:
            out = out * t.row_pauli(n + l)
    return out


def compose(first: CliffordTableau, second: CliffordTableau) -> CliffordTableau:
    """Tableau of ``second @ first`` (apply ``first``, then ``second``)."""
    n = first.num_qubits
    if second.num_qubits != n:
        raise DimensionMismatchError("tableaux on different qubit counts")
    return _from_images(n, [conjugate_pauli(second, img) for img in first.images()])


def _from_images(n: int, images: list[PauliString]) -> CliffordTableau:
    m = np.zeros((2 * n, 2 * n), dtype=np.uint8)
    s = np.zeros(2 * n, dtype=np.uint8)
    for r, img in enumerate(images):
        for l in range(n):
            m[r, l] = img.x_mask >> (n - 1 - l) & 1
            m[r, n + l] = img.z_mask >> (n - 1 - l) & 1
        s[r] = img.sign < 0
    return CliffordTableau(n, m, s)


def invert_tableau(t: CliffordTableau) -> CliffordTableau:
    n = t.num_qubits
    lam = symplectic_form(n).astype(np.int64)
    minv = (lam @ t.symplectic.astype(np.int64).T @ lam) % 2
    probe = CliffordTableau(n, minv, np.zeros(2 * n, dtype=np.uint8))
    signs = np.zeros(2 * n, dtype=np.uint8)
    for r in range(2 * n):
        signs[r] = conjugate_pauli(t, probe.row_pauli(r)).sign < 0
    return CliffordTableau(n, minv, signs)


@dataclass(frozen=True, eq=False)
class GateList:
    """Ordered {H, S, CNOT} circuit; rows of ``codes`` are (opcode, a, b), 1-based."""

    num_qubits: int
    codes: np.ndarray

    def __len__(self):
        return self.codes.shape[0]

    def __iter__(self):
        for op, a, b in self.codes:
            name = _GATE_NAMES[int(op)]
            yield (name, int(a), int(b)) if name == "CNOT" else (name, int(a))

    @classmethod
    def from_ops(cls, n: int, ops) -> "GateList":
        rows = []
        for op in ops:
            code = _GATE_CODES[op[0]]
            a, b = op[1], (op[2] if code == K.GATE_CNOT else 0)
            if not 1 <= a <= n or (code == K.GATE_CNOT and (not 1 <= b <= n or a == b)):
                raise IndexError(f"gate indices out of range in {op}")
            rows.append((code, a, b))
        return cls(n, np.array(rows, dtype=np.int64).reshape(-1, 3))

    @staticmethod
    def length_bound(n: int) -> int:
        """Upper bound on the synthesized length (S^dagger expands to three S)."""
        return 3 * n * (4 * n + 11)


def tableau_to_gates(t: CliffordTableau) -> GateList:
    codes = _synthesize(np.ascontiguousarray(t.symplectic), np.ascontiguousarray(t.signs))
    return GateList(t.num_qubits, codes)


def tableau_from_gates(gates: GateList) -> CliffordTableau:
    n = gates.num_qubits
    tab = np.eye(2 * n, dtype=np.uint8)
    sgn = np.zeros(2 * n, dtype=np.uint8)
    _replay(tab, sgn, np.ascontiguousarray(gates.codes, dtype=np.int64))
    return CliffordTableau(n, tab, sgn)


def apply_gates_dense(state: StateVector, gates: GateList) -> StateVector:
    if gates.num_qubits != state.num_qubits:
        raise DimensionMismatchError(f"{gates.num_qubits} vs {state.num_qubits} qubits")
    amps = state.amplitudes.copy()
    K.apply_gates(amps, state.num_qubits, gates.codes)
    return StateVector(state.num_qubits, amps)


def apply_clifford_dense(state: StateVector, t: CliffordTableau) -> StateVector:
    if t.num_qubits != state.num_qubits:
        raise DimensionMismatchError(f"{t.num_qubits} vs {state.num_qubits} qubits")
    return apply_gates_dense(state, tableau_to_gates(t))


def sample_stabilizer_state(n: int, rng: np.random.Generator) -> StateVector:
    return apply_clifford_dense(basis_state(n), sample_random_clifford(n, rng))
