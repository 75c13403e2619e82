"""Compiled inner loops for dense states and MPS contraction.

Every kernel handles one state at a time in a fixed operation order, so a
batched call reproduces the single-state result bit for bit. Sums over more
than a handful of terms use Neumaier compensation.
"""

import numba as nb
import numpy as np

GATE_H = 0
GATE_S = 1
GATE_CNOT = 2


@nb.njit(cache=True, nogil=True)
def _neumaier_add(s, c, x):
    t = s + x
    if abs(s) >= abs(x):
        c += (s - t) + x
    else:
        c += (x - t) + s
    return t, c


@nb.njit(cache=True, nogil=True)
def vdot(a, b):
    """Compensated sum of conj(a[k]) * b[k]."""
    sr = 0.0
    cr = 0.0
    si = 0.0
    ci = 0.0
    for k in range(a.shape[0]):
        p = a[k].conjugate() * b[k]
        sr, cr = _neumaier_add(sr, cr, p.real)
        si, ci = _neumaier_add(si, ci, p.imag)
    return complex(sr + cr, si + ci)


@nb.njit(cache=True, nogil=True)
def norm_sq(a):
    s = 0.0
    c = 0.0
    for k in range(a.shape[0]):
        s, c = _neumaier_add(s, c, a[k].real * a[k].real + a[k].imag * a[k].imag)
    return s + c


@nb.njit(cache=True, nogil=True)
def normalize_inplace(a):
    nrm = np.sqrt(norm_sq(a))
    for k in range(a.shape[0]):
        a[k] = a[k] / nrm
    return nrm


@nb.njit(cache=True, nogil=True)
def apply_1q(psi, n, q, g00, g01, g10, g11):
    # q is 1-based; qubit 1 is the most significant bit
    bit = 1 << (n - q)
    d = psi.shape[0]
    for hi in range(0, d, 2 * bit):
        for lo in range(hi, hi + bit):
            a = psi[lo]
            b = psi[lo + bit]
            psi[lo] = g00 * a + g01 * b
            psi[lo + bit] = g10 * a + g11 * b


@nb.njit(cache=True, nogil=True)
def apply_cnot(psi, n, c, t):
    cbit = 1 << (n - c)
    tbit = 1 << (n - t)
    for i in range(psi.shape[0]):
        if (i & cbit) and not (i & tbit):
            j = i | tbit
            tmp = psi[i]
            psi[i] = psi[j]
            psi[j] = tmp


@nb.njit(cache=True, nogil=True)
def apply_gates(psi, n, gates):
    """Apply an (k, 3) int array of (opcode, a, b) rows in order."""
    r = 1.0 / np.sqrt(2.0)
    for g in range(gates.shape[0]):
        op = gates[g, 0]
        if op == GATE_H:
            apply_1q(psi, n, gates[g, 1], r, r, r, -r)
        elif op == GATE_S:
            bit = 1 << (n - gates[g, 1])
            for i in range(psi.shape[0]):
                if i & bit:
                    psi[i] = 1j * psi[i]
        else:
            apply_cnot(psi, n, gates[g, 1], gates[g, 2])


@nb.njit(cache=True, nogil=True)
def apply_gates_batch(states, n, gates_list_flat, offsets):
    for b in range(states.shape[0]):
        apply_gates(states[b], n, gates_list_flat[offsets[b]:offsets[b + 1]])


@nb.njit(cache=True, nogil=True)
def _permute(psi, perm, tmp):
    for i in range(psi.shape[0]):
        tmp[i] = psi[perm[i]]
    for i in range(psi.shape[0]):
        psi[i] = tmp[i]


@nb.njit(cache=True, nogil=True)
def fqnn_batch(units, perm, out):
    """Layered circuit: per-qubit 2x2 unitaries then a fixed basis permutation.

    units has shape (B, L, n, 2, 2); the first layer acts on |0...0> and is
    evaluated directly as a product state.
    """
    nb_, n_layers, n = units.shape[0], units.shape[1], units.shape[2]
    d = out.shape[1]
    tmp = np.empty(d, np.complex128)
    for b in range(nb_):
        psi = out[b]
        psi[0] = 1.0
        size = 1
        for q in range(n):
            u0 = units[b, 0, q, 0, 0]
            u1 = units[b, 0, q, 1, 0]
            for i in range(size - 1, -1, -1):
                a = psi[i]
                psi[2 * i] = a * u0
                psi[2 * i + 1] = a * u1
            size *= 2
        _permute(psi, perm, tmp)
        for layer in range(1, n_layers):
            for q in range(n):
                u = units[b, layer, q]
                apply_1q(psi, n, q + 1, u[0, 0], u[0, 1], u[1, 0], u[1, 1])
            _permute(psi, perm, tmp)


@nb.njit(cache=True, nogil=True)
def mps_amplitudes(tensors, out):
    """Tr[A1^{s1} ... An^{sn}] for every bitstring, via a prefix-product sweep.

    tensors has shape (n, 2, chi, chi); out has length 2**n.
    """
    n = tensors.shape[0]
    chi = tensors.shape[2]
    if n == 1:
        for s in range(2):
            acc = 0.0 + 0.0j
            for i in range(chi):
                acc += tensors[0, s, i, i]
            out[s] = acc
        return
    prev = np.empty((1 << (n - 1), chi, chi), np.complex128)
    nxt = np.empty((1 << (n - 1), chi, chi), np.complex128)
    for s in range(2):
        prev[s] = tensors[0, s]
    size = 2
    for site in range(1, n - 1):
        for b in range(size):
            for s in range(2):
                a = tensors[site, s]
                dst = nxt[2 * b + s]
                for i in range(chi):
                    for j in range(chi):
                        acc = 0.0 + 0.0j
                        for k in range(chi):
                            acc += prev[b, i, k] * a[k, j]
                        dst[i, j] = acc
        size *= 2
        prev, nxt = nxt, prev
    last = n - 1
    for b in range(size):
        for s in range(2):
            a = tensors[last, s]
            acc = 0.0 + 0.0j
            for i in range(chi):
                for k in range(chi):
                    acc += prev[b, i, k] * a[k, i]
            out[2 * b + s] = acc


@nb.njit(cache=True, nogil=True)
def mps_states_batch(tensors, out):
    """Normalized dense states for a batch of MPS; returns the squared norms."""
    norms = np.empty(tensors.shape[0])
    for b in range(tensors.shape[0]):
        mps_amplitudes(tensors[b], out[b])
        nrm2 = norm_sq(out[b])
        norms[b] = nrm2
        if nrm2 > 0.0:
            nrm = np.sqrt(nrm2)
            for k in range(out.shape[1]):
                out[b, k] = out[b, k] / nrm
    return norms


@nb.njit(cache=True, nogil=True)
def fidelities(a, b, out):
    for k in range(a.shape[0]):
        z = vdot(a[k], b[k])
        f = z.real * z.real + z.imag * z.imag
        if f > 1.0:
            f = 1.0
        out[k] = f


@nb.njit(cache=True, nogil=True)
def fwht(v):
    """In-place Walsh-Hadamard transform (unnormalized, natural ordering)."""
    d = v.shape[0]
    h = 1
    while h < d:
        for i in range(0, d, 2 * h):
            for j in range(i, i + h):
                a = v[j]
                b = v[j + h]
                v[j] = a + b
                v[j + h] = a - b
        h *= 2


@nb.njit(cache=True, nogil=True)
def _popcount(x):
    c = 0
    while x:
        x &= x - 1
        c += 1
    return c


@nb.njit(cache=True, nogil=True)
def pauli_spectrum(psi, out):
    """out[x, z] = <psi| i^{|x&z|} X^x Z^z |psi> for all masks x, z."""
    d = psi.shape[0]
    v = np.empty(d, np.complex128)
    for x in range(d):
        for b in range(d):
            v[b] = psi[b ^ x].conjugate() * psi[b]
        fwht(v)
        for z in range(d):
            c = _popcount(x & z) & 3
            w = v[z]
            # multiply by i^c and keep the real part
            if c == 0:
                out[x, z] = w.real
            elif c == 1:
                out[x, z] = -w.imag
            elif c == 2:
                out[x, z] = -w.real
            else:
                out[x, z] = w.imag


@nb.njit(cache=True, nogil=True)
def pauli_fourth_moment(psi):
    """Compensated sum over all Pauli strings of <P>^4."""
    d = psi.shape[0]
    v = np.empty(d, np.complex128)
    s = 0.0
    c = 0.0
    for x in range(d):
        for b in range(d):
            v[b] = psi[b ^ x].conjugate() * psi[b]
        fwht(v)
        rs = 0.0
        rc = 0.0
        for z in range(d):
            a = v[z].real * v[z].real + v[z].imag * v[z].imag
            rs, rc = _neumaier_add(rs, rc, a * a)
        s, c = _neumaier_add(s, c, rs + rc)
    return s + c
