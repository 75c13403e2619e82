import math
from functools import reduce

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from expressbench.clifford import apply_clifford_dense, sample_random_clifford
from expressbench.errors import DegenerateStateError, DimensionMismatchError, ValidationError
from expressbench.mps import (
    Mps,
    PauliSum,
    cmps_expectation,
    draw_mps_tensors,
    mps_amplitudes,
    mps_norm_squared,
    mps_pauli_expectation,
    mps_to_statevector,
    pauli_sum_expectation,
    sample_random_mps,
)
from expressbench.qstate import PauliString, all_pauli_strings, pauli_expectation
from expressbench.resources import entanglement_entropy

seeds = st.integers(0, 2**32 - 1)


def brute_force_amplitudes(m: Mps) -> np.ndarray:
    n = m.num_qubits
    out = np.empty(1 << n, dtype=complex)
    for k in range(1 << n):
        bits = [(k >> (n - 1 - i)) & 1 for i in range(n)]
        out[k] = np.trace(reduce(np.matmul, [m.tensors[i][b] for i, b in enumerate(bits)]))
    return out


def random_pauli(n, rng):
    return PauliString.hermitian(n, int(rng.integers(1 << n)), int(rng.integers(1 << n)))


def bell_mps() -> Mps:
    a = np.array([np.diag([1, 0]), np.diag([0, 1])], dtype=complex)
    return Mps(2, 2, np.stack([a, a]))


def test_parameter_count():
    assert sample_random_mps(10, 3, np.random.default_rng(0)).parameter_count == 360


def test_entries_standard_normal():
    g = draw_mps_tensors(50, 10, np.random.default_rng(1))
    x = np.concatenate([g.real.ravel(), g.imag.ravel()])
    assert x.size == 4 * 50 * 100
    assert stats.kstest(x, "norm").pvalue > 0.01


def test_product_states():
    zero = Mps.product([[1, 0]] * 4)
    assert mps_norm_squared(zero) == pytest.approx(1)
    assert mps_pauli_expectation(zero, PauliString.from_label("ZIII")) == pytest.approx(1)
    v = np.array([[1, 2j], [0.5, -1], [3, 1 + 1j]])
    m = Mps.product(v)
    assert mps_norm_squared(m) == pytest.approx(np.prod(np.sum(np.abs(v) ** 2, axis=1)))
    dense = reduce(np.kron, v)
    assert np.allclose(mps_to_statevector(m).amplitudes, dense / np.linalg.norm(dense))


def test_bell_mps():
    s = mps_to_statevector(bell_mps())
    assert np.allclose(s.amplitudes, np.array([1, 0, 0, 1]) / math.sqrt(2))
    assert mps_pauli_expectation(bell_mps(), PauliString.from_label("XX")) == pytest.approx(1)


@given(st.integers(1, 6), st.integers(1, 4), seeds)
def test_amplitudes_match_brute_force(n, chi, seed):
    m = sample_random_mps(n, chi, np.random.default_rng(seed))
    bf = brute_force_amplitudes(m)
    assert np.allclose(mps_amplitudes(m), bf, rtol=0, atol=1e-12 * max(1.0, np.abs(bf).max()))
    assert mps_norm_squared(m) == pytest.approx(np.vdot(bf, bf).real, rel=1e-10)


@given(st.integers(1, 6), st.integers(1, 4), seeds)
def test_transfer_expectations_match_dense(n, chi, seed):
    rng = np.random.default_rng(seed)
    m = sample_random_mps(n, chi, rng)
    s = mps_to_statevector(m)
    for _ in range(10):
        p = random_pauli(n, rng)
        assert mps_pauli_expectation(m, p) == pytest.approx(pauli_expectation(s, p), abs=1e-10)


def test_all_paulis_n5_chi3():
    m = sample_random_mps(5, 3, np.random.default_rng(7))
    s = mps_to_statevector(m)
    for p in list(all_pauli_strings(5))[::7]:
        assert mps_pauli_expectation(m, p) == pytest.approx(pauli_expectation(s, p), abs=1e-10)


@given(st.integers(2, 5), st.integers(1, 3), seeds)
def test_gauge_invariance(n, chi, seed):
    rng = np.random.default_rng(seed)
    m = sample_random_mps(n, chi, rng)
    t = m.tensors.copy()
    for i in range(n):
        g = rng.standard_normal((chi, chi)) + 1j * rng.standard_normal((chi, chi)) + 2 * np.eye(chi)
        t[i] = t[i] @ g
        t[(i + 1) % n] = np.linalg.inv(g) @ t[(i + 1) % n]
    m2 = Mps(n, chi, t)
    for _ in range(5):
        p = random_pauli(n, rng)
        assert mps_pauli_expectation(m2, p) == pytest.approx(mps_pauli_expectation(m, p), abs=1e-8)


@given(st.integers(2, 8), st.integers(1, 4), seeds)
def test_entanglement_bounded_by_bond(n, chi, seed):
    s = mps_to_statevector(sample_random_mps(n, chi, np.random.default_rng(seed)))
    ent = entanglement_entropy(s)
    assert ent <= 2 * math.log2(chi) + 1e-9
    if chi == 1:
        assert ent < 1e-10


def test_pauli_sums():
    zero = Mps.product([[1, 0]] * 3)
    ident = PauliSum([(1.0, PauliString.from_label("III"))])
    assert pauli_sum_expectation(zero, ident) == pytest.approx(1)
    o = PauliSum([(0.5, PauliString.from_label("ZII")), (0.5, PauliString.from_label("IZI"))])
    assert pauli_sum_expectation(zero, o) == pytest.approx(1)
    with pytest.raises(DimensionMismatchError):
        PauliSum([(1, PauliString.from_label("Z")), (1, PauliString.from_label("ZZ"))])
    with pytest.raises(ValidationError):
        PauliSum([(1, PauliString.from_label("iZ"))])


def test_random_pauli_sum_matches_dense():
    rng = np.random.default_rng(3)
    m = sample_random_mps(5, 2, rng)
    o = PauliSum([(rng.normal(), random_pauli(5, rng)) for _ in range(5)])
    v = mps_to_statevector(m).amplitudes
    assert pauli_sum_expectation(m, o) == pytest.approx(np.vdot(v, o.matrix() @ v).real, abs=1e-10)


@given(st.integers(1, 5), st.integers(1, 3), seeds)
def test_cmps_expectation_two_routes(n, chi, seed):
    rng = np.random.default_rng(seed)
    m = sample_random_mps(n, chi, rng)
    t = sample_random_clifford(n, rng)
    o = PauliSum([(rng.normal(), random_pauli(n, rng)) for _ in range(4)])
    v = apply_clifford_dense(mps_to_statevector(m), t).amplitudes
    assert cmps_expectation(m, t, o) == pytest.approx(np.vdot(v, o.matrix() @ v).real, abs=1e-10)


def test_degenerate_norm():
    z = Mps(3, 1, np.zeros((3, 2, 1, 1)))
    with pytest.raises(DegenerateStateError):
        mps_to_statevector(z)
    with pytest.raises(ValidationError):
        sample_random_mps(3, 0, np.random.default_rng(0))
