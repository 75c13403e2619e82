import itertools
from collections import Counter

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from expressbench.clifford import (
    CliffordTableau,
    GateList,
    apply_clifford_dense,
    compose,
    conjugate_pauli,
    group_order,
    invert_tableau,
    sample_random_clifford,
    sample_stabilizer_state,
    tableau_from_gates,
    tableau_to_gates,
)
from expressbench.qstate import PauliString, StateVector, all_pauli_strings, basis_state, pauli_expectation
from expressbench.resources import stabilizer_renyi_entropy

from conftest import random_state

seeds = st.integers(0, 2**32 - 1)


def gate_tableau(n, *ops):
    return tableau_from_gates(GateList.from_ops(n, ops))


def P(label):
    return PauliString.from_label(label)


def test_group_order():
    assert group_order(1) == 24
    assert group_order(2) == 11520


def test_conjugation_rules():
    assert conjugate_pauli(gate_tableau(1, ("H", 1)), P("Z")) == P("X")
    assert conjugate_pauli(gate_tableau(1, ("S", 1)), P("X")) == P("Y")
    assert conjugate_pauli(gate_tableau(2, ("CNOT", 1, 2)), P("XI")) == P("XX")
    assert conjugate_pauli(gate_tableau(2, ("CNOT", 1, 2)), P("IZ")) == P("ZZ")


def test_inverse_examples():
    assert invert_tableau(CliffordTableau.identity(3)) == CliffordTableau.identity(3)
    h = gate_tableau(1, ("H", 1))
    assert invert_tableau(h) == h


def test_uniform_on_one_qubit():
    rng = np.random.default_rng(1)
    counts = Counter(sample_random_clifford(1, rng).key() for _ in range(100_000))
    assert len(counts) == 24
    assert stats.chisquare(list(counts.values())).pvalue > 0.01


def test_reaches_whole_two_qubit_group():
    rng = np.random.default_rng(2)
    seen = {sample_random_clifford(2, rng).key() for _ in range(200_000)}
    assert len(seen) == group_order(2)


@given(st.integers(1, 6), seeds)
def test_samples_are_symplectic(n, seed):
    assert sample_random_clifford(n, np.random.default_rng(seed)).is_symplectic()


@given(st.integers(1, 4), seeds)
def test_group_laws(n, seed):
    rng = np.random.default_rng(seed)
    a, b, c = (sample_random_clifford(n, rng) for _ in range(3))
    assert compose(compose(a, b), c) == compose(a, compose(b, c))
    ident = CliffordTableau.identity(n)
    assert compose(a, invert_tableau(a)) == ident
    assert compose(invert_tableau(a), a) == ident
    assert compose(a, b).is_symplectic() and invert_tableau(a).is_symplectic()


@given(st.integers(1, 3), seeds)
def test_conjugation_round_trip_exhaustive(n, seed):
    t = sample_random_clifford(n, np.random.default_rng(seed))
    inv = invert_tableau(t)
    for p in all_pauli_strings(n):
        assert conjugate_pauli(inv, conjugate_pauli(t, p)) == p


@pytest.mark.parametrize("n", [1, 2, 3])
def test_conjugation_preserves_commutation(n):
    t = sample_random_clifford(n, np.random.default_rng(n))
    paulis = list(all_pauli_strings(n))
    images = [conjugate_pauli(t, p) for p in paulis]
    assert all(q.is_hermitian() for q in images)
    for (p, pi), (q, qi) in itertools.combinations(zip(paulis, images), 2):
        assert p.commutes_with(q) == pi.commutes_with(qi)


def test_synthesis_examples():
    assert len(tableau_to_gates(CliffordTableau.identity(4))) == 0
    cx = gate_tableau(2, ("CNOT", 1, 2))
    gates = tableau_to_gates(cx)
    for b in range(4):
        out = apply_clifford_dense(basis_state(2, b), cx)
        target = b ^ 1 if b & 2 else b
        assert abs(abs(out.amplitudes[target]) - 1) < 1e-12
    assert tableau_from_gates(gates) == cx


@given(st.integers(1, 8), seeds)
def test_synthesis_round_trip(n, seed):
    t = sample_random_clifford(n, np.random.default_rng(seed))
    gates = tableau_to_gates(t)
    assert tableau_from_gates(gates) == t
    assert len(gates) <= GateList.length_bound(n)
    assert all(1 <= g[1] <= n for g in gates)


@given(st.integers(1, 4), seeds)
def test_dense_action_matches_conjugation(n, seed):
    rng = np.random.default_rng(seed)
    t = sample_random_clifford(n, rng)
    psi = StateVector(n, random_state(n, rng))
    out = apply_clifford_dense(psi, t)
    inv = invert_tableau(t)
    for p in all_pauli_strings(n):
        # <U psi| P |U psi> = <psi| U^dag P U |psi>
        assert pauli_expectation(out, p) == pytest.approx(pauli_expectation(psi, conjugate_pauli(inv, p)), abs=1e-10)


def test_identity_action(rng):
    psi = StateVector(3, random_state(3, rng))
    assert np.allclose(apply_clifford_dense(psi, CliffordTableau.identity(3)).amplitudes, psi.amplitudes)


def test_one_qubit_stabilizer_support():
    rng = np.random.default_rng(5)
    found = []
    for _ in range(2000):
        v = sample_stabilizer_state(1, rng).amplitudes
        v = v * np.exp(-1j * np.angle(v[np.argmax(np.abs(v))]))
        if not any(np.allclose(v, w) for w in found):
            found.append(v)
    assert len(found) == 6


@given(st.integers(1, 6), seeds)
def test_stabilizer_states_have_no_magic(n, seed):
    s = sample_stabilizer_state(n, np.random.default_rng(seed))
    assert abs(stabilizer_renyi_entropy(s)) < 1e-9


@given(st.integers(1, 5), seeds)
def test_text_dump_round_trip(n, seed):
    t = sample_random_clifford(n, np.random.default_rng(seed))
    text = t.to_text()
    assert text.splitlines()[0] == f"clifford-tableau n={n}"
    assert CliffordTableau.from_text(text) == t


def test_gate_list_validation():
    with pytest.raises(IndexError):
        GateList.from_ops(2, [("CNOT", 1, 1)])
    with pytest.raises(IndexError):
        GateList.from_ops(2, [("H", 3)])
    assert list(GateList.from_ops(2, [("H", 1), ("CNOT", 2, 1)])) == [("H", 1), ("CNOT", 2, 1)]
