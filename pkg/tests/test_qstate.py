import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from expressbench.ensembles import EnsembleSpec, pair_fidelities
from expressbench.errors import CapacityError, DimensionMismatchError, ValidationError
from expressbench.qstate import (
    H,
    S,
    X,
    Y,
    Z,
    PauliString,
    StateVector,
    all_pauli_strings,
    apply_cnot,
    apply_single_qubit,
    basis_state,
    fidelity,
    inner_product,
    pauli_expectation,
    reduced_density_spectrum,
    ry,
    rz,
    sample_haar_state,
)

from conftest import random_state

PLUS = StateVector(1, np.array([1, 1]) / math.sqrt(2))
BELL = StateVector(2, np.array([1, 0, 0, 1]) / math.sqrt(2))


def test_basis_state():
    assert np.array_equal(basis_state(1).amplitudes, [1, 0])
    assert np.array_equal(basis_state(2).amplitudes, [1, 0, 0, 0])
    with pytest.raises(CapacityError):
        basis_state(17)
    with pytest.raises(CapacityError):
        basis_state(0)


def test_qubit_one_is_most_significant():
    s = apply_single_qubit(basis_state(3), 1, X)
    assert s.amplitudes[4] == 1


def test_single_qubit_gates():
    assert np.allclose(apply_single_qubit(basis_state(1), 1, X).amplitudes, [0, 1])
    assert np.allclose(apply_single_qubit(basis_state(1), 1, H).amplitudes, PLUS.amplitudes)
    out = apply_single_qubit(PLUS, 1, ry(math.pi / 2))
    assert fidelity(out, basis_state(1, 1)) == pytest.approx(1, abs=1e-12)


def test_single_qubit_errors():
    with pytest.raises(ValidationError):
        apply_single_qubit(basis_state(1), 1, np.array([[1, 1], [0, 1]]))
    with pytest.raises(IndexError):
        apply_single_qubit(basis_state(2), 3, X)
    with pytest.raises(IndexError):
        apply_single_qubit(basis_state(2), 0, X)


def test_rotations_match_exponentials():
    from scipy.linalg import expm

    for t in (0.3, 1.7, -2.2):
        assert np.allclose(ry(t), expm(-0.5j * t * Y))
        assert np.allclose(rz(t), expm(-0.5j * t * Z))


def test_cnot():
    assert np.allclose(apply_cnot(basis_state(2, 2), 1, 2).amplitudes, basis_state(2, 3).amplitudes)
    assert np.allclose(apply_cnot(basis_state(2), 1, 2).amplitudes, basis_state(2).amplitudes)
    s = StateVector(2, np.array([1, 0, 1, 0]) / math.sqrt(2))
    assert np.allclose(apply_cnot(s, 1, 2).amplitudes, BELL.amplitudes)
    with pytest.raises(IndexError):
        apply_cnot(basis_state(2), 1, 1)


def test_inner_product_and_fidelity():
    assert inner_product(basis_state(1), basis_state(1)) == 1
    assert inner_product(basis_state(1), basis_state(1, 1)) == 0
    assert inner_product(basis_state(1), PLUS) == pytest.approx(1 / math.sqrt(2))
    assert fidelity(basis_state(1), PLUS) == pytest.approx(0.5)
    assert fidelity(basis_state(2, 1), basis_state(2, 2)) == 0
    with pytest.raises(DimensionMismatchError):
        fidelity(basis_state(1), basis_state(2))


def test_pauli_expectations():
    assert pauli_expectation(basis_state(1), PauliString.from_label("Z")) == 1
    assert pauli_expectation(PLUS, PauliString.from_label("Z")) == pytest.approx(0)
    assert pauli_expectation(BELL, PauliString.from_label("XX")) == pytest.approx(1)
    assert pauli_expectation(BELL, PauliString.from_label("-YY")) == pytest.approx(1)
    with pytest.raises(ValidationError):
        pauli_expectation(BELL, PauliString.from_label("iXZ"))


def test_pauli_labels_and_products():
    y = PauliString.from_label("Y")
    assert np.allclose(y.matrix(), Y)
    assert PauliString.from_label("-YY").label == "-YY"
    x, z = PauliString.from_label("X"), PauliString.from_label("Z")
    assert np.allclose((x * z).matrix(), X @ Z)
    assert not x.commutes_with(z)
    assert PauliString.from_label("XX").commutes_with(PauliString.from_label("ZZ"))


@given(st.integers(1, 3), st.data())
def test_pauli_algebra_matches_matrices(n, data):
    labels = st.text(alphabet="IXYZ", min_size=n, max_size=n)
    a = PauliString.from_label(data.draw(labels))
    b = PauliString.from_label(data.draw(labels))
    prod = a * b
    assert np.allclose(prod.matrix(), a.matrix() @ b.matrix())
    comm = np.allclose(a.matrix() @ b.matrix(), b.matrix() @ a.matrix())
    assert comm == a.commutes_with(b)


@given(st.integers(1, 5), st.integers(0, 2**32 - 1), st.integers(1, 30))
def test_norm_preserved_by_gates(n, seed, steps):
    rng = np.random.default_rng(seed)
    s = StateVector(n, random_state(n, rng))
    for _ in range(steps):
        if n > 1 and rng.random() < 0.4:
            c, t = rng.choice(np.arange(1, n + 1), 2, replace=False)
            s = apply_cnot(s, int(c), int(t))
        else:
            g = ry(rng.uniform(0, 7)) @ rz(rng.uniform(0, 7)) @ ry(rng.uniform(0, 7))
            s = apply_single_qubit(s, int(rng.integers(1, n + 1)), g)
    assert abs(np.vdot(s.amplitudes, s.amplitudes).real - 1) < 1e-10


@given(st.integers(1, 5), st.integers(0, 2**32 - 1), st.floats(0, 6.28))
def test_fidelity_symmetry_and_phase(n, seed, phase):
    rng = np.random.default_rng(seed)
    a = StateVector(n, random_state(n, rng))
    b = StateVector(n, random_state(n, rng))
    assert fidelity(a, b) == fidelity(b, a)
    b2 = StateVector(n, b.amplitudes * np.exp(1j * phase))
    assert fidelity(a, b2) == pytest.approx(fidelity(a, b), abs=1e-14)


def test_reduced_spectrum_examples():
    assert np.allclose(reduced_density_spectrum(basis_state(2), 1), [1, 0])
    assert np.allclose(reduced_density_spectrum(BELL, 1), [0.5, 0.5])
    g = np.zeros(8)
    g[0] = g[7] = 1 / math.sqrt(2)
    assert np.allclose(reduced_density_spectrum(StateVector(3, g), 2), [0.5, 0.5, 0, 0])
    with pytest.raises(IndexError):
        reduced_density_spectrum(BELL, 2)


@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_reduced_spectrum_sums_to_one(n, seed):
    s = StateVector(n, random_state(n, np.random.default_rng(seed)))
    for cut in range(1, n):
        lam = reduced_density_spectrum(s, cut)
        assert abs(lam.sum() - 1) < 1e-10
        assert np.all(lam >= 0) and np.all(np.diff(lam) <= 0)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_parseval_exhaustive(n, rng):
    s = StateVector(n, random_state(n, rng))
    total = sum(pauli_expectation(s, p) ** 2 for p in all_pauli_strings(n))
    assert total == pytest.approx(1 << n, abs=1e-8)


def test_haar_draw_normalized(rng):
    for n in (1, 4, 9):
        s = sample_haar_state(n, rng)
        assert abs(np.vdot(s.amplitudes, s.amplitudes).real - 1) < 1e-12


@pytest.mark.parametrize("n", [1, 2, 3])
def test_haar_fidelities_follow_analytic_law(n):
    d = 1 << n
    f, _ = pair_fidelities(EnsembleSpec("HAAR", n, master_seed=3), range(100_000))
    p = stats.kstest(f, lambda x: 1 - (1 - x) ** (d - 1)).pvalue
    assert p > 0.01
    if n == 2:
        assert abs(f.mean() - 0.25) < 3 * f.std() / math.sqrt(len(f))
