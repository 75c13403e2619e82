import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy import integrate

from expressbench.ensembles import EnsembleSpec, Family
from expressbench.errors import DegeneratePoolError, ValidationError
from expressbench.expressibility import (
    FidelityPool,
    build_fidelity_pool,
    frame_potential,
    frame_potentials,
    haar_fidelity_logpdf,
    haar_fidelity_pdf,
    haar_frame_potential,
    jackknife_error,
    kde_fit,
    kl_divergence_vs_haar,
)


def exact_haar_potential(d, t):
    return Fraction(math.factorial(t) * math.factorial(d - 1), math.factorial(d - 1 + t))


def test_haar_frame_potential_examples():
    assert haar_frame_potential(2, 1) == pytest.approx(0.5, rel=1e-15)
    assert haar_frame_potential(2, 2) == pytest.approx(1 / 3, rel=1e-15)
    assert haar_frame_potential(1024, 2) == pytest.approx(2 / (1024 * 1025), rel=1e-14)
    with pytest.raises(ValidationError):
        haar_frame_potential(1, 2)
    with pytest.raises(ValidationError):
        haar_frame_potential(4, 17)


@given(st.integers(2, 70000), st.integers(1, 16))
def test_haar_frame_potential_against_exact_rational(d, t):
    assert haar_frame_potential(d, t) == pytest.approx(float(exact_haar_potential(d, t)), rel=1e-12)


def test_haar_pdf():
    assert np.allclose(haar_fidelity_pdf(2, np.linspace(0, 1, 7)), 1)
    assert haar_fidelity_pdf(4, 0.0) == pytest.approx(3)
    assert haar_fidelity_logpdf(8, 1.0) == -np.inf
    for d in (2, 3, 16, 100, 1024):
        total, _ = integrate.quad(lambda f: haar_fidelity_pdf(d, f), 0, 1, points=[1 / d, 10 / d], limit=200)
        assert total == pytest.approx(1, abs=1e-9)


def test_frame_potential_basics():
    assert frame_potential(FidelityPool([1, 1, 1]), 3, d=4).raw_value == 1
    with pytest.raises(ValidationError):
        frame_potential(FidelityPool([]), 1, d=4)
    with pytest.raises(ValidationError):
        FidelityPool([0.5, 1.2])


@given(arrays(np.float64, st.integers(1, 500), elements=st.floats(0, 1)))
def test_moments_are_monotone(samples):
    est = frame_potentials(FidelityPool(samples), 8, d=8, block_count=10)
    raws = [e.raw_value for e in est]
    assert all(b <= a for a, b in zip(raws, raws[1:]))


@pytest.mark.parametrize("kind,kw", [("FQNN", {"layers": 1}), ("MPS", {"bond_dim": 1}), ("CMPS", {"bond_dim": 1})])
def test_welch_bound_holds(kind, kw):
    pool = build_fidelity_pool(EnsembleSpec(kind, 3, master_seed=2, **kw), 20_000)
    for e in frame_potentials(pool, 6):
        assert e.rescaled >= 1 - 3 * e.std_error
        assert not e.welch_violation


def test_haar_pool_rescaled_near_one():
    pool = build_fidelity_pool(EnsembleSpec(Family.HAAR, 3, master_seed=5), 100_000)
    for e in frame_potentials(pool, 6):
        assert abs(e.rescaled - 1) < 3 * e.std_error


def test_jackknife():
    assert jackknife_error(np.full(1000, 0.3), np.mean) == 0
    x = np.random.default_rng(1).normal(size=10_000)
    assert jackknife_error(x, np.mean) == pytest.approx(x.std(ddof=1) / 100, rel=0.1)
    with pytest.raises(ValidationError):
        jackknife_error(x, np.mean, block_count=5)
    with pytest.raises(ValidationError):
        jackknife_error(x[:50], np.mean)


def test_jackknife_on_haar_fidelities():
    d = 16
    pool = build_fidelity_pool(EnsembleSpec(Family.HAAR, 4, master_seed=6), 50_000)
    var = haar_frame_potential(d, 2) - haar_frame_potential(d, 1) ** 2
    assert jackknife_error(pool.samples, np.mean) == pytest.approx(math.sqrt(var / len(pool)), rel=0.15)


def test_kde_uniform_oracle():
    u = np.random.default_rng(2).random(100_000)
    m = kde_fit(u)
    x = np.linspace(0.1, 0.9, 401)
    assert np.abs(m.density(x) - 1).max() < 0.05
    assert m.integral() == pytest.approx(1, abs=1e-3)


def test_kde_errors():
    with pytest.raises(DegeneratePoolError):
        kde_fit(np.full(200, 0.25))
    with pytest.raises(ValidationError):
        kde_fit(np.random.default_rng(0).random(99))


def test_kde_reflection_preserves_mass_and_mean():
    pool = build_fidelity_pool(EnsembleSpec(Family.HAAR, 6, master_seed=7), 100_000)
    m = kde_fit(pool)
    assert m.integral() == pytest.approx(1, abs=1e-3)
    grid = (np.arange(m.grid_size) + 0.5) / m.grid_size
    kde_mean = float(np.sum(grid * m.density(grid)) / m.grid_size)
    assert kde_mean == pytest.approx(pool.samples.mean(), abs=1e-3)
    x = pool.samples[:300]
    assert np.allclose(m.density(x), m.density_exact(x), rtol=1e-3)


def test_kde_unreflected_leaks_mass():
    x = np.random.default_rng(3).exponential(0.01, 20_000).clip(0, 1)
    assert kde_fit(x, reflect=False).integral() < kde_fit(x).integral() - 0.05


def test_kl_haar_self_and_product_states():
    d = 64
    haar = build_fidelity_pool(EnsembleSpec(Family.HAAR, 6, master_seed=8), 50_000)
    kl = kl_divergence_vs_haar(kde_fit(haar), haar, d)
    assert kl.value < 1e-3
    assert kl.value >= -5 * kl.std_error
    prod = build_fidelity_pool(EnsembleSpec(Family.MPS, 6, bond_dim=1, master_seed=8), 50_000)
    kl_prod = kl_divergence_vs_haar(kde_fit(prod), prod, d)
    assert kl_prod.value > 10 * 1e-3
    assert kl_prod.value >= -5 * kl_prod.std_error


def test_kl_rejects_wrong_dimension():
    pool = build_fidelity_pool(EnsembleSpec(Family.HAAR, 3, master_seed=1), 1000)
    with pytest.raises(ValueError):
        kl_divergence_vs_haar(kde_fit(pool), pool, 16)


def test_pool_round_trip(tmp_path):
    pool = build_fidelity_pool(EnsembleSpec(Family.FQNN, 3, layers=2, master_seed=9), 2000)
    path = tmp_path / "p.pool"
    pool.save(path)
    assert path.read_text().splitlines()[0] == "# expressbench-pool v1"
    back = FidelityPool.load(path)
    assert np.array_equal(back.samples, pool.samples)
    assert back.ensemble == pool.ensemble and back.pair_count == 2000


def test_pool_independent_of_workers():
    spec = EnsembleSpec(Family.CMPS, 3, bond_dim=2, master_seed=10)
    a = build_fidelity_pool(spec, 3000, workers=1, chunk_size=100)
    b = build_fidelity_pool(spec, 3000, workers=3, chunk_size=100)
    assert np.array_equal(a.samples, b.samples)
