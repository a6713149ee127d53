import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from symsq import quantum as Q
from symsq.concepts import ParityConcept, iter_parity_class, enumerate_class
from symsq.symmetry import enumerate_orbits, make_action, make_skewed_partition

from reference import example_density, truth_tables, walsh


def random_density(rng, dim):
    rank = int(rng.integers(1, dim + 1))
    G = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


def random_contraction(rng, dim):
    G = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    H = G + G.conj().T
    return H / np.abs(np.linalg.eigvalsh(H)).max() * rng.uniform(0.1, 1.0)


def test_observable_validation():
    with pytest.raises(ValueError, match="Hermitian"):
        Q.Observable(np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValueError, match="norm"):
        Q.Observable(2 * np.eye(2))
    O = Q.Observable(np.diag([1.0, -1.0]))
    assert O.is_diagonal() and O.norm == 1.0


def test_expectation_clamps_and_checks_dimension():
    O = Q.Observable(np.eye(2))
    assert Q.expectation(O, np.array([1.0, 0.0])) == 1.0
    with pytest.raises(ValueError):
        Q.expectation(O, np.ones(4) / 2)


@given(st.lists(st.integers(0, 1), min_size=1, max_size=64))
def test_example_state_is_normalized(table):
    psi = Q.example_state(np.array(table))
    assert np.isclose(np.vdot(psi, psi).real, 1.0)
    assert np.count_nonzero(psi) == len(table)


def test_example_state_index_convention():
    psi = Q.example_state(np.array([1, 0]))
    np.testing.assert_allclose(psi, np.array([0, 1, 1, 0]) / np.sqrt(2))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_phase_kickback_exhaustive(n):
    for table in truth_tables(1 << n):
        phi, u, residual = Q.phase_kickback_decompose(table)
        assert residual <= 1e-12
        assert np.isclose(phi @ phi, 1.0) and np.isclose(u @ u, 1.0)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_fourier_mass_is_half_the_spectral_mass(m):
    rng = np.random.default_rng(m)
    size = 1 << m
    for table in truth_tables(size):
        spec = walsh(table)
        psi = Q.example_state(table)
        for _ in range(4):
            T = [s for s in range(size) if rng.random() < 0.5]
            O = Q.fourier_mass_observable(T, m)
            assert O.claimed_scale == 2.0
            assert abs(Q.expectation(O, psi) - 0.5 * sum(spec[s] ** 2 for s in T)) <= 1e-12


def test_fourier_mass_single_bit():
    assert np.isclose(Q.expectation(Q.fourier_mass_observable([1], 1), Q.example_state([0, 1])), 0.5)
    assert np.isclose(Q.expectation(Q.fourier_mass_observable([0], 1), Q.example_state([0, 1])), 0.0)


def test_influence_characters_msb_first():
    assert Q.influence_characters(1, 3) == [4, 5, 6, 7]
    assert Q.influence_characters(3, 3) == [1, 3, 5, 7]
    with pytest.raises(ValueError):
        Q.influence_characters(0, 3)


@pytest.mark.parametrize("n", [1, 2])
def test_composed_observable_matches_extended_register(n):
    for g in iter_parity_class(n):
        psi = Q.example_state(g)
        for i in range(1, n + 2):
            O = Q.influence_observable_composed(i, n)
            assert abs(Q.expectation(O, psi) - Q.composed_expectation_from_prep(i, g)) <= 1e-12


def test_composed_zero_target_is_zero():
    psi = Q.example_state(ParityConcept(2, (0, 0, 0)))
    for i in range(1, 4):
        assert abs(Q.expectation(Q.influence_observable_composed(i, 2), psi)) <= 1e-12


def test_composed_dimension_cap():
    with pytest.raises(ValueError):
        Q.influence_observable_composed(1, 4)


def test_helstrom_random_pairs_and_contractions():
    rng = np.random.default_rng(11)
    for _ in range(100):
        dim = int(rng.integers(2, 17))
        rho, sigma = random_density(rng, dim), random_density(rng, dim)
        O = Q.helstrom_observable(rho, sigma)
        gap = Q.expectation(O, rho) - Q.expectation(O, sigma)
        norm = Q.trace_norm(rho - sigma)
        assert abs(gap - norm) <= 1e-9
        for _ in range(10):
            C = random_contraction(rng, dim)
            assert np.trace(C @ (rho - sigma)).real <= gap + 1e-9


def test_helstrom_pure_disjoint_pair():
    psi = Q.example_state(np.array([1] * 4 + [0] * 16))
    psi0 = Q.example_state(np.zeros(20, dtype=np.uint8))
    O = Q.helstrom_observable(psi, psi0)
    assert abs(Q.trace_distance(psi, psi0) - 0.6) <= 1e-12
    assert abs(Q.expectation(O, psi) - Q.expectation(O, psi0) - 1.2) <= 1e-12


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1))
def test_pure_trace_distance_fast_path(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=6) + 1j * rng.normal(size=6)
    b = rng.normal(size=6) + 1j * rng.normal(size=6)
    a, b = a / np.linalg.norm(a), b / np.linalg.norm(b)
    general = 0.5 * Q.trace_norm(np.outer(a, a.conj()) - np.outer(b, b.conj()))
    assert abs(Q.trace_distance(a, b) - general) <= 1e-10


@pytest.mark.parametrize("kind,n", [("cyclic", 3), ("perm", 3), ("graphiso", 2)])
def test_class_mixture_closed_form(kind, n):
    p = enumerate_orbits(make_action(kind, n))
    direct = np.mean([example_density(f.truth_table()) for f in enumerate_class(p)], axis=0)
    np.testing.assert_allclose(Q.class_mixture_density(p), direct, atol=1e-14)


def test_tight_observable_reads_the_star_orbit():
    p = enumerate_orbits(make_skewed_partition(16, 4))
    O = Q.tight_variance_observable(p)
    assert O.norm <= 1 + 1e-12
    values = [Q.expectation(O, Q.example_state(f)) for f in enumerate_class(p)]
    assert np.isclose(np.var(values), 0.25, atol=1e-12)
    assert set(np.round(values, 12)) == {-0.5, 0.5}


def test_sign_observable():
    O = Q.sign_observable(4)
    assert Q.expectation(O, Q.example_state([0, 0, 1, 0])) == pytest.approx(0.5)


def test_max_dim_override(monkeypatch):
    monkeypatch.setenv("SYMSQ_MAX_DIM", "16")
    with pytest.raises(ValueError, match="cap"):
        Q.example_state(np.zeros(16, dtype=np.uint8))
    monkeypatch.setenv("SYMSQ_MAX_DIM", "24")
    with pytest.raises(ValueError, match="power of two"):
        Q.max_dim()
