from fractions import Fraction
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from symsq import analysis as A
from symsq.concepts import enumerate_class
from symsq.quantum import (
    Observable,
    class_mixture_density,
    example_state,
    sign_observable,
    tight_variance_observable,
)
from symsq.symmetry import (
    enumerate_orbits,
    make_action,
    make_partition_action,
    make_skewed_partition,
    orbit_stats,
)

KINDS = ["cyclic", "perm", "graphiso", "trivial"]


def orbits(kind, n):
    return enumerate_orbits(make_action(kind, n))


def brute_variance(p, O):
    values = [np.vdot(psi, O.matrix @ psi).real for psi in map(example_state, enumerate_class(p))]
    return float(np.var(values))


def test_sign_variance_cyclic_three():
    r = A.variance_of_observable(orbits("cyclic", 3), sign_observable(8))
    assert r.mode == "exact" and r.stderr == 0.0
    assert r.value == pytest.approx(0.3125, abs=1e-15)
    assert A.sign_variance_exact(orbits("cyclic", 3)) == Fraction(5, 16)


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_sign_variance_equals_orbit_norm(kind, n):
    p = orbits(kind, n)
    assert A.sign_variance_exact(p) == orbit_stats(p).p_norm_sq_exact


def test_identity_has_zero_variance():
    assert A.variance_of_observable(orbits("cyclic", 3), Observable(np.eye(16))).value == pytest.approx(0, abs=1e-15)


def test_tight_variance_skewed():
    p = enumerate_orbits(make_skewed_partition(16, 4))
    assert A.variance_of_observable(p, tight_variance_observable(p)).value == pytest.approx(0.25, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([("cyclic", 3), ("perm", 3), ("graphiso", 1)]))
def test_spin_expansion_matches_enumeration(seed, action):
    p = orbits(*action)
    rng = np.random.default_rng(seed)
    dim = 2 * p.domain_size
    G = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    H = G + G.conj().T
    O = Observable(H / np.abs(np.linalg.eigvalsh(H)).max())
    const, h, J = A.spin_expansion(p, O)
    assert (h ** 2).sum() + (J ** 2).sum() == pytest.approx(brute_variance(p, O), abs=1e-12)


def test_large_class_uses_spin_expansion():
    p = orbits("graphiso", 3)
    r = A.variance_of_observable(p, sign_observable(p.domain_size))
    assert r.method == "spin-expansion"
    assert r.value == pytest.approx(orbit_stats(p).p_norm_sq, abs=1e-15)


def test_montecarlo_needs_seed_and_is_reproducible():
    p = orbits("cyclic", 3)
    with pytest.raises(ValueError):
        A.variance_of_observable(p, sign_observable(8), "montecarlo")
    a = A.variance_of_observable(p, sign_observable(8), "montecarlo", seed=4, samples=1000)
    b = A.variance_of_observable(p, sign_observable(8), "montecarlo", seed=4, samples=1000)
    assert a == b and a.stderr > 0


def test_montecarlo_coverage():
    p = orbits("cyclic", 3)
    O = sign_observable(8)
    exact = 0.3125
    hits = 0
    for seed in range(100):
        r = A.variance_of_observable(p, O, "montecarlo", seed=seed, samples=4000)
        hits += abs(r.value - exact) <= 3 * r.stderr
    assert hits >= 95


@pytest.mark.parametrize("kind", ["cyclic", "perm", "graphiso"])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_orbit_correlation_is_an_indicator(kind, n):
    p = orbits(kind, n)
    C = A.orbit_correlation_matrix(p)
    same = p.orbit_of[:, None] == p.orbit_of[None, :]
    np.testing.assert_array_equal(C, same.astype(float))


@pytest.mark.parametrize("x,y,value", [(0b001, 0b100, 1.0), (0b001, 0b011, 0.0), (0b101, 0b101, 1.0)])
def test_orbit_correlation_examples(x, y, value):
    assert A.orbit_correlation(orbits("cyclic", 3), x, y) == value


def test_pairwise_cyclic_three():
    r = A.pairwise_independence(orbits("cyclic", 3))
    assert r.fraction == 0.6875 and r.fraction_exact == r.formula and r.census_uniform


def test_pairwise_trivial_group():
    r = A.pairwise_independence(orbits("trivial", 3))
    assert r.fraction_exact == 1 - Fraction(1, 8) and r.census_uniform


@pytest.mark.parametrize("kind", ["cyclic", "perm", "graphiso"])
@pytest.mark.parametrize("n", [2, 3])
def test_pairwise_matches_norm(kind, n):
    r = A.pairwise_independence(orbits(kind, n))
    assert abs(r.fraction - (1 - orbit_stats(orbits(kind, n)).p_norm_sq)) <= 1e-15
    assert r.census_uniform


def test_pairwise_sampled_needs_seed():
    p = orbits("cyclic", 4)
    with pytest.raises(ValueError):
        A.pairwise_independence(p, mode="sample")
    r = A.pairwise_independence(p, mode="sample", seed=1, pairs=50)
    assert r.pairs_checked == 50 and r.census_uniform


def test_pairwise_cap():
    with pytest.raises(ValueError):
        A.pairwise_independence(orbits("trivial", 13))


def test_bounds_cyclic_three():
    r = A.lower_bounds(0.05, orbit_stats(orbits("cyclic", 3)))
    assert r.sq_bound == pytest.approx(0.008)
    assert r.qsq_bound == pytest.approx(0.0025 * 8 / 3)
    assert r.regularity_ratio_exact == Fraction(5, 6) and r.classification == "regular"
    assert not r.tau_warning


def test_bounds_skewed():
    r = A.lower_bounds(0.05, orbit_stats(enumerate_orbits(make_skewed_partition(16, 4))))
    assert r.regularity_ratio_exact == Fraction(7, 16)
    big = A.lower_bounds(0.05, orbit_stats(enumerate_orbits(make_skewed_partition(1 << 12, 1 << 6))))
    assert big.classification == "skewed" and big.regularity_ratio < 2 ** -5


def test_bounds_warn_at_large_tau():
    with pytest.warns(UserWarning, match="0.096"):
        r = A.lower_bounds(0.2, orbit_stats(orbits("cyclic", 3)))
    assert r.tau_warning


@given(st.lists(st.integers(0, 9), min_size=1, max_size=60))
def test_bound_ordering(labels):
    blocks = {}
    for x, lab in enumerate(labels):
        blocks.setdefault(lab, []).append(x)
    s = orbit_stats(enumerate_orbits(make_partition_action(list(blocks.values()))))
    r = A.lower_bounds(0.05, s)
    assert r.regularity_ratio_exact <= 1
    assert r.sq_bound >= r.qsq_bound * (1 - 1e-12)


def test_tolerance_window_examples():
    w = A.tolerance_window(0.2)
    assert (w.low, w.high, w.valid) == (0.4, 0.6, True)
    w = A.tolerance_window(0.4)
    assert (w.low, w.high, w.valid) == (0.8, 0.8, False)
    w = A.tolerance_window(1e-6)
    assert w.valid and w.high == pytest.approx(math.sqrt(2e-6), rel=1e-3)
    with pytest.raises(ValueError):
        A.tolerance_window(1.0)


@given(st.fractions(min_value=Fraction(1, 1000), max_value=Fraction(999, 1000)))
def test_window_validity_threshold(z):
    assert A.tolerance_window(z).valid == (z < Fraction(2, 5))


def test_average_correlation_examples():
    e0, e1 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    sigma = np.eye(2) / 2
    assert A.average_correlation([e0, e1], sigma) == pytest.approx(1.0)
    assert A.average_correlation([e0], sigma) == pytest.approx(1.0)
    assert A.average_correlation([sigma], sigma) == pytest.approx(0.0, abs=1e-15)


def test_average_correlation_detects_leakage():
    sigma = np.diag([1.0, 0.0])
    with pytest.raises(ValueError, match="leaks"):
        A.average_correlation([np.diag([0.0, 1.0])], sigma)


def test_average_correlation_rank_deficient_mixture():
    p = orbits("cyclic", 2)
    sigma = class_mixture_density(p)
    family = [np.outer(example_state(f), example_state(f)) for f in enumerate_class(p)]
    assert np.isfinite(A.average_correlation(family, sigma))


def test_min_trace_distance_cyclic_three():
    r = A.min_trace_distance_check(orbits("cyclic", 3))
    assert r.exhaustive and r.holds and r.minimum >= 1 - math.sqrt(0.5)


def test_min_trace_distance_sampled_singletons():
    r = A.min_trace_distance_check(orbits("trivial", 4), samples=1000, seed=5)
    assert not r.exhaustive and r.members == 1000 and r.holds


def test_min_trace_distance_guard():
    with pytest.raises(ValueError):
        A.min_trace_distance_check(enumerate_orbits(make_partition_action([[0, 1, 2, 3]])))
