from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from symsq.symmetry import (
    enumerate_orbits,
    make_action,
    make_graph_iso_action,
    make_partition_action,
    make_skewed_partition,
    orbit_stats,
    partition_from_labels,
)

from reference import graph_iso_orbits, rotations_orbits, weight_orbits


def blocks_of(p):
    return {frozenset(map(int, b)) for b in p.blocks}


@pytest.mark.parametrize("n", range(1, 7))
def test_cyclic_orbits_match_rotation_closure(n):
    assert blocks_of(enumerate_orbits(make_action("cyclic", n))) == set(rotations_orbits(n))


@pytest.mark.parametrize("n", range(1, 6))
def test_permutation_orbits_are_weight_classes(n):
    p = enumerate_orbits(make_action("perm", n))
    assert blocks_of(p) == set(weight_orbits(n))
    assert p.orbit_count == n + 1


@pytest.mark.parametrize("n", [1, 2, 3])
def test_graph_iso_orbits_match_explicit_relabeling(n):
    assert blocks_of(enumerate_orbits(make_graph_iso_action(n))) == set(graph_iso_orbits(n))


@pytest.mark.parametrize("kind,n,count,norm", [
    ("cyclic", 3, 4, Fraction(5, 16)),
    ("cyclic", 4, 6, Fraction(54, 256)),
    ("graphiso", 2, 10, Fraction(7, 64)),
    ("graphiso", 3, 104, None),
    ("trivial", 3, 8, Fraction(1, 8)),
])
def test_orbit_stats_examples(kind, n, count, norm):
    s = orbit_stats(enumerate_orbits(make_action(kind, n)))
    assert s.orbit_count == count
    if norm is not None:
        assert s.p_norm_sq_exact == norm


def test_cyclic_three_sizes():
    assert sorted(orbit_stats(enumerate_orbits(make_action("cyclic", 3))).sizes) == [1, 1, 3, 3]


def test_skewed_partition():
    s = orbit_stats(enumerate_orbits(make_skewed_partition(16, 4)))
    assert s.max_orbit == 4 and s.orbit_count == 13
    assert s.p_norm_sq_exact == Fraction(16 + 12, 256)


def test_partition_action_rejects_bad_blocks():
    with pytest.raises(ValueError, match="overlap"):
        make_partition_action([[0, 1], [1, 2]])
    with pytest.raises(ValueError, match="cover"):
        make_partition_action([[0, 2]])


def test_unknown_kind():
    with pytest.raises(ValueError):
        make_action("dihedral", 3)


@settings(max_examples=50)
@given(st.lists(st.integers(0, 5), min_size=1, max_size=30))
def test_partition_roundtrip(labels):
    p = partition_from_labels(labels)
    groups = {}
    for x, lab in enumerate(labels):
        groups.setdefault(lab, set()).add(x)
    assert blocks_of(p) == {frozenset(g) for g in groups.values()}
    # block ids follow the smallest member
    assert [int(b.min()) for b in p.blocks] == sorted(int(b.min()) for b in p.blocks)
    action = make_partition_action([list(map(int, b)) for b in p.blocks])
    assert blocks_of(enumerate_orbits(action)) == blocks_of(p)


@settings(max_examples=50)
@given(st.lists(st.integers(0, 7), min_size=1, max_size=40))
def test_norm_inequality_and_bounds(labels):
    s = orbit_stats(partition_from_labels(labels))
    assert Fraction(1, s.domain_size) <= s.p_norm_sq_exact <= Fraction(s.max_orbit, s.domain_size)
    assert sum(s.sizes) == s.domain_size


def test_orbits_are_invariant_under_generators():
    action = make_action("graphiso", 3)
    p = enumerate_orbits(action)
    for g in action.generators:
        np.testing.assert_array_equal(p.orbit_of[g], p.orbit_of)
