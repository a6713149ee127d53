from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from symsq.bitdomain import BitString, devectorize
from symsq.concepts import (
    LinearParity,
    ParityConcept,
    SymmetricFunction,
    TableConcept,
    all_orbit_bits,
    class_truth_tables,
    enumerate_class,
    evaluate,
    iter_parity_class,
    make_disjoint_class,
    sample_uniform_symmetric,
)
from symsq.symmetry import enumerate_orbits, make_action

from reference import degree_parity


def test_symmetric_functions_are_orbit_constant():
    action = make_action("cyclic", 4)
    p = enumerate_orbits(action)
    for f in enumerate_class(p):
        table = f.truth_table()
        np.testing.assert_array_equal(table[action.generators[0]], table)
    assert len(enumerate_class(p)) == 1 << p.orbit_count


def test_sampling_is_seeded():
    p = enumerate_orbits(make_action("cyclic", 5))
    a = sample_uniform_symmetric(p, 3)
    b = sample_uniform_symmetric(p, 3)
    np.testing.assert_array_equal(a.orbit_bits, b.orbit_bits)


def test_orbit_bits_need_one_per_orbit():
    p = enumerate_orbits(make_action("cyclic", 3))
    with pytest.raises(ValueError):
        SymmetricFunction(p, np.zeros(3))


def test_all_orbit_bits_is_big_endian_counting():
    np.testing.assert_array_equal(all_orbit_bits(2), [[0, 0], [0, 1], [1, 0], [1, 1]])
    with pytest.raises(ValueError):
        all_orbit_bits(21)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_parity_concepts_match_degree_loop(n):
    for g in iter_parity_class(n):
        table = g.truth_table()
        for x in range(0, 1 << (n * n), max(1, (1 << (n * n)) // 32)):
            c = degree_parity(devectorize(x, n).tolist())
            assert table[x] == sum(s * b for s, b in zip(g.s_hat, c)) % 2
            assert evaluate(g, x) == table[x]


def test_parity_class_size():
    assert len(list(iter_parity_class(2))) == 8
    with pytest.raises(ValueError):
        ParityConcept(2, (1, 0))


@given(st.lists(st.integers(0, 1), min_size=1, max_size=8), st.data())
def test_linear_parity(s_hat, data):
    f = LinearParity(s_hat)
    x = data.draw(st.integers(0, f.domain_size - 1))
    bits = BitString(f.m, x).bits()
    assert evaluate(f, x) == sum(a * b for a, b in zip(s_hat, bits)) % 2
    assert evaluate(f, BitString(f.m, x)) == evaluate(f, x)


def test_evaluate_rejects_out_of_range():
    f = TableConcept(np.array([0, 1, 1, 0]))
    with pytest.raises(ValueError):
        evaluate(f, 4)
    with pytest.raises(ValueError):
        evaluate(f, BitString(3, 1))


def test_disjoint_class_layout():
    cls = make_disjoint_class(20, 4, 0.2)
    assert cls.zeta == Fraction(1, 5)
    tables = np.array([f.truth_table() for f in cls.members()])
    assert (tables.sum(axis=1) == 4).all()
    assert tables.sum(axis=0).max() == 1
    assert not cls.zero().truth_table().any()


@pytest.mark.parametrize("size,m,zeta", [(20, 8, 0.2), (21, 2, 0.2), (20, 2, 1.2), (20, 0, 0.2)])
def test_disjoint_class_rejects(size, m, zeta):
    with pytest.raises(ValueError):
        make_disjoint_class(size, m, zeta)


def test_class_truth_tables_shape():
    p = enumerate_orbits(make_action("perm", 3))
    tables = class_truth_tables(p, all_orbit_bits(p.orbit_count))
    assert tables.shape == (16, 8)
    assert len({t.tobytes() for t in tables}) == 16
