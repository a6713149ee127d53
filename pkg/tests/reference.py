"""Slow, definition-level oracles shared by the test modules."""

import itertools

import numpy as np


def bits_msb(value, width):
    return [(value >> (width - 1 - k)) & 1 for k in range(width)]


def truth_tables(size):
    for v in range(1 << size):
        yield np.array(bits_msb(v, size), dtype=np.uint8)


def walsh(table):
    size = len(table)
    return np.array([
        sum((-1) ** (bin(x & y).count("1") + int(table[x])) for x in range(size)) / size
        for y in range(size)
    ])


def rotations_orbits(n):
    seen, orbits = set(), []
    for x in range(1 << n):
        if x in seen:
            continue
        s = format(x, f"0{n}b")
        orb = {int(s[k:] + s[:k], 2) for k in range(n)}
        seen |= orb
        orbits.append(frozenset(orb))
    return orbits


def graph_iso_orbits(n):
    """Orbits of directed graphs under all n! vertex relabelings, by explicit matrices."""
    def encode(A):
        return int("".join(str(b) for b in A.flatten(order="F")), 2)

    seen, orbits = set(), []
    for x in range(1 << (n * n)):
        if x in seen:
            continue
        A = np.array(bits_msb(x, n * n)).reshape((n, n), order="F")
        orb = set()
        for perm in itertools.permutations(range(n)):
            P = np.eye(n, dtype=int)[list(perm)]
            orb.add(encode(P @ A @ P.T))
        seen |= orb
        orbits.append(frozenset(orb))
    return orbits


def weight_orbits(n):
    by_weight = {}
    for x in range(1 << n):
        by_weight.setdefault(bin(x).count("1"), set()).add(x)
    return [frozenset(v) for v in by_weight.values()]


def degree_parity(A):
    n = len(A)
    counts = [0] * (n + 1)
    for row in A:
        counts[sum(row)] += 1
    return [c % 2 for c in counts]


def example_density(table):
    size = len(table)
    psi = np.zeros(2 * size)
    for x, y in enumerate(table):
        psi[2 * x + int(y)] = 1 / np.sqrt(size)
    return np.outer(psi, psi)
