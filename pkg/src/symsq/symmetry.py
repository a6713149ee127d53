"""Permutation actions on the bitstring domain and the orbit structure they induce."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

MAX_BITS = 20


@dataclass(frozen=True)
class GroupAction:
    """A group given by generator index maps on ``range(domain_size)``.

    ``n`` is the bit width when the domain is ``{0,1}^n``; explicit partitions
    may live on domains whose size is not a power of two, in which case ``n``
    is None.
    """

    domain_size: int
    generators: tuple[np.ndarray, ...]
    kind: str
    n: int | None = None
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for g in self.generators:
            if g.shape != (self.domain_size,):
                raise ValueError("generator length does not match the domain")
            if not np.array_equal(np.sort(g), np.arange(self.domain_size)):
                raise ValueError("generator is not a bijection")
            g.setflags(write=False)

    def describe(self) -> dict:
        return {"kind": self.kind, "n": self.n, "domain_size": self.domain_size, **self.params}


def _check_width(n: int, limit: int = MAX_BITS) -> None:
    if not 1 <= n <= limit:
        raise ValueError(f"bit width must be in [1, {limit}], got {n}")


def rotate_left(x: np.ndarray | int, n: int):
    mask = (1 << n) - 1
    return ((x << 1) | (x >> (n - 1))) & mask


def make_cyclic_action(n: int) -> GroupAction:
    """Cyclic shifts of the n bit positions (generator: rotate left by one)."""
    _check_width(n)
    x = np.arange(1 << n, dtype=np.int64)
    return GroupAction(1 << n, (rotate_left(x, n),), "cyclic", n)


def _permute_positions(x: np.ndarray, perm: Sequence[int], width: int) -> np.ndarray:
    # bit at position p moves to position perm[p]
    out = np.zeros_like(x)
    for p, q in enumerate(perm):
        bit = (x >> (width - 1 - p)) & 1
        out |= bit << (width - 1 - q)
    return out


def _symmetric_group_generators(k: int) -> list[list[int]]:
    if k < 2:
        return []
    gens = [[1, 0] + list(range(2, k))]
    if k > 2:
        gens.append([(p + 1) % k for p in range(k)])
    return gens


def make_coordinate_permutation_action(n: int) -> GroupAction:
    """Full symmetric group on the n coordinates; orbits are Hamming-weight classes."""
    _check_width(n)
    x = np.arange(1 << n, dtype=np.int64)
    gens = tuple(_permute_positions(x, p, n) for p in _symmetric_group_generators(n))
    if not gens:
        gens = (x.copy(),)
    return GroupAction(1 << n, gens, "coordinate-permutation", n)


def vertex_permutation_map(perm: Sequence[int], n: int) -> np.ndarray:
    """Index map of A -> P A P^T on column-major vectorized adjacency matrices."""
    positions = [0] * (n * n)
    for i in range(n):
        for j in range(n):
            # entry (i, j) moves to (perm[i], perm[j])
            positions[j * n + i] = perm[j] * n + perm[i]
    x = np.arange(1 << (n * n), dtype=np.int64)
    return _permute_positions(x, positions, n * n)


def make_graph_iso_action(n: int) -> GroupAction:
    """Simultaneous row/column permutations of an n-vertex adjacency matrix."""
    if not 1 <= n <= 4:
        raise ValueError(f"vertex count must be in [1, 4], got {n}")
    gens = tuple(vertex_permutation_map(p, n) for p in _symmetric_group_generators(n))
    if not gens:
        gens = (np.arange(1 << (n * n), dtype=np.int64),)
    return GroupAction(1 << (n * n), gens, "graph-isomorphism", n * n, {"vertices": n})


def make_partition_action(blocks: Sequence[Sequence[int]], domain_size: int | None = None) -> GroupAction:
    """Action whose orbits are exactly ``blocks``: one full cycle per block."""
    blocks = [sorted(int(v) for v in b) for b in blocks]
    if any(len(b) == 0 for b in blocks):
        raise ValueError("empty block")
    flat = [v for b in blocks for v in b]
    size = domain_size if domain_size is not None else len(flat)
    if len(set(flat)) != len(flat):
        raise ValueError("blocks overlap")
    if sorted(flat) != list(range(size)):
        raise ValueError(f"blocks do not cover the domain [0, {size})")
    g = np.arange(size, dtype=np.int64)
    for b in blocks:
        g[b] = np.roll(b, -1)
    n = size.bit_length() - 1 if size & (size - 1) == 0 else None
    return GroupAction(size, (g,), "explicit-partition", n)


def make_skewed_partition(domain_size: int, star_size: int) -> GroupAction:
    """One orbit ``{0, ..., star_size-1}`` and singletons elsewhere."""
    if not 1 <= star_size <= domain_size:
        raise ValueError("star orbit size must be in [1, domain_size]")
    blocks = [list(range(star_size))] + [[v] for v in range(star_size, domain_size)]
    return make_partition_action(blocks, domain_size)


def make_trivial_action(n: int) -> GroupAction:
    _check_width(n)
    return GroupAction(1 << n, (np.arange(1 << n, dtype=np.int64),), "trivial", n)


def make_action(kind: str, n: int) -> GroupAction:
    builders = {
        "cyclic": make_cyclic_action,
        "perm": make_coordinate_permutation_action,
        "coordinate-permutation": make_coordinate_permutation_action,
        "graphiso": make_graph_iso_action,
        "graph-isomorphism": make_graph_iso_action,
        "trivial": make_trivial_action,
    }
    if kind not in builders:
        raise ValueError(f"unknown action kind {kind!r}")
    return builders[kind](n)


@dataclass(frozen=True)
class OrbitPartition:
    """Orbit blocks ordered by smallest member; ``orbit_of[x]`` is the block id of x."""

    orbit_of: np.ndarray
    blocks: tuple[np.ndarray, ...]
    action: GroupAction | None = None

    @property
    def domain_size(self) -> int:
        return int(self.orbit_of.size)

    @property
    def orbit_count(self) -> int:
        return len(self.blocks)

    @property
    def sizes(self) -> np.ndarray:
        return np.array([b.size for b in self.blocks], dtype=np.int64)

    def indicator(self) -> np.ndarray:
        """Dense (domain_size, orbit_count) 0/1 membership matrix."""
        Z = np.zeros((self.domain_size, self.orbit_count))
        Z[np.arange(self.domain_size), self.orbit_of] = 1.0
        return Z


def partition_from_labels(labels, action: GroupAction | None = None) -> OrbitPartition:
    labels = np.asarray(labels)
    # relabel so that block ids follow the smallest member
    _, first_index, inverse = np.unique(labels, return_index=True, return_inverse=True)
    rank = np.empty(first_index.size, dtype=np.int64)
    rank[np.argsort(first_index)] = np.arange(first_index.size)
    orbit_of = rank[inverse.reshape(-1)]
    order = np.argsort(orbit_of, kind="stable")
    bounds = np.cumsum(np.bincount(orbit_of))
    blocks = tuple(np.split(order, bounds[:-1]))
    orbit_of.setflags(write=False)
    for b in blocks:
        b.setflags(write=False)
    return OrbitPartition(orbit_of, blocks, action)


def enumerate_orbits(action: GroupAction) -> OrbitPartition:
    """Connected components of the graph x -- g(x) over all generators."""
    size = action.domain_size
    if size > 1 << MAX_BITS:
        raise ValueError("domain too large for orbit enumeration")
    src = np.concatenate([np.arange(size)] * len(action.generators))
    dst = np.concatenate(action.generators)
    graph = coo_matrix((np.ones(src.size, dtype=np.int8), (src, dst)), shape=(size, size))
    _, labels = connected_components(graph, directed=True, connection="weak")
    return partition_from_labels(labels, action)


@dataclass(frozen=True)
class OrbitStats:
    sizes: tuple[int, ...]
    domain_size: int
    p_norm_sq_exact: Fraction
    max_orbit: int
    orbit_count: int

    @property
    def p_norm_sq(self) -> float:
        return float(self.p_norm_sq_exact)

    @property
    def max_orbit_fraction(self) -> float:
        return self.max_orbit / self.domain_size

    def to_dict(self) -> dict:
        return {
            "orbit_sizes": list(self.sizes),
            "orbit_count": self.orbit_count,
            "domain_size": self.domain_size,
            "p_norm_sq": self.p_norm_sq,
            "p_norm_sq_fraction": str(self.p_norm_sq_exact),
            "max_orbit": self.max_orbit,
            "max_orbit_fraction": self.max_orbit_fraction,
        }


def orbit_stats(p: OrbitPartition) -> OrbitStats:
    sizes = tuple(int(s) for s in p.sizes)
    total = sum(sizes)
    sq = sum(s * s for s in sizes)
    return OrbitStats(
        sizes=sizes,
        domain_size=total,
        p_norm_sq_exact=Fraction(sq, total * total),
        max_orbit=max(sizes),
        orbit_count=len(sizes),
    )
