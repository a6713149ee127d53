"""Concept classes: orbit-constant functions, degree-parity graph functions, disjoint supports.

Every concept exposes ``domain_size`` and ``truth_table()``; the quantum and
oracle layers only ever consume the truth table.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Protocol, Sequence

import numpy as np

from .bitdomain import BitString, all_degree_parities
from .symmetry import GroupAction, OrbitPartition, enumerate_orbits

MAX_ENUMERATED_ORBITS = 20


class Concept(Protocol):
    domain_size: int

    def truth_table(self) -> np.ndarray: ...


def as_truth_table(f) -> np.ndarray:
    if hasattr(f, "truth_table"):
        table = f.truth_table()
    else:
        table = np.asarray(f)
    if table.ndim != 1 or not np.isin(table, (0, 1)).all():
        raise ValueError("a truth table must be a 1-D array of 0/1 labels")
    return table.astype(np.uint8)


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.uint8)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ZeroConcept:
    """The constant-0 function, kept distinct from every class member."""

    domain_size: int

    def truth_table(self) -> np.ndarray:
        return np.zeros(self.domain_size, dtype=np.uint8)

    def label(self) -> str:
        return "zero"


@dataclass(frozen=True)
class TableConcept:
    table: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "table", _freeze(as_truth_table(self.table)))

    @property
    def domain_size(self) -> int:
        return int(self.table.size)

    def truth_table(self) -> np.ndarray:
        return self.table


@dataclass(frozen=True)
class SymmetricFunction:
    partition: OrbitPartition
    orbit_bits: np.ndarray

    def __post_init__(self):
        bits = _freeze(self.orbit_bits)
        if bits.shape != (self.partition.orbit_count,):
            raise ValueError("need exactly one bit per orbit")
        object.__setattr__(self, "orbit_bits", bits)

    @property
    def domain_size(self) -> int:
        return self.partition.domain_size

    def truth_table(self) -> np.ndarray:
        return self.orbit_bits[self.partition.orbit_of]

    def label(self) -> str:
        return "".join(map(str, self.orbit_bits))


@dataclass(frozen=True)
class ParityConcept:
    """g_S(A) = S_hat . c_hat(A) mod 2 over n-vertex directed graphs."""

    n: int
    s_hat: tuple[int, ...]

    def __post_init__(self):
        s = tuple(int(b) for b in self.s_hat)
        if len(s) != self.n + 1 or any(b not in (0, 1) for b in s):
            raise ValueError(f"s_hat must be a 0/1 vector of length {self.n + 1}")
        object.__setattr__(self, "s_hat", s)

    @property
    def domain_size(self) -> int:
        return 1 << (self.n * self.n)

    def truth_table(self) -> np.ndarray:
        c_hat = all_degree_parities(self.n).astype(np.int64)
        return ((c_hat @ np.array(self.s_hat)) % 2).astype(np.uint8)

    def label(self) -> str:
        return "".join(map(str, self.s_hat))


@dataclass(frozen=True)
class LinearParity:
    """x -> s_hat . x mod 2 on uniform m-bit inputs (bit 1 is the most significant)."""

    s_hat: tuple[int, ...]

    def __post_init__(self):
        s = tuple(int(b) for b in self.s_hat)
        if not s or any(b not in (0, 1) for b in s):
            raise ValueError("s_hat must be a nonempty 0/1 vector")
        object.__setattr__(self, "s_hat", s)

    @property
    def m(self) -> int:
        return len(self.s_hat)

    @property
    def domain_size(self) -> int:
        return 1 << self.m

    def truth_table(self) -> np.ndarray:
        mask = BitString.from_bits(self.s_hat).value
        x = np.arange(self.domain_size, dtype=np.int64) & mask
        parity = np.zeros_like(x)
        while x.any():
            parity ^= x & 1
            x >>= 1
        return parity.astype(np.uint8)

    def label(self) -> str:
        return "".join(map(str, self.s_hat))


@dataclass(frozen=True)
class DisjointSupportClass:
    domain_size: int
    supports: tuple[tuple[int, ...], ...]
    zeta: Fraction

    def __len__(self):
        return len(self.supports)

    def member(self, index: int) -> "DisjointMember":
        if not 0 <= index < len(self.supports):
            raise IndexError(f"class has {len(self.supports)} members")
        return DisjointMember(self, index)

    def members(self) -> list["DisjointMember"]:
        return [self.member(t) for t in range(len(self))]

    def zero(self) -> ZeroConcept:
        return ZeroConcept(self.domain_size)


@dataclass(frozen=True)
class DisjointMember:
    cls: DisjointSupportClass
    index: int

    @property
    def domain_size(self) -> int:
        return self.cls.domain_size

    def truth_table(self) -> np.ndarray:
        table = np.zeros(self.domain_size, dtype=np.uint8)
        table[list(self.cls.supports[self.index])] = 1
        return table

    def label(self) -> str:
        return f"member-{self.index}"


def make_disjoint_class(domain_size: int, m: int, zeta) -> DisjointSupportClass:
    """m functions supported on consecutive blocks of size zeta * domain_size."""
    z = Fraction(zeta).limit_denominator(10**9) if isinstance(zeta, float) else Fraction(zeta)
    if not 0 < z < 1:
        raise ValueError(f"zeta must lie in (0, 1), got {zeta}")
    size = z * domain_size
    if size.denominator != 1:
        raise ValueError(f"support size zeta*|X| = {float(size)} is not an integer")
    if m < 1:
        raise ValueError("class needs at least one member")
    if m * z > 1:
        raise ValueError(f"m*zeta = {float(m * z)} > 1: supports would overlap")
    k = int(size)
    supports = tuple(tuple(range(t * k, (t + 1) * k)) for t in range(m))
    return DisjointSupportClass(domain_size, supports, z)


def _partition_of(action_or_partition) -> OrbitPartition:
    if isinstance(action_or_partition, OrbitPartition):
        return action_or_partition
    if isinstance(action_or_partition, GroupAction):
        return enumerate_orbits(action_or_partition)
    raise TypeError("expected a GroupAction or OrbitPartition")


def sample_uniform_symmetric(action, seed) -> SymmetricFunction:
    p = _partition_of(action)
    rng = np.random.default_rng(seed)
    return SymmetricFunction(p, rng.integers(0, 2, size=p.orbit_count))


def sample_orbit_bits(p: OrbitPartition, count: int, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, 2, size=(count, p.orbit_count), dtype=np.uint8)


def all_orbit_bits(orbit_count: int) -> np.ndarray:
    """Every assignment of one bit per orbit, row r spelling r in binary (big-endian)."""
    if orbit_count > MAX_ENUMERATED_ORBITS:
        raise ValueError(
            f"class has 2^{orbit_count} members; enumeration capped at 2^{MAX_ENUMERATED_ORBITS}"
        )
    r = np.arange(1 << orbit_count, dtype=np.int64)
    shifts = orbit_count - 1 - np.arange(orbit_count)
    return ((r[:, None] >> shifts[None, :]) & 1).astype(np.uint8)


def class_truth_tables(p: OrbitPartition, orbit_bits: np.ndarray) -> np.ndarray:
    """Rows of orbit bits -> rows of truth tables over the domain."""
    return orbit_bits[:, p.orbit_of]


def enumerate_class(action) -> list[SymmetricFunction]:
    p = _partition_of(action)
    return [SymmetricFunction(p, bits) for bits in all_orbit_bits(p.orbit_count)]


def iter_parity_class(n: int) -> Iterator[ParityConcept]:
    for v in range(1 << (n + 1)):
        yield ParityConcept(n, BitString(n + 1, v).bits())


def evaluate(f, x) -> int:
    """Label of x under f; x may be an int index or a BitString of matching width."""
    size = f.domain_size
    if isinstance(x, BitString):
        if (1 << x.width) != size:
            raise ValueError(f"input width {x.width} does not match domain of size {size}")
        x = x.value
    x = int(x)
    if not 0 <= x < size:
        raise ValueError(f"input {x} outside domain of size {size}")
    if isinstance(f, SymmetricFunction):
        return int(f.orbit_bits[f.partition.orbit_of[x]])
    if isinstance(f, ParityConcept):
        c_hat = all_degree_parities(f.n)[x]
        return int(np.dot(c_hat, f.s_hat) % 2)
    return int(as_truth_table(f)[x])


def parity_targets(width: int) -> Sequence[tuple[int, ...]]:
    return [BitString(width, v).bits() for v in range(1 << width)]
