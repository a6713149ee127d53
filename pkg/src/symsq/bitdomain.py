"""Bitstring primitives: adjacency encodings, degree counts, Walsh-Hadamard analysis.

Bit order is big-endian throughout the package: position 0 of a bit list is the
most significant bit of the integer value.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_WIDTH = 20


@dataclass(frozen=True)
class BitString:
    width: int
    value: int

    def __post_init__(self):
        if not 1 <= self.width <= MAX_WIDTH:
            raise ValueError(f"width must be in [1, {MAX_WIDTH}], got {self.width}")
        if not 0 <= self.value < (1 << self.width):
            raise ValueError(f"value {self.value} does not fit in {self.width} bits")

    def bits(self) -> tuple[int, ...]:
        return tuple((self.value >> (self.width - 1 - k)) & 1 for k in range(self.width))

    @classmethod
    def from_bits(cls, bits) -> "BitString":
        bits = [int(b) for b in bits]
        if any(b not in (0, 1) for b in bits):
            raise ValueError("bits must be 0 or 1")
        value = 0
        for b in bits:
            value = (value << 1) | b
        return cls(len(bits), value)

    def __str__(self):
        return "".join(map(str, self.bits()))


def int_to_bits(value: int, width: int) -> np.ndarray:
    return np.array([(value >> (width - 1 - k)) & 1 for k in range(width)], dtype=np.uint8)


def bits_to_int(bits) -> int:
    value = 0
    for b in bits:
        value = (value << 1) | int(b)
    return value


def _check_adjacency(A) -> np.ndarray:
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"adjacency matrix must be square, got shape {A.shape}")
    if not 1 <= A.shape[0] <= 4:
        raise ValueError(f"vertex count must be in [1, 4], got {A.shape[0]}")
    if not np.isin(A, (0, 1)).all():
        raise ValueError("adjacency entries must be 0 or 1")
    return A.astype(np.uint8)


def vectorize(A) -> BitString:
    """Column-stacked vectorization: entry (i, j) lands at bit position j*n + i."""
    A = _check_adjacency(A)
    return BitString.from_bits(A.flatten(order="F"))


def devectorize(x: BitString | int, n: int) -> np.ndarray:
    value = x.value if isinstance(x, BitString) else int(x)
    if isinstance(x, BitString) and x.width != n * n:
        raise ValueError(f"width {x.width} does not match n^2 = {n * n}")
    return int_to_bits(value, n * n).reshape((n, n), order="F")


def degree_counts(A) -> np.ndarray:
    """Histogram of out-degrees; entry k counts rows whose sum is k (self-loops included)."""
    A = _check_adjacency(A)
    n = A.shape[0]
    return np.bincount(A.sum(axis=1), minlength=n + 1).astype(np.int64)


def parity_reduce(c) -> np.ndarray:
    c = np.asarray(c)
    if (c < 0).any():
        raise ValueError("degree counts must be nonnegative")
    return (c % 2).astype(np.uint8)


@lru_cache(maxsize=None)
def all_degree_parities(n: int) -> np.ndarray:
    """Parity vectors for every adjacency matrix, indexed by the vectorized value.

    Returns an array of shape (2**(n*n), n+1).
    """
    if not 1 <= n <= 4:
        raise ValueError(f"vertex count must be in [1, 4], got {n}")
    width = n * n
    idx = np.arange(1 << width, dtype=np.int64)
    shifts = width - 1 - np.arange(width)
    bits = ((idx[:, None] >> shifts[None, :]) & 1).astype(np.int64)
    # column-major: row r of A occupies positions r, r+n, r+2n, ...
    row_sums = bits.reshape(-1, n, n).sum(axis=1)  # axis 1 walks columns j
    counts = np.zeros((idx.size, n + 1), dtype=np.int64)
    for k in range(n + 1):
        counts[:, k] = (row_sums == k).sum(axis=1)
    out = (counts % 2).astype(np.uint8)
    out.setflags(write=False)
    return out


def walsh_spectrum(truth_table) -> np.ndarray:
    """Walsh-Hadamard coefficients of a Boolean function.

    Coefficient y is ``2**-m * sum_x (-1)**(x.y + f(x))``, computed with the
    in-place butterfly in O(m 2**m).
    """
    f = np.asarray(truth_table)
    size = f.shape[0]
    if f.ndim != 1 or size == 0 or size & (size - 1):
        raise ValueError(f"truth table length must be a power of two, got {f.shape}")
    if size > 1 << 16:
        raise ValueError("at most 16 input bits supported")
    a = 1.0 - 2.0 * f.astype(np.float64)
    h = 1
    while h < size:
        a = a.reshape(-1, 2, h)
        a = np.stack((a[:, 0] + a[:, 1], a[:, 0] - a[:, 1]), axis=1)
        h *= 2
    return a.reshape(size) / size
