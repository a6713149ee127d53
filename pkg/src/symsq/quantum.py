"""Dense statevector constructions for quantum example states and the observables queried on them.

States are plain complex numpy vectors, density operators plain Hermitian
matrices. Index ``2*x + y`` addresses basis state ``|x, y>`` with the label
qubit least significant.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .bitdomain import all_degree_parities
from .concepts import ParityConcept, as_truth_table
from .symmetry import OrbitPartition

ATOL = 1e-10
NORM_SLACK = 1e-9
DEFAULT_MAX_DIM = 1 << 16
COMPOSED_MAX_DIM = 1 << 14


def max_dim() -> int:
    """Dimension cap, overridable with SYMSQ_MAX_DIM (a power of two up to 2**16)."""
    raw = os.environ.get("SYMSQ_MAX_DIM")
    if raw is None:
        return DEFAULT_MAX_DIM
    value = int(raw)
    if value < 2 or value & (value - 1) or value > DEFAULT_MAX_DIM:
        raise ValueError(f"SYMSQ_MAX_DIM must be a power of two in [2, 2^16], got {raw}")
    return value


def _check_dim(dim: int, cap: int | None = None) -> None:
    cap = max_dim() if cap is None else min(cap, max_dim())
    if dim > cap:
        raise ValueError(f"dimension {dim} exceeds the cap {cap}")


def check_state(psi: np.ndarray, atol: float = ATOL) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise ValueError("a state vector must be one-dimensional")
    if abs(np.linalg.norm(psi) - 1.0) > atol:
        raise ValueError(f"state is not normalized (norm {np.linalg.norm(psi)})")
    return psi


def check_density(rho: np.ndarray, atol: float = ATOL) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("a density operator must be a square matrix")
    if np.abs(rho - rho.conj().T).max() > atol:
        raise ValueError("density operator is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > atol:
        raise ValueError(f"density operator has trace {np.trace(rho).real}")
    if np.linalg.eigvalsh(rho).min() < -atol:
        raise ValueError("density operator has a negative eigenvalue")
    return rho


def as_density(state: np.ndarray) -> np.ndarray:
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        return np.outer(state, state.conj())
    return state


@dataclass(frozen=True)
class Observable:
    """Hermitian matrix with operator norm at most one.

    ``claimed_scale`` is the factor separating a construction's measured
    expectation from its nominal target value (1 when they agree).
    """

    matrix: np.ndarray
    label: str = ""
    claimed_scale: float = 1.0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        M = np.asarray(self.matrix, dtype=complex)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError("observable must be a square matrix")
        if np.abs(M - M.conj().T).max(initial=0.0) > ATOL:
            raise ValueError(f"observable {self.label!r} is not Hermitian")
        norm = operator_norm(M)
        if norm > 1.0 + NORM_SLACK:
            raise ValueError(f"observable {self.label!r} has operator norm {norm} > 1")
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def norm(self) -> float:
        return operator_norm(self.matrix)

    def is_diagonal(self) -> bool:
        off = self.matrix - np.diag(np.diag(self.matrix))
        return not off.any()


def operator_norm(M: np.ndarray) -> float:
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    if np.allclose(M, M.conj().T, atol=ATOL):
        return float(np.abs(np.linalg.eigvalsh(M)).max())
    return float(np.linalg.norm(M, 2))


def expectation(O: Observable | np.ndarray, state: np.ndarray) -> float:
    """<psi|O|psi> for a vector, Tr[O rho] for a matrix; clamped to [-1, 1] for Observables."""
    M = O.matrix if isinstance(O, Observable) else np.asarray(O)
    state = np.asarray(state)
    if state.shape[0] != M.shape[0]:
        raise ValueError(f"dimension mismatch: observable {M.shape[0]}, state {state.shape[0]}")
    if state.ndim == 1:
        value = np.vdot(state, M @ state)
    else:
        value = np.trace(M @ state)
    if abs(value.imag) > ATOL:
        raise ValueError(f"expectation has imaginary part {value.imag}; non-Hermitian construction")
    real = float(value.real)
    if isinstance(O, Observable):
        real = min(1.0, max(-1.0, real))
    return real


def batch_expectations(M: np.ndarray, states: np.ndarray) -> np.ndarray:
    """Expectations of M on each row of ``states``."""
    values = np.einsum("si,si->s", states.conj(), states @ M.T)
    if np.abs(values.imag).max(initial=0.0) > ATOL:
        raise ValueError("batched expectation has an imaginary residue")
    return values.real


def example_state(f) -> np.ndarray:
    """(1/sqrt|X|) sum_x |x, f(x)> under the uniform input distribution."""
    table = as_truth_table(f)
    size = table.size
    _check_dim(2 * size)
    psi = np.zeros(2 * size, dtype=complex)
    psi[2 * np.arange(size) + table] = 1.0 / np.sqrt(size)
    return psi


def example_states(tables: np.ndarray) -> np.ndarray:
    """Row-wise example states for a (count, |X|) array of truth tables."""
    count, size = tables.shape
    _check_dim(2 * size)
    psi = np.zeros((count, 2 * size))
    rows = np.repeat(np.arange(count), size)
    cols = (2 * np.arange(size)[None, :] + tables).reshape(-1)
    psi[rows, cols] = 1.0 / np.sqrt(size)
    return psi


PLUS = np.array([1.0, 1.0]) / np.sqrt(2)
MINUS = np.array([1.0, -1.0]) / np.sqrt(2)


def phase_kickback_decompose(f) -> tuple[np.ndarray, np.ndarray, float]:
    """Split |psi_f><psi_f| into uniform and phase-state blocks on the |+->, |-> label basis.

    Returns ``(phi_f, u, residual)`` where residual is the largest absolute
    entry of the difference between both sides of the identity.
    """
    table = as_truth_table(f)
    size = table.size
    u = np.full(size, 1.0 / np.sqrt(size))
    phi = (1.0 - 2.0 * table) / np.sqrt(size)
    psi = example_state(table)
    P = np.outer(PLUS, PLUS)
    M = np.outer(MINUS, MINUS)
    PM = np.outer(PLUS, MINUS)
    MP = np.outer(MINUS, PLUS)
    rhs = 0.5 * (
        np.kron(np.outer(phi, phi), M)
        + np.kron(np.outer(phi, u), MP)
        + np.kron(np.outer(u, phi), PM)
        + np.kron(np.outer(u, u), P)
    )
    residual = float(np.abs(np.outer(psi, psi.conj()) - rhs).max())
    return phi, u, residual


@lru_cache(maxsize=None)
def hadamard(k: int) -> np.ndarray:
    """Normalized H^{(x)k}."""
    H = np.array([[1.0]])
    h = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2)
    for _ in range(k):
        H = np.kron(H, h)
    H.setflags(write=False)
    return H


def prep_extend(g: ParityConcept) -> np.ndarray:
    """(1/sqrt N) sum_A |x_A>|c_hat_A>|g_S(A)>, registers ordered (x_A, c_hat, label)."""
    n = g.n
    width = n * n
    dim = 1 << (width + n + 2)
    _check_dim(dim, COMPOSED_MAX_DIM)
    c_hat = all_degree_parities(n).astype(np.int64)
    weights = 1 << np.arange(n, -1, -1)
    c_index = c_hat @ weights
    labels = g.truth_table().astype(np.int64)
    x = np.arange(1 << width, dtype=np.int64)
    psi = np.zeros(dim, dtype=complex)
    psi[(x << (n + 2)) | (c_index << 1) | labels] = 1.0 / np.sqrt(1 << width)
    return psi


def fourier_mass_matrix(T: Iterable[int], m: int) -> np.ndarray:
    """H^{(x)(m+1)} (M_T (x) |1><1|) H^{(x)(m+1)} with M_T the projector onto characters in T."""
    if not 1 <= m <= 12:
        raise ValueError(f"register width must be in [1, 12], got {m}")
    mask = np.zeros(1 << m)
    for s in T:
        if not 0 <= s < (1 << m):
            raise ValueError(f"character {s} outside {{0,1}}^{m}")
        mask[s] = 1.0
    diag = np.kron(mask, np.array([0.0, 1.0]))
    H = hadamard(m + 1)
    return (H * diag[None, :]) @ H


def fourier_mass_observable(T: Iterable[int], m: int) -> Observable:
    """Fourier-sampling observable; measured expectation is half the summed squared coefficients."""
    T = sorted(set(int(s) for s in T))
    return Observable(
        fourier_mass_matrix(T, m),
        label=f"fourier-mass(m={m},|T|={len(T)})",
        claimed_scale=2.0,
        meta={"characters": T},
    )


def influence_characters(i: int, m: int) -> list[int]:
    """Characters sigma with sigma_i = 1; i is 1-based, bit 1 most significant."""
    if not 1 <= i <= m:
        raise ValueError(f"coordinate {i} outside [1, {m}]")
    bit = 1 << (m - i)
    return [s for s in range(1 << m) if s & bit]


def influence_observable_ideal(i: int, m: int) -> Observable:
    obs = fourier_mass_observable(influence_characters(i, m), m)
    return Observable(obs.matrix, label=f"influence-ideal(i={i},m={m})", claimed_scale=2.0,
                      meta={"coordinate": i, "m": m})


def composed_local_operator(i: int, n: int) -> np.ndarray:
    """(H^{(x)(n+2)}) M_{T_i} (H^{(x)(n+2)}) on the (c_hat, label) registers."""
    m = n + 1
    H = hadamard(m + 1)
    return H @ fourier_mass_matrix(influence_characters(i, m), m) @ H


def influence_observable_composed(i: int, n: int) -> Observable:
    """Influence test pulled back through the degree-parity preparation.

    The preparation maps |x_A, y> to |x_A, c_hat_A, y> with fresh ancillas, so
    the pulled-back operator is block diagonal in x_A: block A is the 2x2
    restriction of the local operator to rows and columns (c_hat_A, 0|1).
    The result acts on the plain example-state space of dimension 2^(n^2+1).
    """
    if not 1 <= n <= 3:
        raise ValueError(f"composed construction supports n in [1, 3], got {n}")
    _check_dim(1 << (n * n + n + 2), COMPOSED_MAX_DIM)
    B = composed_local_operator(i, n)
    c_hat = all_degree_parities(n).astype(np.int64)
    c_index = c_hat @ (1 << np.arange(n, -1, -1))
    size = 1 << (n * n)
    blocks = np.empty((size, 2, 2), dtype=complex)
    for a in range(2):
        for b in range(2):
            blocks[:, a, b] = B[2 * c_index + a, 2 * c_index + b]
    O = np.zeros((2 * size, 2 * size), dtype=complex)
    idx = 2 * np.arange(size)
    for a in range(2):
        for b in range(2):
            O[idx + a, idx + b] = blocks[:, a, b]
    return Observable(O, label=f"influence-composed(i={i},n={n})",
                      meta={"coordinate": i, "n": n})


def composed_expectation_from_prep(i: int, g: ParityConcept) -> float:
    """<g'_S| I (x) B_i |g'_S> evaluated on the extended register directly."""
    n = g.n
    psi = prep_extend(g).reshape(1 << (n * n), 1 << (n + 2))
    B = composed_local_operator(i, n)
    value = np.einsum("ai,ij,aj->", psi.conj(), B, psi)
    return float(value.real)


def helstrom_observable(rho: np.ndarray, sigma: np.ndarray, tol: float = 1e-12) -> Observable:
    """P+ - P- from the spectral decomposition of rho - sigma (zero on the null space)."""
    rho = as_density(rho)
    sigma = as_density(sigma)
    if rho.shape != sigma.shape:
        raise ValueError(f"dimension mismatch: {rho.shape} vs {sigma.shape}")
    X = rho - sigma
    X = 0.5 * (X + X.conj().T)
    w, V = np.linalg.eigh(X)
    signs = np.where(w > tol, 1.0, np.where(w < -tol, -1.0, 0.0))
    O = (V * signs[None, :]) @ V.conj().T
    return Observable(0.5 * (O + O.conj().T), label="helstrom")


def trace_norm(X: np.ndarray) -> float:
    X = 0.5 * (X + X.conj().T)
    return float(np.abs(np.linalg.eigvalsh(X)).sum())


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Half the trace norm of the difference; pure pairs use sqrt(1 - |<a|b>|^2)."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    if a.ndim == 1 and b.ndim == 1:
        overlap = abs(np.vdot(a, b)) ** 2
        return float(np.sqrt(max(0.0, 1.0 - overlap)))
    return 0.5 * trace_norm(as_density(a) - as_density(b))


def mixture_density(states: Sequence[np.ndarray] | np.ndarray, weights=None) -> np.ndarray:
    """Weighted average of |psi><psi| (rows of a 2-D array, or a list of vectors/matrices)."""
    if isinstance(states, np.ndarray) and states.ndim == 2 and weights is None:
        return (states.T @ states.conj()) / states.shape[0]
    states = list(states)
    if not states:
        raise ValueError("empty family")
    w = np.full(len(states), 1.0 / len(states)) if weights is None else np.asarray(weights, float)
    dims = {np.asarray(s).shape[0] for s in states}
    if len(dims) != 1:
        raise ValueError("states have mismatched dimensions")
    return sum(wi * as_density(s) for wi, s in zip(w, states))


def class_mixture_density(p: OrbitPartition) -> np.ndarray:
    """E_f |psi_f><psi_f| over the uniform symmetric class, from pairwise label statistics.

    Entry ((x,a),(x',b)) is Pr[f(x)=a, f(x')=b] / |X|: 1/2 on matching labels in
    a shared orbit, 1/4 for every label pair across orbits.
    """
    size = p.domain_size
    _check_dim(2 * size)
    same = p.orbit_of[:, None] == p.orbit_of[None, :]
    sigma = np.empty((size, 2, size, 2))
    eye = np.eye(2)
    for a in range(2):
        for b in range(2):
            sigma[:, a, :, b] = np.where(same, 0.5 * eye[a, b], 0.25)
    return sigma.reshape(2 * size, 2 * size) / size


def tight_variance_observable(p: OrbitPartition) -> Observable:
    """Off-diagonal +/- block observable coupling |u> to the uniform state on a largest orbit.

    In the (x) (x) {|+>, |->} block basis the only nonzero blocks are
    O_{+-} = |u><w| and its adjoint, so <psi_f|O|psi_f> = <w|phi_f>.
    """
    size = p.domain_size
    _check_dim(2 * size)
    star = int(np.argmax(p.sizes))
    u = np.full(size, 1.0 / np.sqrt(size))
    w = np.zeros(size)
    w[p.blocks[star]] = 1.0 / np.sqrt(p.blocks[star].size)
    O2 = np.outer(u, w)
    O = np.kron(O2, np.outer(PLUS, MINUS)) + np.kron(O2.T, np.outer(MINUS, PLUS))
    return Observable(O, label="tight-variance", meta={"star_orbit": star,
                                                       "star_size": int(p.blocks[star].size)})


def diagonal_observable(phi_table: np.ndarray, label: str = "diagonal") -> Observable:
    """Diagonal observable with entry phi(x, y) at |x, y>; ``phi_table`` has shape (|X|, 2)."""
    phi_table = np.asarray(phi_table, dtype=float)
    if phi_table.ndim != 2 or phi_table.shape[1] != 2:
        raise ValueError("phi table must have shape (|X|, 2)")
    return Observable(np.diag(phi_table.reshape(-1)).astype(complex), label=label)


def sign_observable(size: int) -> Observable:
    """Diagonal observable for phi(x, y) = (-1)^y."""
    table = np.tile([1.0, -1.0], (size, 1))
    return diagonal_observable(table, label="diagonal-sign")
