"""Variances, pairwise statistics, lower-bound arithmetic and tolerance windows."""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .concepts import (
    MAX_ENUMERATED_ORBITS,
    all_orbit_bits,
    class_truth_tables,
    sample_orbit_bits,
)
from .quantum import (
    Observable,
    as_density,
    batch_expectations,
    class_mixture_density,
    example_states,
)
from .symmetry import GroupAction, OrbitPartition, OrbitStats, enumerate_orbits, orbit_stats

EXACT_ENUMERATION_ORBITS = 16
PAIRWISE_MAX_DOMAIN = 1 << 12
DIAGONAL_TAU_LIMIT = 0.096
SKEW_THRESHOLD = 0.25
SUPPORT_TOL = 1e-9
MIN_TRACE_DISTANCE = 1.0 - math.sqrt(0.5)
CHUNK = 4096


def _partition(action) -> OrbitPartition:
    if isinstance(action, OrbitPartition):
        return action
    if isinstance(action, GroupAction):
        return enumerate_orbits(action)
    raise TypeError("expected a GroupAction or OrbitPartition")


def _matrix(O) -> np.ndarray:
    return O.matrix if isinstance(O, Observable) else np.asarray(O)


@dataclass
class VarianceReport:
    mode: str
    value: float
    samples: int
    stderr: float
    method: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def class_expectations(p: OrbitPartition, O, orbit_bits: np.ndarray) -> np.ndarray:
    """<psi_f|O|psi_f> for every row of orbit bits, in chunks."""
    M = _matrix(O)
    if M.shape[0] != 2 * p.domain_size:
        raise ValueError(f"observable dimension {M.shape[0]} does not match 2|X| = {2 * p.domain_size}")
    out = np.empty(orbit_bits.shape[0])
    for lo in range(0, orbit_bits.shape[0], CHUNK):
        tables = class_truth_tables(p, orbit_bits[lo:lo + CHUNK])
        out[lo:lo + CHUNK] = batch_expectations(M, example_states(tables))
    return out


def spin_expansion(p: OrbitPartition, O) -> tuple[float, np.ndarray, np.ndarray]:
    """Write <psi_f|O|psi_f> as c + sum_k h_k s_k + sum_{k<l} J_kl s_k s_l, s_k = (-1)^{b_k}.

    The expectation only couples pairs of orbit bits, so it is a degree-2
    polynomial in the spins; under uniform independent bits its variance is
    sum h_k^2 + sum_{k<l} J_kl^2.
    """
    M = _matrix(O)
    size = p.domain_size
    Z = p.indicator()
    R = M.reshape(size, 2, size, 2)
    # G[k, a, l, c] = (1/|X|) sum_{x in O_k, x' in O_l} O[(x,a), (x',c)]
    G = np.einsum("xk,xayc,yl->kalc", Z, R, Z, optimize=True) / size
    G = G.real
    sign = np.array([1.0, -1.0])
    K = p.orbit_count
    const = 0.0
    h = np.zeros(K)
    J = np.zeros((K, K))
    diag_k = np.arange(K)
    # same-orbit terms: both labels equal the orbit bit
    Gd = G[diag_k, :, diag_k, :]  # (K, 2, 2)
    same = np.stack([Gd[:, 0, 0], Gd[:, 1, 1]], axis=1)
    const += same.sum() / 2
    h += (same * sign).sum(axis=1) / 2
    off = ~np.eye(K, dtype=bool)
    Go = np.where(off[:, None, :, None], G, 0.0)
    const += Go.sum() / 4
    h += np.einsum("kalc,a->k", Go, sign) / 4
    h += np.einsum("kalc,c->l", Go, sign) / 4
    Q = np.einsum("kalc,a,c->kl", Go, sign, sign) / 4
    J = np.triu(Q + Q.T, k=1)
    return const, h, J


def variance_of_observable(action, O, mode: str = "exact", seed=None,
                           samples: int = 100_000) -> VarianceReport:
    """Variance of <psi_f|O|psi_f> over f uniform in the symmetric class.

    Exact mode enumerates the class when it has at most 2^16 members and
    otherwise uses the degree-2 spin expansion, which is also exact.
    """
    p = _partition(action)
    if mode == "exact":
        if p.orbit_count <= EXACT_ENUMERATION_ORBITS:
            values = class_expectations(p, O, all_orbit_bits(p.orbit_count))
            var = float(np.mean(values ** 2) - np.mean(values) ** 2)
            return VarianceReport("exact", max(var, 0.0), values.size, 0.0, "enumeration")
        _, h, J = spin_expansion(p, O)
        var = float((h ** 2).sum() + (J ** 2).sum())
        return VarianceReport("exact", var, 0, 0.0, "spin-expansion")
    if mode == "montecarlo":
        if seed is None:
            raise ValueError("Monte Carlo variance needs an explicit seed")
        rng = np.random.default_rng(seed)
        values = class_expectations(p, O, sample_orbit_bits(p, samples, rng))
        centered = (values - values.mean()) ** 2
        var = float(values.var(ddof=1))
        stderr = float(centered.std(ddof=1) / math.sqrt(samples))
        return VarianceReport("montecarlo", var, samples, stderr, "sampling")
    raise ValueError(f"unknown mode {mode!r}")


def diagonal_variance_exact(action, phi_int: np.ndarray, scale: int = 1) -> Fraction:
    """Exact rational variance of E_x[phi(x, f(x))] / scale for an integer table phi.

    The expectation is affine in the orbit spins, so the variance is the sum
    of squared per-orbit half-differences; no enumeration is needed.
    """
    p = _partition(action)
    phi_int = np.asarray(phi_int, dtype=np.int64)
    if phi_int.shape != (p.domain_size, 2):
        raise ValueError(f"phi table must have shape ({p.domain_size}, 2)")
    diff = phi_int[:, 0] - phi_int[:, 1]
    per_orbit = np.zeros(p.orbit_count, dtype=object)
    np.add.at(per_orbit, p.orbit_of, diff.astype(object))
    total = sum((int(v) * int(v) for v in per_orbit), 0)
    return Fraction(total, 4 * (p.domain_size * scale) ** 2)


def sign_variance_exact(action) -> Fraction:
    p = _partition(action)
    return diagonal_variance_exact(p, np.tile([1, -1], (p.domain_size, 1)))


def _class_label_matrix(p: OrbitPartition) -> np.ndarray:
    return class_truth_tables(p, all_orbit_bits(p.orbit_count))


@dataclass
class PairwiseReport:
    fraction: float
    fraction_exact: Fraction
    formula: Fraction
    pairs_checked: int
    census_uniform: bool
    census_method: str

    def to_dict(self) -> dict:
        d = asdict(self)
        d["fraction_exact"] = str(self.fraction_exact)
        d["formula"] = str(self.formula)
        return d


def _marginal_pair_census(a: int, b: int) -> np.ndarray:
    """Label census for a pair in orbits a, b over the class, enumerating just those two bits."""
    counts = np.zeros((2, 2), dtype=np.int64)
    if a == b:
        for v in range(2):
            counts[v, v] += 2
    else:
        for u in range(2):
            for v in range(2):
                counts[u, v] += 1
    return counts


def pairwise_independence(action, mode: str = "exact", seed=None, pairs: int = 2000) -> PairwiseReport:
    """Fraction of ordered pairs (x, x') in distinct orbits, by direct pair census.

    For each such pair the joint label census over the class is checked to be
    uniform on {0,1}^2. The class is enumerated in full up to 2^16 members;
    larger classes are product measures over orbit bits, so the two relevant
    bits are enumerated instead.
    """
    p = _partition(action)
    size = p.domain_size
    if size > PAIRWISE_MAX_DOMAIN:
        raise ValueError(f"domain of size {size} exceeds the pair-census cap {PAIRWISE_MAX_DOMAIN}")
    orbit = p.orbit_of
    distinct = orbit[:, None] != orbit[None, :]
    qualifying = int(distinct.sum())
    fraction = Fraction(qualifying, size * size)
    formula = 1 - orbit_stats(p).p_norm_sq_exact

    if mode == "exact":
        xs, ys = np.nonzero(distinct)
    elif mode == "sample":
        if seed is None:
            raise ValueError("sampled census needs an explicit seed")
        rng = np.random.default_rng(seed)
        xs_all, ys_all = np.nonzero(distinct)
        pick = rng.choice(xs_all.size, size=min(pairs, xs_all.size), replace=False)
        xs, ys = xs_all[pick], ys_all[pick]
    else:
        raise ValueError(f"unknown mode {mode!r}")

    if p.orbit_count <= EXACT_ENUMERATION_ORBITS:
        F = _class_label_matrix(p).astype(np.int64)
        total = F.shape[0]
        ones = F.T @ F  # (x, x') -> #f with f(x)=f(x')=1
        col = F.sum(axis=0)
        c11 = ones[xs, ys]
        c10 = col[xs] - c11
        c01 = col[ys] - c11
        c00 = total - c11 - c10 - c01
        quarter = total // 4
        uniform = bool(total % 4 == 0 and all((c == quarter).all() for c in (c00, c01, c10, c11)))
        method = "full-class"
    else:
        uniform = True
        cache = {}
        for a, b in zip(orbit[xs], orbit[ys]):
            key = (int(a), int(b))
            if key not in cache:
                cache[key] = _marginal_pair_census(*key)
            uniform &= bool((cache[key] == 1).all())
        method = "orbit-marginal"
    return PairwiseReport(float(fraction), fraction, formula, int(xs.size), uniform, method)


def orbit_correlation(action, x: int, x2: int) -> float:
    """E_f[(-1)^(f(x) + f(x'))] over the whole class."""
    p = _partition(action)
    a, b = int(p.orbit_of[x]), int(p.orbit_of[x2])
    if p.orbit_count <= MAX_ENUMERATED_ORBITS:
        bits = all_orbit_bits(p.orbit_count)
        s = (1 - 2 * bits[:, a].astype(np.int64)) * (1 - 2 * bits[:, b].astype(np.int64))
        return float(Fraction(int(s.sum()), s.size))
    census = _marginal_pair_census(a, b)
    signs = np.array([[1, -1], [-1, 1]])
    return float(Fraction(int((census * signs).sum()), int(census.sum())))


def orbit_correlation_matrix(action) -> np.ndarray:
    """All-pairs version of ``orbit_correlation``; integer sums divided once at the end."""
    p = _partition(action)
    if p.orbit_count <= EXACT_ENUMERATION_ORBITS:
        S = 1 - 2 * _class_label_matrix(p).astype(np.int64)
        total = S.shape[0]
        C = S.T @ S
        if (C % total).any():
            raise AssertionError("orbit correlations are not integral multiples of the class size")
        return (C // total).astype(float)
    K = p.orbit_count
    table = np.zeros((K, K))
    signs = np.array([[1, -1], [-1, 1]])
    for a in range(K):
        for b in range(K):
            census = _marginal_pair_census(a, b)
            table[a, b] = (census * signs).sum() / census.sum()
    return table[p.orbit_of[:, None], p.orbit_of[None, :]]


@dataclass
class BoundReport:
    tau: float
    orbit_stats: dict
    sq_bound: float
    qsq_bound: float
    regularity_ratio: float
    regularity_ratio_exact: Fraction
    classification: str
    tau_warning: bool

    def to_dict(self) -> dict:
        d = asdict(self)
        d["regularity_ratio_exact"] = str(self.regularity_ratio_exact)
        return d


def lower_bounds(tau: float, stats: OrbitStats, skew_threshold: float = SKEW_THRESHOLD) -> BoundReport:
    """Query-count scalings tau^2/||p||^2 (diagonal) and tau^2 |X|/max|O| (general), constants dropped."""
    if not 0 < tau <= 1:
        raise ValueError(f"tau must lie in (0, 1], got {tau}")
    warn = tau >= DIAGONAL_TAU_LIMIT
    if warn:
        warnings.warn(f"tau = {tau} >= {DIAGONAL_TAU_LIMIT}: the trace-distance hypothesis of the "
                      "learning-to-deciding reduction no longer holds", stacklevel=2)
    ratio = stats.p_norm_sq_exact * stats.domain_size / stats.max_orbit
    return BoundReport(
        tau=tau,
        orbit_stats=stats.to_dict(),
        sq_bound=tau * tau / stats.p_norm_sq,
        qsq_bound=tau * tau * stats.domain_size / stats.max_orbit,
        regularity_ratio=float(ratio),
        regularity_ratio_exact=ratio,
        classification="regular" if ratio >= skew_threshold else "skewed",
        tau_warning=warn,
    )


@dataclass(frozen=True)
class ToleranceWindow:
    zeta: float
    low: float
    high: float
    valid: bool

    def to_dict(self) -> dict:
        return asdict(self)


def tolerance_window(zeta) -> ToleranceWindow:
    """(2 zeta, sqrt(2 zeta - zeta^2)); nonempty exactly when zeta < 2/5."""
    z = Fraction(zeta).limit_denominator(10**12) if isinstance(zeta, float) else Fraction(zeta)
    if not 0 < z < 1:
        raise ValueError(f"zeta must lie in (0, 1), got {zeta}")
    low = 2 * z
    high_sq = 2 * z - z * z
    valid = low * low < high_sq
    return ToleranceWindow(float(z), float(low), math.sqrt(high_sq), valid)


def average_correlation(family: Sequence[np.ndarray], sigma: np.ndarray) -> float:
    """(1/|C|^2) sum_ij |Tr[rho_i^ rho_j^ sigma]| with rho^ = rho sigma^+ - Pi_sigma.

    The pseudo-inverse is taken on the support of sigma; a member with weight
    outside that support raises.
    """
    sigma = as_density(sigma)
    w, V = np.linalg.eigh(0.5 * (sigma + sigma.conj().T))
    keep = w > SUPPORT_TOL
    Vs = V[:, keep]
    pinv = (Vs / w[keep][None, :]) @ Vs.conj().T
    proj = Vs @ Vs.conj().T
    hats = []
    for rho in family:
        rho = as_density(rho)
        if rho.shape != sigma.shape:
            raise ValueError("dimension mismatch between family member and sigma")
        leak = np.abs(rho - proj @ rho @ proj).max()
        if leak > SUPPORT_TOL:
            raise ValueError(f"family member leaks outside the support of sigma ({leak:.2e})")
        hats.append(rho @ pinv - proj)
    total = 0.0
    for hi in hats:
        for hj in hats:
            total += abs(np.trace(hi @ hj @ sigma))
    return float(total / len(hats) ** 2)


@dataclass
class TraceDistanceReport:
    minimum: float
    bound: float
    holds: bool
    members: int
    exhaustive: bool

    def to_dict(self) -> dict:
        return asdict(self)


def min_trace_distance_check(action, samples: int | None = None, seed=None) -> TraceDistanceReport:
    """min_f d_tr(|psi_f><psi_f|, sigma) with sigma the class mixture.

    Exhaustive up to 2^16 members, otherwise over ``samples`` seeded draws.
    """
    p = _partition(action)
    if p.orbit_count < 2:
        raise ValueError("class has fewer than two orbits; the check is vacuous")
    sigma = class_mixture_density(p)
    if samples is None:
        if p.orbit_count > EXACT_ENUMERATION_ORBITS:
            raise ValueError("class too large to enumerate; pass samples and a seed")
        bits = all_orbit_bits(p.orbit_count)
        exhaustive = True
    else:
        if seed is None:
            raise ValueError("sampled check needs an explicit seed")
        bits = sample_orbit_bits(p, samples, np.random.default_rng(seed))
        exhaustive = False
    best = math.inf
    for lo in range(0, bits.shape[0], 512):
        psi = example_states(class_truth_tables(p, bits[lo:lo + 512]))
        diff = np.einsum("si,sj->sij", psi, psi) - sigma[None, :, :]
        eig = np.linalg.eigvalsh(diff)
        best = min(best, float(0.5 * np.abs(eig).sum(axis=1).min()))
    return TraceDistanceReport(best, MIN_TRACE_DISTANCE, best >= MIN_TRACE_DISTANCE - 1e-9,
                               bits.shape[0], exhaustive)
