"""Acceptance suite: one check per criterion, each against an independent oracle."""

from __future__ import annotations

import itertools
import time
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import analysis, learners
from .concepts import LinearParity, make_disjoint_class, parity_targets
from .oracles import OracleSession, make_adversary, random_diagonal_battery, validity_audit
from .quantum import (
    example_state,
    expectation,
    fourier_mass_observable,
    helstrom_observable,
    phase_kickback_decompose,
    sign_observable,
    tight_variance_observable,
    trace_distance,
    trace_norm,
)
from .symmetry import enumerate_orbits, make_action, make_skewed_partition, orbit_stats

SOUND_ADVERSARIES = ("grid", "null", "worst")
ORBIT_KINDS = ("cyclic", "perm", "graphiso")
SEED = 20240601


@dataclass
class CheckResult:
    criterion: int
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] criterion {self.criterion:2d}  {self.name:<34} {self.detail} ({self.seconds:.2f}s)"

    def to_dict(self) -> dict:
        # wall-clock time stays out of reports so they remain byte-deterministic
        d = asdict(self)
        del d["seconds"]
        return d


def brute_orbits(action) -> list[frozenset]:
    """Orbits by closing each unvisited point under the generators."""
    seen = np.zeros(action.domain_size, dtype=bool)
    orbits = []
    for x in range(action.domain_size):
        if seen[x]:
            continue
        orbit, frontier = {x}, [x]
        while frontier:
            y = frontier.pop()
            for g in action.generators:
                z = int(g[y])
                if z not in orbit:
                    orbit.add(z)
                    frontier.append(z)
        for y in orbit:
            seen[y] = True
        orbits.append(frozenset(orbit))
    return orbits


def naive_walsh(table) -> np.ndarray:
    """f^(y) = 2^-m sum_x (-1)^(x.y + f(x)), straight from the definition."""
    table = np.asarray(table)
    size = table.size
    out = np.empty(size)
    for y in range(size):
        out[y] = sum((-1) ** (bin(x & y).count("1") + int(table[x])) for x in range(size)) / size
    return out


def _actions_up_to(n_max: int, kinds=ORBIT_KINDS):
    for kind in kinds:
        for n in range(1, n_max + 1):
            yield f"{kind}-{n}", make_action(kind, n)


def check_orbits() -> tuple[bool, str]:
    start = time.perf_counter()
    p3 = enumerate_orbits(make_action("cyclic", 3))
    p4 = enumerate_orbits(make_action("cyclic", 4))
    g2 = enumerate_orbits(make_action("graphiso", 2))
    elapsed = time.perf_counter() - start
    s3, s4 = orbit_stats(p3), orbit_stats(p4)
    ok = (sorted(s3.sizes) == [1, 1, 3, 3] and s3.p_norm_sq_exact == Fraction(5, 16)
          and s4.orbit_count == 6 and s4.p_norm_sq_exact == Fraction(54, 256)
          and g2.orbit_count == 10 and elapsed < 1.0)
    for p in (p3, p4, g2):
        ok &= {frozenset(map(int, b)) for b in p.blocks} == set(brute_orbits(p.action))
    return ok, f"sizes={list(s3.sizes)} p2={s3.p_norm_sq_exact} c4={s4.orbit_count} g2={g2.orbit_count}"


def check_orbit_correlation() -> tuple[bool, str]:
    start = time.perf_counter()
    ok = True
    for name, action in _actions_up_to(3):
        p = enumerate_orbits(action)
        same = p.orbit_of[:, None] == p.orbit_of[None, :]
        C = analysis.orbit_correlation_matrix(p)
        ok &= bool(np.array_equal(C, same.astype(float)))
    p = enumerate_orbits(make_action("cyclic", 3))
    ok &= analysis.orbit_correlation(p, 0b001, 0b100) == 1.0
    ok &= analysis.orbit_correlation(p, 0b001, 0b011) == 0.0
    elapsed = time.perf_counter() - start
    return ok and elapsed < 10.0, "all pairs in {0,1} exactly"


def check_pairwise() -> tuple[bool, str]:
    ok = True
    worst = 0.0
    for name, action in _actions_up_to(3):
        p = enumerate_orbits(action)
        r = analysis.pairwise_independence(p)
        # direct pair census against the brute-force orbits
        label = {}
        for k, orbit in enumerate(brute_orbits(action)):
            for x in orbit:
                label[x] = k
        size = action.domain_size
        count = sum(label[x] != label[y] for x in range(size) for y in range(size))
        err = abs(r.fraction - (1.0 - orbit_stats(p).p_norm_sq))
        worst = max(worst, err)
        ok &= err <= 1e-15 and r.census_uniform and Fraction(count, size * size) == r.fraction_exact
    return ok, f"max |frac - (1-||p||^2)| = {worst:.1e}, census uniform"


def check_phase_kickback() -> tuple[bool, str]:
    worst = 0.0
    total = 0
    for n in range(1, 4):
        size = 1 << n
        for v in range(1 << size):
            table = np.array([(v >> (size - 1 - x)) & 1 for x in range(size)], dtype=np.uint8)
            worst = max(worst, phase_kickback_decompose(table)[2])
            total += 1
    return worst <= 1e-12, f"{total} functions, max residual {worst:.1e}"


def check_diagonal_variance() -> tuple[bool, str]:
    ok = True
    checked = 0
    for name, action in _actions_up_to(3, ORBIT_KINDS + ("trivial",)):
        p = enumerate_orbits(action)
        exact = analysis.sign_variance_exact(p)
        ok &= exact == orbit_stats(p).p_norm_sq_exact
        if p.orbit_count <= analysis.EXACT_ENUMERATION_ORBITS:
            enum = analysis.variance_of_observable(p, sign_observable(p.domain_size))
            ok &= abs(enum.value - float(exact)) <= 1e-12
        checked += 1
    rel = []
    for kind, n in (("cyclic", 3), ("perm", 3), ("graphiso", 2)):
        p = enumerate_orbits(make_action(kind, n))
        mc = analysis.variance_of_observable(p, sign_observable(p.domain_size), "montecarlo",
                                             seed=SEED, samples=100_000)
        rel.append(abs(mc.value / orbit_stats(p).p_norm_sq - 1.0))
    ok &= max(rel) < 0.05
    return ok, f"{checked} actions exact, MC max rel err {max(rel):.4f}"


def check_tight_variance() -> tuple[bool, str]:
    p = enumerate_orbits(make_skewed_partition(16, 4))
    mc = analysis.variance_of_observable(p, tight_variance_observable(p), "montecarlo",
                                         seed=SEED, samples=100_000)
    rel = abs(mc.value / 0.25 - 1.0)
    ok = rel < 0.05
    tested = [("skewed-16", make_skewed_partition(16, 4))]
    tested += list(_actions_up_to(4, ORBIT_KINDS + ("trivial",)))
    for name, action in tested:
        s = orbit_stats(enumerate_orbits(action))
        ok &= s.p_norm_sq_exact <= Fraction(s.max_orbit, s.domain_size)
    return ok, f"MC var {mc.value:.5f} (rel err {rel:.4f}); ||p||^2 <= max|O|/|X| on {len(tested)} actions"


def check_fourier_mass() -> tuple[bool, str]:
    worst = 0.0
    for m in range(1, 4):
        size = 1 << m
        subsets = [T for r in range(size + 1) for T in itertools.combinations(range(size), r)]
        mats = np.stack([fourier_mass_observable(T, m).matrix.real for T in subsets])
        for v in range(1 << size):
            table = np.array([(v >> (size - 1 - x)) & 1 for x in range(size)], dtype=np.uint8)
            psi = example_state(table).real
            spectrum = naive_walsh(table)
            measured = np.einsum("i,tij,j->t", psi, mats, psi)
            predicted = np.array([0.5 * sum(spectrum[s] ** 2 for s in T) for T in subsets])
            worst = max(worst, float(np.abs(measured - predicted).max()))
    return worst <= 1e-12, f"max |E - sum f^^2 / 2| = {worst:.1e}, measured scale 1/2"


def check_ideal_parity() -> tuple[bool, str]:
    start = time.perf_counter()
    ok = True
    runs = 0
    for m in (3, 4):
        for adv in SOUND_ADVERSARIES:
            for s in parity_targets(m):
                report = learners.learn_parity_ideal(OracleSession(LinearParity(s), 0.2, make_adversary(adv)), m)
                ok &= bool(report.success) and report.query_count == m
                runs += 1
    elapsed = time.perf_counter() - start
    return ok and elapsed < 5.0, f"{runs} runs exact with m queries each"


def check_composed_sweep() -> tuple[bool, str]:
    parts = []
    ok = True
    for n in (2, 3):
        learners.composed_sweep.cache_clear()
        first = learners.composed_sweep(n)
        learners.composed_sweep.cache_clear()
        second = learners.composed_sweep(n)
        drift = max(abs(a - b) for s in first for a, b in zip(first[s], second[s]))
        ok &= drift <= 1e-12 and len(first) == 1 << (n + 1)
        stats = learners.composed_gap_statistics(n)
        parts.append(f"n={n} gap={stats['flip_gap']:.3f} separable={stats['separable']}")
    return ok, "; ".join(parts) + " (reported only)"


def check_helstrom() -> tuple[bool, str]:
    cls = make_disjoint_class(20, 4, Fraction(1, 5))
    psi, psi0 = example_state(cls.member(0)), example_state(cls.zero())
    O = helstrom_observable(psi, psi0)
    d = trace_distance(psi, psi0)
    gap = expectation(O, psi) - expectation(O, psi0)
    ok = abs(d - 0.6) <= 1e-12 and abs(gap - 1.2) <= 1e-12
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(100):
        dim = int(rng.integers(2, 17))
        rho, sigma = (_random_density(rng, dim) for _ in range(2))
        H = helstrom_observable(rho, sigma)
        g = float(np.trace(H.matrix @ (rho - sigma)).real)
        worst = max(worst, abs(g - trace_norm(rho - sigma)))
    ok &= worst <= 1e-9
    return ok, f"d_tr={d:.12f} gap={gap:.12f}; random pairs max err {worst:.1e}"


def _random_density(rng, dim):
    rank = int(rng.integers(1, dim + 1))
    G = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


def check_tolerance_separation() -> tuple[bool, str]:
    zeta, tau, m = Fraction(1, 5), 0.5, 4
    cls = make_disjoint_class(20, m, zeta)
    audit = validity_audit(lambda: make_adversary("null"), cls.members(),
                           random_diagonal_battery(20, 50, SEED), tau)
    ok = audit.sound and audit.target_independent
    hits = [learners.learn_disjoint_sq_baseline(OracleSession(f, tau, make_adversary("null")), cls).success
            for f in cls.members()]
    accuracy = Fraction(sum(hits), m)
    ok &= accuracy == Fraction(1, m)
    worst = 0
    for adv in ("exact",) + SOUND_ADVERSARIES:
        for f in cls.members():
            r = learners.learn_disjoint_tournament(OracleSession(f, tau, make_adversary(adv)), cls)
            ok &= bool(r.success) and r.query_count <= m
            worst = max(worst, r.query_count)
    w = analysis.tolerance_window(0.2)
    ok &= (w.low, w.high, w.valid) == (0.4, 0.6, True)
    ok &= not analysis.tolerance_window(0.4).valid
    return ok, f"audit sound+independent, SQ accuracy {accuracy}, tournament <= {worst} queries, window ({w.low}, {w.high})"


def check_min_trace_distance() -> tuple[bool, str]:
    r = analysis.min_trace_distance_check(make_action("cyclic", 3))
    return r.holds and r.exhaustive, f"min d_tr = {r.minimum:.6f} >= {r.bound:.6f} over {r.members} members"


CHECKS: list[tuple[int, str, Callable[[], tuple[bool, str]]]] = [
    (1, "orbit machinery", check_orbits),
    (2, "orbit correlation exactness", check_orbit_correlation),
    (3, "pairwise independence", check_pairwise),
    (4, "phase kickback", check_phase_kickback),
    (5, "diagonal variance", check_diagonal_variance),
    (6, "tight variance + norm inequality", check_tight_variance),
    (7, "Fourier-mass observable", check_fourier_mass),
    (8, "ideal parity learner", check_ideal_parity),
    (9, "composed parity sweep", check_composed_sweep),
    (10, "Helstrom optimality", check_helstrom),
    (11, "tolerance separation", check_tolerance_separation),
    (12, "minimum trace distance", check_min_trace_distance),
]


def run_check(criterion: int) -> CheckResult:
    for number, name, fn in CHECKS:
        if number == criterion:
            start = time.perf_counter()
            try:
                passed, detail = fn()
            except Exception as exc:  # a crashing check is a failing check
                passed, detail = False, f"{type(exc).__name__}: {exc}"
            return CheckResult(number, name, bool(passed), detail, time.perf_counter() - start)
    raise KeyError(f"no criterion {criterion}")


def run_all() -> list[CheckResult]:
    return [run_check(number) for number, _, _ in CHECKS]
