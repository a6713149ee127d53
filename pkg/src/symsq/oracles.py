"""Stat / Qstat oracle sessions with explicit tolerance adversaries and a query log."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .concepts import ZeroConcept, as_truth_table
from .quantum import Observable, example_state, expectation

SOUNDNESS_SLACK = 1e-12


class Adversary:
    """Chooses an answer inside the tolerance band around the true expectation.

    ``reference`` is a concept whose value some strategies steer towards; the
    session evaluates the query on it and passes the result to ``respond``.
    """

    name = "adversary"
    reference = None

    def respond(self, truth: float, reference_value: float | None, tau: float) -> tuple[float, float, bool]:
        """Return ``(answer, preferred, fallback)``."""
        raise NotImplementedError

    def describe(self) -> dict:
        ref = self.reference
        return {"name": self.name,
                "reference": None if ref is None else getattr(ref, "label", lambda: "custom")()}


class Exact(Adversary):
    name = "exact"

    def respond(self, truth, reference_value, tau):
        return truth, truth, False


class GridRound(Adversary):
    """Round to the nearest multiple of tau (error at most tau/2)."""

    name = "grid"

    def respond(self, truth, reference_value, tau):
        answer = float(np.round(truth / tau) * tau)
        return answer, answer, False


class NullConsistent(Adversary):
    """Answer as if the target were the reference concept whenever that is sound."""

    name = "null"

    def __init__(self, reference=None):
        self.reference = reference

    def respond(self, truth, reference_value, tau):
        preferred = float(reference_value)
        if abs(preferred - truth) <= tau:
            return preferred, preferred, False
        return truth, preferred, True


class WorstCaseShift(Adversary):
    """Shift the truth by tau toward the reference value, clipped to [-1, 1]."""

    name = "worst"

    def __init__(self, reference=None):
        self.reference = reference

    def respond(self, truth, reference_value, tau):
        diff = float(reference_value) - truth
        if diff == 0.0:
            return truth, truth, False
        answer = truth + np.sign(diff) * tau
        answer = float(min(1.0, max(-1.0, answer)))
        return answer, answer, False


def make_adversary(name: str, reference=None) -> Adversary:
    name = name.lower()
    if name == "exact":
        return Exact()
    if name in ("grid", "gridround"):
        return GridRound()
    if name in ("null", "nullconsistent"):
        return NullConsistent(reference)
    if name in ("worst", "worstcaseshift"):
        return WorstCaseShift(reference)
    raise ValueError(f"unknown adversary {name!r}")


@dataclass
class QueryRecord:
    kind: str
    descriptor: str
    truth: float
    answer: float
    preferred: float
    fallback: bool
    tag: str = ""


def _phi_table(phi, size: int) -> np.ndarray:
    """Tabulate phi over (x, y) and check it stays inside [-1, 1]."""
    if callable(phi):
        table = np.array([[phi(x, 0), phi(x, 1)] for x in range(size)], dtype=float)
    else:
        table = np.asarray(phi, dtype=float)
    if table.shape != (size, 2):
        raise ValueError(f"query table must have shape ({size}, 2), got {table.shape}")
    if not np.isfinite(table).all() or np.abs(table).max(initial=0.0) > 1.0:
        raise ValueError("statistical query must map into [-1, 1]")
    return table


def stat_value(table: np.ndarray, labels: np.ndarray) -> float:
    return float(table[np.arange(labels.size), labels].mean())


@dataclass
class OracleSession:
    """Single point of oracle access to one target.

    ``target`` is a concept (anything with ``truth_table``). Passing a density
    matrix as ``target_state`` replaces the example state for Qstat queries.
    """

    target: object
    tau: float
    adversary: Adversary = field(default_factory=Exact)
    target_state: np.ndarray | None = None
    log: list[QueryRecord] = field(default_factory=list)

    def __post_init__(self):
        if not 0.0 < self.tau <= 1.0:
            raise ValueError(f"tolerance must lie in (0, 1], got {self.tau}")
        self._labels = as_truth_table(self.target) if self.target is not None else None
        self._uses_example_state = self.target_state is None
        if self.target_state is None:
            self.target_state = example_state(self._labels)
        ref = self.adversary.reference
        if ref is None and isinstance(self.adversary, (NullConsistent, WorstCaseShift)):
            if self._labels is None:
                raise ValueError(f"{self.adversary.name} adversary needs a reference concept")
            ref = ZeroConcept(self._labels.size)
        self._ref_labels = None if ref is None else as_truth_table(ref)
        self._ref_state = None if ref is None else example_state(self._ref_labels)

    @property
    def query_count(self) -> int:
        return len(self.log)

    def _answer(self, kind, descriptor, truth, reference_value, tag):
        answer, preferred, fallback = self.adversary.respond(truth, reference_value, self.tau)
        if abs(answer - truth) > self.tau + SOUNDNESS_SLACK:
            raise AssertionError(f"adversary {self.adversary.name} emitted an unsound answer")
        self.log.append(QueryRecord(kind, descriptor, truth, answer, preferred, fallback, tag))
        return answer

    def stat_query(self, phi: Callable | np.ndarray, tag: str = "", descriptor: str = "phi") -> float:
        if self._labels is None:
            raise ValueError("stat queries need a concept target")
        table = _phi_table(phi, self._labels.size)
        truth = stat_value(table, self._labels)
        ref = None if self._ref_labels is None else stat_value(table, self._ref_labels)
        return self._answer("stat", descriptor, truth, ref, tag)

    def qstat_query(self, O: Observable, tag: str = "") -> float:
        if not isinstance(O, Observable):
            raise TypeError("qstat queries take an Observable (norm <= 1 is checked on construction)")
        if O.dim != self.target_state.shape[0]:
            raise ValueError(f"dimension mismatch: observable {O.dim}, state {self.target_state.shape[0]}")
        if O.is_diagonal() and self._labels is not None and self._uses_example_state:
            # same summation as stat_query, so diagonal queries agree bit for bit
            diag = O.matrix.diagonal().real.reshape(-1, 2)
            truth = stat_value(diag, self._labels)
            ref = None if self._ref_labels is None else stat_value(diag, self._ref_labels)
        else:
            truth = expectation(O, self.target_state)
            ref = None if self._ref_state is None else expectation(O, self._ref_state)
        return self._answer("qstat", O.label or "observable", truth, ref, tag)

    def fallback_count(self) -> int:
        return sum(r.fallback for r in self.log)

    def log_dicts(self) -> list[dict]:
        return [asdict(r) for r in self.log]

    def log_json(self) -> str:
        return json.dumps(self.log_dicts(), sort_keys=True)


@dataclass
class AuditReport:
    sound: bool
    max_emitted_error: float
    max_preferred_error: float
    preferred_valid: bool
    target_independent: bool
    fallbacks: int
    answers: list[list[float]]

    def to_dict(self) -> dict:
        return asdict(self)


def validity_audit(adversary_factory: Callable[[], Adversary], concepts: Sequence, battery: Sequence,
                   tau: float) -> AuditReport:
    """Run every query of ``battery`` against every concept and check the band.

    Battery entries are Observables (Qstat) or (|X|, 2) tables / callables (Stat).
    ``preferred_valid`` says whether the adversary's preferred answer (e.g. the
    null-consistent value) stayed inside the band everywhere; ``sound`` is about
    what was actually emitted.
    """
    answers = []
    emitted = 0.0
    preferred = 0.0
    fallbacks = 0
    for f in concepts:
        session = OracleSession(f, tau, adversary_factory())
        row = []
        for q in battery:
            if isinstance(q, Observable):
                row.append(session.qstat_query(q))
            else:
                row.append(session.stat_query(q))
        for rec in session.log:
            emitted = max(emitted, abs(rec.answer - rec.truth))
            preferred = max(preferred, abs(rec.preferred - rec.truth))
        fallbacks += session.fallback_count()
        answers.append(row)
    arr = np.array(answers)
    independent = bool((arr == arr[0]).all()) if arr.size else True
    return AuditReport(
        sound=emitted <= tau + SOUNDNESS_SLACK,
        max_emitted_error=emitted,
        max_preferred_error=preferred,
        preferred_valid=preferred <= tau + SOUNDNESS_SLACK,
        target_independent=independent,
        fallbacks=fallbacks,
        answers=arr.tolist(),
    )


def random_diagonal_battery(size: int, count: int, seed) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    return [rng.uniform(-1.0, 1.0, size=(size, 2)) for _ in range(count)]
