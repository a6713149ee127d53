"""Command-line experiment runner; every report is deterministic given its config and seed."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, analysis, learners, verify
from .concepts import LinearParity, ParityConcept, make_disjoint_class, parity_targets
from .oracles import OracleSession, make_adversary, random_diagonal_battery, validity_audit
from .quantum import Observable, example_state, helstrom_observable, sign_observable, tight_variance_observable
from .symmetry import enumerate_orbits, make_action, make_partition_action, orbit_stats

ACTIONS = ("cyclic", "perm", "graphiso", "trivial", "partition")
ADVERSARIES = ("exact", "grid", "null", "worst")
EXIT_OK, EXIT_INVALID, EXIT_VERIFY = 0, 1, 2


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    # argparse exits with 2 by default, which is reserved for verify failures
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return None if np.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def load_partition(path: str):
    blocks = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            blocks.append([int(tok) for tok in line.split()])
    if not blocks:
        raise ValueError(f"partition file {path} has no blocks")
    return make_partition_action(blocks)


def build_action(args):
    if args.action == "partition":
        if not args.partition_file:
            raise ValueError("--action partition needs --partition-file")
        return load_partition(args.partition_file)
    if args.n is None:
        raise ValueError(f"--action {args.action} needs --n")
    return make_action(args.action, args.n)


def _require_seed(args, what: str):
    if args.seed is None:
        raise ValueError(f"{what} is stochastic; pass --seed")


def cmd_orbits(args):
    p = enumerate_orbits(build_action(args))
    result = orbit_stats(p).to_dict()
    rows = [{"orbit": k, "size": int(b.size), "min_element": int(b.min())} for k, b in enumerate(p.blocks)]
    return result, rows


def cmd_pairwise(args):
    mode = args.mode or "exact"
    if mode == "sample":
        _require_seed(args, "sampled pair census")
    r = analysis.pairwise_independence(build_action(args), mode=mode, seed=args.seed,
                                       pairs=args.trials or 2000)
    return r.to_dict(), None


def _observable_for(args, p) -> Observable:
    kind = args.observable
    if kind == "diagonal-sign":
        return sign_observable(p.domain_size)
    if kind == "tight":
        return tight_variance_observable(p)
    if kind == "custom":
        if not args.observable_file:
            raise ValueError("--observable custom needs --observable-file (a .npy matrix)")
        return Observable(np.load(args.observable_file), label="custom")
    raise ValueError(f"unknown observable family {kind!r}")


def cmd_variance(args):
    mode = args.mode or "exact"
    if mode == "montecarlo":
        _require_seed(args, "Monte Carlo variance")
    elif mode != "exact":
        raise ValueError("--mode must be exact or montecarlo for variance")
    p = enumerate_orbits(build_action(args))
    O = _observable_for(args, p)
    report = analysis.variance_of_observable(p, O, mode=mode, seed=args.seed, samples=args.trials or 100_000)
    stats = orbit_stats(p)
    result = {"observable": O.label, "variance": report.to_dict(), "p_norm_sq": stats.p_norm_sq,
              "max_orbit_fraction": stats.max_orbit_fraction}
    if args.observable == "diagonal-sign":
        result["exact_rational"] = str(analysis.sign_variance_exact(p))
    return result, None


def cmd_bounds(args):
    if args.tau is None:
        raise ValueError("bounds needs --tau")
    stats = orbit_stats(enumerate_orbits(build_action(args)))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        report = analysis.lower_bounds(args.tau, stats)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    return report.to_dict(), None


def cmd_learn_parity(args):
    mode = args.mode or "ideal"
    tau = 0.2 if args.tau is None else args.tau
    adversary = args.adversary or "exact"
    if mode == "ideal":
        m = args.m or 3
        targets = [tuple(int(c) for c in args.target)] if args.target else parity_targets(m)
        reports = []
        for s in targets:
            session = OracleSession(LinearParity(s), tau, make_adversary(adversary))
            reports.append(learners.learn_parity_ideal(session, len(s)).to_dict())
        rows = [{"target": "".join(map(str, s)), "recovered": r["recovered"], "queries": r["query_count"],
                 "success": r["success"]} for s, r in zip(targets, reports)]
        result = {"mode": mode, "m": m, "tau": tau, "adversary": adversary, "runs": reports,
                  "successes": sum(bool(r["success"]) for r in reports)}
        return result, rows
    if mode == "composed":
        n = args.n or 2
        if not 1 <= n <= 3:
            raise ValueError("composed mode supports n <= 3")
        targets = [tuple(int(c) for c in args.target)] if args.target else parity_targets(n + 1)
        reports, rows = [], []
        for s in targets:
            session = OracleSession(ParityConcept(n, s), tau, make_adversary(adversary))
            r = learners.learn_parity_composed(session, n).to_dict()
            reports.append(r)
            row = {"target": "".join(map(str, s)), "guess": r["recovered"], "success": r["success"]}
            row.update({f"E{i + 1}": e for i, e in enumerate(r["expectations"])})
            rows.append(row)
        stats = learners.composed_gap_statistics(n)
        result = {"mode": mode, "n": n, "tau": tau, "adversary": adversary, "runs": reports,
                  "gap_statistics": stats, "successes": sum(bool(r["success"]) for r in reports)}
        return result, rows
    raise ValueError("--mode must be ideal or composed for learn-parity")


def _disjoint_setup(args):
    zeta = 0.2 if args.zeta is None else args.zeta
    m = args.m or 4
    return make_disjoint_class(args.domain_size, m, zeta), zeta, m


def cmd_tolerance(args):
    _require_seed(args, "tolerance (target draw and audit battery)")
    cls, zeta, m = _disjoint_setup(args)
    tau = 0.5 if args.tau is None else args.tau
    adversary = args.adversary or "null"
    window = analysis.tolerance_window(zeta)
    rng = np.random.default_rng(args.seed)
    target = int(rng.integers(len(cls)))

    def session(t):
        return OracleSession(cls.member(t), tau, make_adversary(adversary))

    sweep = [learners.learn_disjoint_tournament(session(t), cls) for t in range(len(cls))]
    group = [learners.learn_disjoint_group_test(session(t), cls) for t in range(len(cls))]
    baseline = [learners.learn_disjoint_sq_baseline(session(t), cls) for t in range(len(cls))]
    audit = validity_audit(lambda: make_adversary(adversary), cls.members(),
                           random_diagonal_battery(cls.domain_size, args.trials or 50, args.seed), tau)
    result = {
        "window": window.to_dict(),
        "tau": tau,
        "adversary": adversary,
        "target": target,
        "tournament": sweep[target].to_dict(),
        "tournament_all_targets": {"exact": all(r.success for r in sweep),
                                   "max_queries": max(r.query_count for r in sweep),
                                   "queries": [r.query_count for r in sweep]},
        "group_test": {"success": [bool(r.success) for r in group],
                       "group_queries": [r.details["group_queries"] for r in group],
                       "fallback_queries": [r.details["fallback_queries"] for r in group],
                       "gap_trace": [s["gap"] for s in group[target].details["trace"]]},
        "group_gap_sweep": learners.group_gap_sweep(
            cls.domain_size, [k for k in (2, 4, 8) if k * cls.zeta <= 1], cls.zeta),
        "sq_baseline_accuracy": sum(bool(r.success) for r in baseline) / len(cls),
        "diagonal_audit": {"sound": audit.sound, "target_independent": audit.target_independent,
                           "fallbacks": audit.fallbacks},
    }
    return result, None


def cmd_audit(args):
    _require_seed(args, "audit battery")
    cls, zeta, m = _disjoint_setup(args)
    tau = 0.5 if args.tau is None else args.tau
    adversary = args.adversary or "null"
    battery = random_diagonal_battery(cls.domain_size, args.trials or 50, args.seed)
    diagonal = validity_audit(lambda: make_adversary(adversary), cls.members(), battery, tau)
    psi0 = example_state(cls.zero())
    helstrom = [helstrom_observable(example_state(f), psi0) for f in cls.members()]
    quantum = validity_audit(lambda: make_adversary(adversary), cls.members(), helstrom, tau)
    keep = ("sound", "max_emitted_error", "max_preferred_error", "preferred_valid",
            "target_independent", "fallbacks")
    result = {"adversary": adversary, "tau": tau, "zeta": zeta, "m": m,
              "diagonal_battery": {k: getattr(diagonal, k) for k in keep},
              "helstrom_battery": {k: getattr(quantum, k) for k in keep}}
    return result, None


def cmd_verify(args):
    results = verify.run_all()
    for r in results:
        print(r.line(), file=sys.stderr)
    passed = all(r.passed for r in results)
    return {"passed": passed, "checks": [r.to_dict() for r in results]}, None


COMMANDS = {
    "orbits": cmd_orbits,
    "pairwise": cmd_pairwise,
    "variance": cmd_variance,
    "bounds": cmd_bounds,
    "learn-parity": cmd_learn_parity,
    "tolerance": cmd_tolerance,
    "audit": cmd_audit,
    "verify": cmd_verify,
}


def build_parser() -> Parser:
    common = Parser(add_help=False)
    common.add_argument("--action", choices=ACTIONS, default="cyclic")
    common.add_argument("--n", type=int)
    common.add_argument("--partition-file")
    common.add_argument("--tau", type=float)
    common.add_argument("--zeta", type=float)
    common.add_argument("--m", type=int)
    common.add_argument("--mode")
    common.add_argument("--adversary", choices=ADVERSARIES)
    common.add_argument("--seed", type=int)
    common.add_argument("--trials", type=int)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out")
    common.add_argument("--domain-size", type=int, default=20)
    common.add_argument("--observable", choices=("diagonal-sign", "tight", "custom"), default="diagonal-sign")
    common.add_argument("--observable-file")
    common.add_argument("--target", help="bit string such as 101")

    parser = Parser(prog="symsq", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=Parser)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def _config(args) -> dict:
    skip = {"out", "format", "seed"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def render(args, result, rows) -> str:
    if args.format == "csv":
        if rows is None:
            raise ValueError(f"{args.command} has no tabular form; use --format json")
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return buf.getvalue()
    report = {"config": _config(args), "seed": args.seed, "version": __version__, "result": result}
    return json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n"


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.n is not None and args.n < 1:
            raise ValueError("--n must be positive")
        if args.tau is not None and not 0 < args.tau <= 1:
            raise ValueError("--tau must lie in (0, 1]")
        result, rows = COMMANDS[args.command](args)
        text = render(args, result, rows)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.command == "verify" and not result["passed"]:
        return EXIT_VERIFY
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
