"""Command-line front end: one subcommand per experiment.

Exit codes: 0 success, 1 domain error (machine-readable JSON on stderr),
2 usage or input-parse error.  Every stochastic subcommand records its seed
in the output, and identical configurations produce byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import fileio
from .checks import SymmetryGroup, check_fair, check_monotone, check_symmetric, check_zero_monotone
from .core import (
    ProductMeasure,
    QaryFunction,
    SimplexSampler,
    ThresholdLabError,
)
from .decomposition import (
    efron_stein,
    influence_report,
    talagrand_report,
    verify_hypercontractivity,
    verify_level_bound,
)
from .families import resolve_oracle, vertex_action_generators
from .social_choice import (
    indeterminacy_experiment,
    majority_relation,
    mcgarvey_profile,
    saari_search,
)
from .threshold import jury_experiment, scan_path, simplex_sweep, threshold_window

REPORT_SCHEMA = "threshold-lab/report/v1"


def worker_count() -> int:
    """Worker cap from THRESHOLD_LAB_THREADS (default 1)."""
    raw = os.environ.get("THRESHOLD_LAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _emit(args, text: str) -> None:
    if args.out:
        fileio.atomic_write(args.out, text)
    else:
        sys.stdout.write(text)


def _emit_json(args, doc: dict) -> None:
    doc.setdefault("schema", REPORT_SCHEMA)
    _emit(args, fileio.dumps(doc))


class UsageError(Exception):
    """Usage error carrying the message for exit code 2."""


def _load_function(args) -> QaryFunction:
    if args.function:
        return fileio.load_function(args.function)
    if args.family:
        params = {
            "q": args.q,
            "n": args.n,
            "tie_break": args.tie_break,
            "arity": args.arity,
            "depth": args.depth,
            "vertices": args.vertices,
            "property_kind": args.property,
            "coord": args.coord,
        }
        params = {k: v for k, v in params.items() if v is not None}
        return resolve_oracle(args.family, params)
    raise UsageError("one of --function/--family is required")


def _load_measure(args, q: int) -> ProductMeasure:
    if args.measure:
        return fileio.load_measure(args.measure)
    if args.atoms:
        atoms = np.array([float(v) for v in args.atoms.split(",")])
        return ProductMeasure(len(atoms), atoms)
    return ProductMeasure.uniform(q)


def _base_measure(args, f: QaryFunction, anchor: int) -> ProductMeasure:
    if args.base:
        return fileio.load_measure(args.base)
    atoms = np.full(f.q, 1.0 / (f.q - 1))
    atoms[anchor] = 0.0
    return ProductMeasure(f.q, atoms)


def _add_function_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--function", help="function JSON file")
    p.add_argument("--family", help="built-in family name")
    p.add_argument("--q", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--tie-break", dest="tie_break", default=None)
    p.add_argument("--arity", type=int)
    p.add_argument("--depth", type=int)
    p.add_argument("--vertices", type=int)
    p.add_argument("--property", dest="property")
    p.add_argument("--coord", type=int)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="output path (atomic write); default stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="threshold-lab",
        description="Sharp-threshold analysis and social-choice experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("family", help="tabulate a built-in family to a function file")
    _add_function_options(p)
    _add_common(p)

    p = sub.add_parser("check", help="structural checks with witnesses")
    _add_function_options(p)
    _add_common(p)
    p.add_argument("--group", help="symmetry group: cyclic | full | graph")

    p = sub.add_parser("decompose", help="export the orthogonal decomposition")
    _add_function_options(p)
    _add_common(p)
    p.add_argument("--measure", help="measure JSON file")
    p.add_argument("--atoms", help="comma-separated atoms")

    p = sub.add_parser("influences", help="influence and difference-norm report")
    _add_function_options(p)
    _add_common(p)
    p.add_argument("--measure")
    p.add_argument("--atoms")

    p = sub.add_parser("verify", help="inequality suites over random corpora")
    _add_common(p)
    p.add_argument("--suite", choices=("hyper", "level", "talagrand"), required=True)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--qmax", type=int, default=4)
    p.add_argument("--nmax", type=int, default=3)

    p = sub.add_parser("scan", help="threshold curve along a simplex path")
    _add_function_options(p)
    _add_common(p)
    p.set_defaults(format="csv")
    p.add_argument("--anchor", type=int, default=0)
    p.add_argument("--base", help="base measure JSON file (zero mass at anchor)")
    p.add_argument("--grid", type=int, default=101)
    p.add_argument("--method", choices=("exact", "mc"), default="exact")
    p.add_argument("--samples", type=int, default=10_000)

    p = sub.add_parser("window", help="scan plus crossing-window location")
    _add_function_options(p)
    _add_common(p)
    p.add_argument("--anchor", type=int, default=0)
    p.add_argument("--base")
    p.add_argument("--grid", type=int, default=101)
    p.add_argument("--method", choices=("exact", "mc"), default="exact")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--eps", type=float, default=0.1)

    p = sub.add_parser("sweep", help="simplex measure of the critical set")
    _add_function_options(p)
    _add_common(p)
    p.add_argument("--anchor", type=int, default=0)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--inner-samples", dest="inner_samples", type=int, default=10_000)

    p = sub.add_parser("jury", help="leader-biased election experiment")
    _add_function_options(p)
    _add_common(p)
    p.add_argument("--measure")
    p.add_argument("--atoms")
    p.add_argument("--leader", type=int, default=0)
    p.add_argument("--samples", type=int, default=10_000)

    p = sub.add_parser("mcgarvey", help="profile realizing a tournament by majority")
    _add_common(p)
    p.add_argument("--tournament", required=True, help="tournament JSON file")

    p = sub.add_parser("saari", help="profile realizing a choice function by plurality")
    _add_common(p)
    p.add_argument("--choice", required=True, help="choice-function JSON file")
    p.add_argument("--budget", type=int, default=10_000)

    p = sub.add_parser("indeterminacy", help="sampled plurality agreement experiment")
    _add_common(p)
    p.add_argument("--choice", required=True)
    p.add_argument("--profile", help="realizing profile JSON (defaults to saari search)")
    p.add_argument("--voters", type=int, default=1000)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--budget", type=int, default=10_000)

    return parser


def _cmd_family(args) -> None:
    f = _load_function(args).tabulate()
    _emit(args, fileio.dumps(fileio.function_to_dict(f)))


def _symmetry_group(args, f: QaryFunction) -> SymmetryGroup | None:
    if not args.group:
        return None
    if args.group == "cyclic":
        return SymmetryGroup.cyclic(f.n)
    if args.group == "full":
        return SymmetryGroup.full_symmetric(f.n)
    if args.group == "graph":
        if not args.vertices:
            raise UsageError("--group graph needs --vertices")
        return SymmetryGroup(f.n, tuple(vertex_action_generators(args.vertices)))
    raise UsageError(f"unknown group {args.group!r}")


def _cmd_check(args) -> None:
    f = _load_function(args).tabulate()
    verdicts = {}
    if f.codomain == "alphabet" and f.out_q == f.q:
        result = check_monotone(f)
        verdicts["monotone"] = {"passed": result.passed, "witness": result.witness}
        result = check_fair(f)
        verdicts["fair"] = {"passed": result.passed, "witness": result.witness}
    if f.is_binary():
        result = check_zero_monotone(f)
        verdicts["zero_monotone"] = {"passed": result.passed, "witness": result.witness}
    group = _symmetry_group(args, f)
    if group is not None:
        result = check_symmetric(f, group)
        verdicts["symmetric"] = {
            "passed": result.passed,
            "witness": result.witness,
            "group_transitive": result.group_transitive,
        }
    if not verdicts:
        raise UsageError("no applicable checks for this function")
    _emit_json(args, {"checks": verdicts})


def _cmd_decompose(args) -> None:
    f = _load_function(args).tabulate().as_real()
    measure = _load_measure(args, f.q)
    _emit(args, fileio.dumps(fileio.decomposition_to_dict(efron_stein(f, measure))))


def _cmd_influences(args) -> None:
    f = _load_function(args).tabulate().as_real()
    measure = _load_measure(args, f.q)
    doc = influence_report(f, measure).as_dict()
    doc["talagrand"] = talagrand_report(f, measure).as_dict()
    _emit_json(args, doc)


def _verify_one(suite: str, seed_entry: tuple) -> dict:
    q, n, seed = seed_entry
    rng = np.random.default_rng(seed)
    atoms = rng.dirichlet(np.ones(q))
    while atoms.min() < 1e-3:
        atoms = rng.dirichlet(np.ones(q))
    measure = ProductMeasure(q, atoms)
    table = rng.standard_normal(q**n)
    g = QaryFunction.from_table(q, n, table, codomain="real")
    if suite == "hyper":
        rep = verify_hypercontractivity(g, measure)
        return {"ok": rep.ok, "margin": rep.rhs - rep.lhs}
    if suite == "level":
        from .core import product_weights

        mean = float(product_weights(measure, n) @ table)
        centered = QaryFunction.from_table(q, n, table - mean, codomain="real")
        oks = []
        margins = []
        for k in range(1, n + 1):
            rep = verify_level_bound(centered, measure, k)
            oks.append(rep.ok)
            margins.append(rep.rhs - rep.lhs)
        return {"ok": all(oks), "margin": min(margins)}
    rep = talagrand_report(g, measure)
    return {"ok": True, "empirical_c": rep.empirical_c}


def _cmd_verify(args) -> None:
    rng = np.random.default_rng(args.seed)
    jobs = []
    for _ in range(args.trials):
        q = int(rng.integers(2, args.qmax + 1))
        n = int(rng.integers(1, args.nmax + 1))
        jobs.append((q, n, int(rng.integers(0, 2**63 - 1))))
    workers = worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda j: _verify_one(args.suite, j), jobs))
    else:
        results = [_verify_one(args.suite, j) for j in jobs]
    violations = sum(1 for r in results if not r.get("ok", True))
    doc = {
        "suite": args.suite,
        "trials": args.trials,
        "violations": violations,
        "seed": args.seed,
        "workers": workers,
    }
    if args.suite in ("hyper", "level"):
        doc["min_margin"] = min(r["margin"] for r in results)
    else:
        cs = [r["empirical_c"] for r in results if r["empirical_c"] is not None]
        doc["empirical_c_max"] = max(cs) if cs else None
    _emit_json(args, doc)


def _cmd_scan(args) -> None:
    f = _load_function(args)
    base = _base_measure(args, f, args.anchor)
    curve = scan_path(
        f, args.anchor, base, grid_size=args.grid, method=args.method,
        samples=args.samples, seed=args.seed,
    )
    if args.format == "csv":
        _emit(args, fileio.curve_to_csv(curve))
    else:
        _emit(args, fileio.dumps(fileio.curve_to_dict(curve)))


def _cmd_window(args) -> None:
    f = _load_function(args)
    base = _base_measure(args, f, args.anchor)
    curve = scan_path(
        f, args.anchor, base, grid_size=args.grid, method=args.method,
        samples=args.samples, seed=args.seed,
    )
    window = threshold_window(curve, args.eps)
    _emit_json(args, window.as_dict())


def _cmd_sweep(args) -> None:
    f = _load_function(args)
    sampler = SimplexSampler(f.q, args.seed)
    report = simplex_sweep(
        f, args.anchor, args.eps, sampler, args.samples,
        inner_samples=args.inner_samples,
    )
    _emit_json(args, report.as_dict())


def _cmd_jury(args) -> None:
    f = _load_function(args)
    measure = _load_measure(args, f.q)
    report = jury_experiment(f, measure, args.leader, args.samples, seed=args.seed)
    _emit_json(args, report.as_dict())


def _cmd_mcgarvey(args) -> None:
    tournament = fileio.load_tournament(args.tournament)
    profile = mcgarvey_profile(tournament)
    doc = fileio.profile_to_dict(profile)
    doc["majority_matches_target"] = bool(
        (majority_relation(profile) == tournament.beats).all()
    )
    _emit(args, fileio.dumps(doc))


def _cmd_saari(args) -> None:
    c0 = fileio.load_choice_function(args.choice)
    profile = saari_search(c0, max_profile_size=args.budget)
    if profile is None:
        _emit_json(args, {"realizable": False, "budget": args.budget, "strict": True})
        return
    doc = fileio.profile_to_dict(profile)
    doc["realizable"] = True
    doc["budget"] = args.budget
    doc["strict"] = True
    doc["total_weight"] = profile.total_weight
    _emit(args, fileio.dumps(doc))


def _cmd_indeterminacy(args) -> None:
    c0 = fileio.load_choice_function(args.choice)
    profile = fileio.load_profile(args.profile) if args.profile else saari_search(
        c0, max_profile_size=args.budget
    )
    report = indeterminacy_experiment(
        c0, args.voters, args.samples, seed=args.seed, profile=profile
    )
    _emit_json(args, report.as_dict())


_COMMANDS = {
    "family": _cmd_family,
    "check": _cmd_check,
    "decompose": _cmd_decompose,
    "influences": _cmd_influences,
    "verify": _cmd_verify,
    "scan": _cmd_scan,
    "window": _cmd_window,
    "sweep": _cmd_sweep,
    "jury": _cmd_jury,
    "mcgarvey": _cmd_mcgarvey,
    "saari": _cmd_saari,
    "indeterminacy": _cmd_indeterminacy,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _COMMANDS[args.command](args)
        return 0
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except (json.JSONDecodeError, OSError) as exc:
        sys.stderr.write(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n"
        )
        return 2
    except ThresholdLabError as exc:
        sys.stderr.write(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n"
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
