"""Command line: ``pgso optimize`` and ``pgso bench``."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any

from .bench import compare, load_direct, load_instances, parse_instances, parse_templates, resolve
from .centrality import optimize_concept_centric
from .cost_model import DEFAULT_EPSILON, benefit_ratio, nsc_schema, optimize_relation_centric
from .ddl import emit_ddl
from .errors import PgsoError
from .ontology import Ontology, Stats, Workload, parse_ontology, parse_stats, parse_workload
from .optimizer import PropertyGraphSchema, pgs_to_json
from .rules import DEFAULT_THETA1, DEFAULT_THETA2

log = logging.getLogger("pgso")

EXIT_OK, EXIT_INVALID, EXIT_IO, EXIT_MISMATCH = 0, 1, 2, 3
_LEVELS = {"debug": logging.DEBUG, "info": logging.INFO, "warn": logging.WARNING, "warning": logging.WARNING}


class InputError(Exception):
    """An input file is missing or unreadable."""


def _read(path: str | None) -> str | None:
    if path is None:
        return None
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--ontology", required=True, help="ontology JSON file")
    p.add_argument("--stats", help="data statistics JSON file")
    p.add_argument("--workload", help="workload summary JSON file")
    budget = p.add_mutually_exclusive_group()
    budget.add_argument("--budget-bytes", type=float, help="space budget in bytes")
    budget.add_argument("--budget-frac", type=float, help="space budget as a fraction of the NSC schema's cost")
    p.add_argument("--theta1", type=float, default=DEFAULT_THETA1, help="upper Jaccard threshold (fold above)")
    p.add_argument("--theta2", type=float, default=DEFAULT_THETA2, help="lower Jaccard threshold (push below)")
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON, help="knapsack approximation factor")
    p.add_argument("--algorithm", choices=["nsc", "cc", "rc", "auto"], default="auto")
    p.add_argument("--shuffle-seed", type=int, help="permute the rule order (result is unchanged)")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--allow-union-props", action="store_true", help="accept union concepts with properties")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pgso", description="Property graph schema optimization")
    sub = parser.add_subparsers(dest="command", required=True)
    opt = sub.add_parser("optimize", help="derive an optimized schema")
    _add_common(opt)
    bench = sub.add_parser("bench", help="compare query traversals on DIR and OPT graphs")
    _add_common(bench)
    bench.add_argument("--instances", required=True, help="instance data JSON file")
    bench.add_argument("--templates", required=True, help="query templates JSON file")
    return parser


def _inputs(args) -> tuple[Ontology, Stats | None, Workload | None]:
    onto = parse_ontology(_read(args.ontology), allow_union_props=args.allow_union_props)
    st_text, w_text = _read(args.stats), _read(args.workload)
    st = parse_stats(st_text, onto) if st_text is not None else None
    w = parse_workload(w_text, onto) if w_text is not None else None
    return onto, st, w


def _summary(p: PropertyGraphSchema, nsc: PropertyGraphSchema) -> dict[str, Any]:
    r = p.budget_report
    return {"algorithm": r.algorithm, "benefit": r.benefit_score, "costBytes": r.cost_bytes,
            "benefitRatio": benefit_ratio(p, nsc), "appliedRules": list(r.applied_rules)}


def choose_schema(args, onto: Ontology, st: Stats | None, w: Workload | None) -> tuple[PropertyGraphSchema, dict]:
    """Run the requested algorithm; returns the schema and the report document."""
    if args.theta2 > args.theta1:
        raise PgsoError("THETA_ORDER", f"theta2={args.theta2} exceeds theta1={args.theta1}")
    nsc = nsc_schema(onto, args.theta1, args.theta2, st, w, shuffle_seed=args.shuffle_seed,
                     allow_union_props=args.allow_union_props)
    budget = args.budget_bytes
    if args.budget_frac is not None:
        budget = args.budget_frac * nsc.budget_report.cost_bytes
    if args.algorithm != "nsc" and budget is None:
        raise PgsoError("BUDGET_REQUIRED", f"--algorithm {args.algorithm} needs --budget-bytes or --budget-frac")
    kwargs = dict(allow_union_props=args.allow_union_props, shuffle_seed=args.shuffle_seed)
    runs: dict[str, PropertyGraphSchema] = {}
    if args.algorithm in ("cc", "auto"):
        runs["cc"] = optimize_concept_centric(onto, budget, args.theta1, args.theta2, w, st, **kwargs)
    if args.algorithm in ("rc", "auto"):
        runs["rc"] = optimize_relation_centric(onto, budget, args.theta1, args.theta2, args.epsilon, w, st, **kwargs)
    if args.algorithm == "nsc":
        chosen = nsc
    elif args.algorithm == "auto":
        # higher total benefit wins; a tie goes to rc, whose selection carries the approximation bound
        name = "cc" if runs["cc"].budget_report.benefit_score > runs["rc"].budget_report.benefit_score else "rc"
        chosen = runs[name]
    else:
        chosen = runs[args.algorithm]
    r = chosen.budget_report
    report = {
        "algorithm": r.algorithm,
        "requestedAlgorithm": args.algorithm,
        "budgetBytes": r.budget_bytes,
        "benefit": r.benefit_score,
        "costBytes": r.cost_bytes,
        "benefitRatio": benefit_ratio(chosen, nsc),
        "nsc": {"benefit": nsc.budget_report.benefit_score, "costBytes": nsc.budget_report.cost_bytes},
        "appliedRules": list(r.applied_rules),
        "warnings": list(r.warnings),
        "notes": list(r.notes),
        "origin": r.origin,
        "theta1": args.theta1,
        "theta2": args.theta2,
        "epsilon": args.epsilon,
    }
    if args.algorithm == "auto":
        report["winner"] = r.algorithm
        report["runs"] = {k: _summary(v, nsc) for k, v in sorted(runs.items())}
    return chosen, report


def _write(out: Path, name: str, text: str) -> None:
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text)
    except OSError as exc:
        raise InputError(f"cannot write {out / name}: {exc.strerror or exc}") from exc


def _emit_schema(out: Path, schema: PropertyGraphSchema, report: dict) -> None:
    _write(out, "schema.json", pgs_to_json(schema) + "\n")
    _write(out, "schema.ddl", emit_ddl(schema))
    _write(out, "report.json", json.dumps(report, indent=2, sort_keys=True) + "\n")


def cmd_optimize(args) -> int:
    onto, st, w = _inputs(args)
    schema, report = choose_schema(args, onto, st, w)
    _emit_schema(Path(args.out), schema, report)
    print(f"{report['algorithm']}: benefit {report['benefit']:g}, cost {report['costBytes']} bytes, "
          f"BR {report['benefitRatio']:.4f}")
    return EXIT_OK


def cmd_bench(args) -> int:
    onto, st, w = _inputs(args)
    data = parse_instances(_read(args.instances))
    templates = parse_templates(_read(args.templates))
    for q in templates:
        resolve(q, onto)
    schema, report = choose_schema(args, onto, st, w)
    out = Path(args.out)
    _emit_schema(out, schema, report)
    bench = compare(load_direct(data, onto), load_instances(data, onto, schema), templates)
    _write(out, "bench.csv", bench.to_csv())
    _write(out, "bench.txt", bench.to_table())
    sys.stdout.write(bench.to_table())
    if bench.mismatches:
        log.error("ANSWER_MISMATCH in %s", ", ".join(bench.mismatches))
        return EXIT_MISMATCH
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    level = _LEVELS.get(os.environ.get("PGSO_LOG", "warn").lower(), logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return cmd_optimize(args) if args.command == "optimize" else cmd_bench(args)
    except InputError as exc:
        log.error("%s", exc)
        return EXIT_IO
    except PgsoError as exc:
        log.error("%s", exc)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
