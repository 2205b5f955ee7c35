"""Acceptance suite: one test per criterion, each timed and reported as a PASS/FAIL line."""
from __future__ import annotations

import itertools
import random
import time
from contextlib import contextmanager

import pytest

from naive_oracle import naive_answer
from pgso.bench import compare, load_direct, load_instances, run_query
from pgso.centrality import ontology_pagerank, optimize_concept_centric
from pgso.cost_model import (
    RuleCandidate,
    build_candidates,
    knapsack_fptas,
    nsc_schema,
    optimize_relation_centric,
    schema_for_selection,
)
from pgso.fixtures import med_instances, med_ontology, med_stats, med_templates, med_workload
from pgso.ontology import RelType, Stats
from pgso.optimizer import canonicalize, generate_pgs, optimize_unconstrained
from pgso.synth import fin_scale_ontology, random_instances, random_ontology, random_templates
from test_optimizer import INTERLEAVINGS


@contextmanager
def criterion(capsys, label: str, limit_s: float):
    """Time the body, print one PASS/FAIL line and fail on a broken check or a slow run."""
    start = time.perf_counter()
    failure = None
    try:
        yield
    except AssertionError as exc:
        failure = exc
    elapsed = time.perf_counter() - start
    ok = failure is None and elapsed < limit_s
    detail = f"{elapsed:.2f}s < {limit_s:g}s" if failure is None else str(failure).splitlines()[0]
    with capsys.disabled():
        print(f"\n{'PASS' if ok else 'FAIL'} {label} ({detail})")
    if failure is not None:
        raise failure
    assert elapsed < limit_s, f"{label} took {elapsed:.2f}s"


def _fin_stats(o) -> Stats:
    return Stats({c: 100 + 7 * i for i, c in enumerate(o.concept_names)},
                 {r.name: 50 + 3 * i for i, r in enumerate(o.relationships)})


def _optimum(items, budget) -> float:
    best = 0.0
    for k in range(len(items) + 1):
        for combo in itertools.combinations(items, k):
            if sum(c.cost_bytes for c in combo) <= budget:
                best = max(best, sum(c.benefit for c in combo))
    return best


def _random_items(rng: random.Random) -> list[RuleCandidate]:
    return [RuleCandidate(f"i{i}", RelType.ONE_TO_MANY, "FORWARD", rng.randint(0, 100), rng.randint(0, 500))
            for i in range(rng.randint(1, 15))]


def test_c1_order_independence(capsys):
    with criterion(capsys, "C1 order independence", 30):
        pairs = 0
        for seed in range(120):
            o = random_ontology(random.Random(seed), multiple_inheritance=seed % 2 == 1)
            assert len(o.concepts) <= 12
            forms = {canonicalize(generate_pgs(optimize_unconstrained(o, shuffle_seed=k))) for k in (None, seed, seed + 1000)}
            pairs += 2
            assert len(forms) == 1, f"ontology seed {seed} gave {len(forms)} schemas"
        assert pairs >= 200
        for name, o in INTERLEAVINGS.items():
            forms = {canonicalize(generate_pgs(optimize_unconstrained(o, shuffle_seed=k))) for k in range(30)}
            assert len(forms) == 1, f"interleaving {name} gave {len(forms)} schemas"


def test_c2_full_budget_convergence(capsys):
    with criterion(capsys, "C2 100% budget equals NSC", 5):
        fin = fin_scale_ontology()
        cases = [("MED", med_ontology(), med_stats(), med_workload()), ("FIN", fin, _fin_stats(fin), None)]
        for name, o, st, w in cases:
            nsc = nsc_schema(o, st=st, w=w)
            budget = nsc.budget_report.cost_bytes
            for algo, p in (("cc", optimize_concept_centric(o, budget, w=w, st=st)),
                            ("rc", optimize_relation_centric(o, budget, w=w, st=st))):
                assert canonicalize(p) == canonicalize(nsc), f"{algo} on {name} differs from NSC"


def test_c3_fptas_bound(capsys):
    with criterion(capsys, "C3 FPTAS (1-eps) bound and feasibility", 60):
        rng = random.Random(2024)
        for _ in range(100):
            items = _random_items(rng)
            budget = rng.randint(0, sum(c.cost_bytes for c in items))
            opt = _optimum(items, budget)
            for eps in (0.3, 0.1, 0.01):
                chosen = knapsack_fptas(items, budget, eps)
                assert sum(c.cost_bytes for c in chosen) <= budget
                assert sum(c.benefit for c in chosen) >= (1 - eps) * opt - 1e-9


def test_c4_traversal_reduction(capsys):
    with criterion(capsys, "C4 traversal reduction", 5):
        o, data = med_ontology(), med_instances()
        d, g = load_direct(data, o), load_instances(data, o, nsc_schema(o))
        t = {q.name: (run_query(d, q).traversals, run_query(g, q).traversals) for q in med_templates()}
        dir_, opt = t["food_interaction_summary"]
        assert dir_ > 0 and opt == 0, f"child-to-parent lookup {dir_} -> {opt}"
        assert t["indication_count"][1] == 0, f"1:M aggregation OPT {t['indication_count'][1]}"
        dir_, opt = t["drug_risk_blackbox"]
        assert opt < dir_, f"2-hop through union {dir_} -> {opt}"
        assert t["drug_name"] == (0, 0), f"self lookup {t['drug_name']}"


def _fixtures():
    yield med_ontology(), med_instances(), list(med_templates())
    rng = random.Random(99)
    fin = fin_scale_ontology()
    yield fin, random_instances(rng, fin, 30), random_templates(rng, fin, 10)
    for seed in range(120):
        rng = random.Random(seed)
        o = random_ontology(rng, multiple_inheritance=seed % 2 == 0)
        yield o, random_instances(rng, o, 12), random_templates(rng, o, 6)


def test_c5_answer_equivalence(capsys):
    with criterion(capsys, "C5 answer equivalence DIR = OPT = naive join", 30):
        rng = random.Random(5)
        checked = 0
        for o, data, templates in _fixtures():
            assert len(data.edges) <= 10**4
            cands = build_candidates(o)
            sel = {c.key for c in cands if rng.random() < 0.5}
            schemas = [nsc_schema(o), schema_for_selection(o, sel, cands, 0.66, 0.33, algorithm="rc", budget=0)[1]]
            d = load_direct(data, o)
            for p in schemas:
                report = compare(d, load_instances(data, o, p), templates)
                assert report.mismatches == [], f"mismatch in {report.mismatches}"
            for q in templates:
                assert run_query(d, q).answer == naive_answer(data, o, q)[0], f"oracle disagrees on {q.name}"
                checked += 1
        assert checked > 500


def test_c6_budget_monotonicity(capsys):
    with criterion(capsys, "C6 knapsack budget monotonicity", 10):
        rng = random.Random(6)
        for _ in range(50):
            items = _random_items(rng)
            top = sum(c.cost_bytes for c in items)
            budgets = sorted(rng.randint(0, top) for _ in range(20))
            for eps in (0.3, 0.1, 0.01):
                got = [sum(c.benefit for c in knapsack_fptas(items, b, eps)) for b in budgets]
                assert got == sorted(got)


def test_c7_pagerank_properties(capsys):
    from helpers import make

    with criterion(capsys, "C7 PageRank properties", 5):
        two = ontology_pagerank(make({"A": [], "B": []}, [("r", "A", "B", "1M")])).scores
        assert two["A"] == pytest.approx(0.5, abs=1e-9) and two["B"] == pytest.approx(0.5, abs=1e-9)
        onts = [med_ontology(), fin_scale_ontology()]
        onts += [random_ontology(random.Random(s), multiple_inheritance=True) for s in range(100)]
        for o in onts:
            res = ontology_pagerank(o)
            if res.base_scores:
                assert sum(res.base_scores.values()) == pytest.approx(1.0, abs=1e-9)
            for c, v in res.scores.items():
                assert v >= res.base_scores.get(c, 0.0)


def test_c8_fin_scale_efficiency(capsys):
    with criterion(capsys, "C8 FIN-scale rc and cc under 1 s", 2.5):
        o = fin_scale_ontology()
        assert (len(o.concepts), len(o.relationships)) == (28, 138)
        st = _fin_stats(o)
        budget = nsc_schema(o, st=st).budget_report.cost_bytes // 2
        for name, run in (("cc", lambda: optimize_concept_centric(o, budget, st=st)),
                          ("rc", lambda: optimize_relation_centric(o, budget, st=st))):
            start = time.perf_counter()
            run()
            elapsed = time.perf_counter() - start
            assert elapsed < 1.0, f"{name} took {elapsed:.3f}s"
