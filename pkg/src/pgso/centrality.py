"""Ontology PageRank, concept scores and the concept-centric optimizer."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cost_model import build_candidates, schema_for_selection
from .errors import PgsoError
from .ontology import Concept, Ontology, RelType, Stats, Workload, access_frequency, size_of_concept
from .optimizer import PropertyGraphSchema
from .rules import DEFAULT_THETA1, DEFAULT_THETA2

DAMPING = 0.85
TOLERANCE = 1e-6
MAX_ITER = 100

CHECK_BEFORE_APPLY_NOTE = ("each rule's cost is checked against the remaining budget before it is applied; "
                           "rules that do not fit are skipped and the scan continues")


@dataclass
class CentralityResult:
    scores: dict[str, float]
    iterations: int
    converged: bool
    # scores straight out of the power iteration, before parents lend theirs to children
    base_scores: dict[str, float] = field(default_factory=dict)
    # directed (src, dst) pairs PageRank ran on, reverse edges included
    edges: list[tuple[str, str]] = field(default_factory=list)
    inheritance: list[tuple[str, str]] = field(default_factory=list)


def _union_order(o: Ontology) -> list[str]:
    """Union concepts, outermost first."""
    heads = {r.src for r in o.relationships if r.rel_type is RelType.UNION}
    inner = {r.dst for r in o.relationships if r.rel_type is RelType.UNION}
    order: list[str] = []
    remaining = set(heads)
    while remaining:
        ready = sorted(u for u in remaining
                       if not any(r.rel_type is RelType.UNION and r.dst == u and r.src in remaining
                                  for r in o.relationships))
        order += ready
        remaining -= set(ready)
    assert not (inner - set(o.concept_names))
    return order


def processed_graph(o: Ontology) -> tuple[list[str], list[tuple[str, str]], list[tuple[str, str]]]:
    """Nodes, PageRank edges and (parent, child) inheritance pairs after union rewiring."""
    rels = [(r.src, r.dst, r.rel_type) for r in o.relationships]
    for u in _union_order(o):
        members = [d for s, d, k in rels if k is RelType.UNION and s == u]
        others = [(s, d, k) for s, d, k in rels if k is not RelType.UNION and u in (s, d)]
        for m in members:
            for s, d, k in others:
                rels.append((m if s == u else s, m if d == u else d, k))
        rels = [(s, d, k) for s, d, k in rels if u not in (s, d)]
    removed = set(_union_order(o))
    nodes = [c for c in o.concept_names if c not in removed]
    inheritance = [(s, d) for s, d, k in rels if k is RelType.INHERITANCE and s != d]
    plain = [(s, d) for s, d, k in rels if k is not RelType.INHERITANCE]
    edges = plain + [(d, s) for s, d in plain]
    return nodes, edges, inheritance


def pagerank(nodes: list[str], edges: list[tuple[str, str]], damping: float = DAMPING,
             tol: float = TOLERANCE, max_iter: int = MAX_ITER) -> tuple[np.ndarray, int, bool]:
    """Damped power iteration; parallel edges add weight, dangling mass spreads uniformly."""
    n = len(nodes)
    if n == 0:
        return np.zeros(0), 0, True
    index = {c: i for i, c in enumerate(nodes)}
    m = np.zeros((n, n))
    for s, d in edges:
        m[index[d], index[s]] += 1.0
    out = m.sum(axis=0)
    dangling = out == 0
    m[:, ~dangling] /= out[~dangling]
    x = np.full(n, 1.0 / n)
    for it in range(1, max_iter + 1):
        nxt = damping * (m @ x + x[dangling].sum() / n) + (1.0 - damping) / n
        nxt /= nxt.sum()
        delta = np.abs(nxt - x).sum()
        x = nxt
        if delta < tol:
            return x, it, True
    return x, max_iter, False


def update_pr(scores: dict[str, float], inheritance: list[tuple[str, str]]) -> dict[str, float]:
    """Each concept takes the highest score among itself and all its ancestors."""
    parents: dict[str, list[str]] = {}
    for p, c in inheritance:
        parents.setdefault(c, []).append(p)
    memo: dict[str, float] = {}

    def best(c: str, stack: frozenset[str]) -> float:
        if c in memo:
            return memo[c]
        val = scores.get(c, 0.0)
        for p in parents.get(c, ()):
            if p not in stack:
                val = max(val, best(p, stack | {p}))
        memo[c] = val
        return val

    return {c: best(c, frozenset([c])) for c in scores}


def ontology_pagerank(o: Ontology) -> CentralityResult:
    nodes, edges, inheritance = processed_graph(o)
    x, iterations, converged = pagerank(nodes, edges)
    base = {c: float(v) for c, v in zip(nodes, x)}
    full = {c: base.get(c, 0.0) for c in o.concept_names}
    return CentralityResult(update_pr(full, inheritance), iterations, converged, base, edges, inheritance)


def concept_score(c: Concept, pr: float, w: Workload | None, st: Stats | None) -> float:
    size = size_of_concept(c, st or Stats())
    return pr * access_frequency(c.name, w) / (size if size > 0 else 1)


def concept_order(o: Ontology, w: Workload | None = None, st: Stats | None = None,
                  result: CentralityResult | None = None) -> list[str]:
    result = result or ontology_pagerank(o)
    scored = [(concept_score(c, result.scores.get(c.name, 0.0), w, st), c.name) for c in o.concepts]
    return [name for _, name in sorted(scored, key=lambda t: (-t[0], t[1]))]


def optimize_concept_centric(o: Ontology, budget: float, theta1: float = DEFAULT_THETA1,
                             theta2: float = DEFAULT_THETA2, w: Workload | None = None,
                             st: Stats | None = None, *, allow_union_props: bool = False,
                             shuffle_seed: int | None = None) -> PropertyGraphSchema:
    if budget < 0:
        raise PgsoError("BAD_BUDGET", "budget must be nonnegative")
    cands = build_candidates(o, st, w, theta1, theta2, allow_union_props=allow_union_props)
    by_rel: dict[str, list] = {}
    for c in cands:
        by_rel.setdefault(c.relationship, []).append(c)
    remaining = budget
    selection: set = set()
    for concept in concept_order(o, w, st):
        for rel in o.incident(concept):
            for cand in by_rel.get(rel.name, ()):
                if cand.key in selection:
                    continue
                if cand.cost_bytes <= remaining:
                    selection.add(cand.key)
                    remaining -= cand.cost_bytes
    return schema_for_selection(o, selection, cands, theta1, theta2, algorithm="cc", budget=budget, st=st,
                                shuffle_seed=shuffle_seed, notes=[CHECK_BEFORE_APPLY_NOTE])[1]
