"""Rule benefit/cost estimates, FPTAS knapsack selection and the relation-centric optimizer."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import PgsoError
from .ontology import EDGE_BYTES, Ontology, RelType, Stats, Workload, access_frequency, byte_size
from .optimizer import BudgetReport, PropertyGraphSchema, Selection, generate_pgs, run_fixpoint
from .rules import DEFAULT_THETA1, DEFAULT_THETA2, WorkingSchema, jaccard

log = logging.getLogger(__name__)

DEFAULT_EPSILON = 0.1
# upper bound on the scaled-profit axis of the knapsack table
MAX_PROFIT_STATES = 300_000


@dataclass(frozen=True)
class RuleCandidate:
    relationship: str
    rule_kind: RelType
    direction: str | None
    benefit: float
    cost_bytes: int

    @property
    def key(self) -> tuple[str, str | None]:
        return (self.relationship, self.direction)

    @property
    def label(self) -> str:
        return self.relationship if self.direction is None else f"{self.relationship}:{self.direction}"


def _rel_bytes(rels, stats: Stats) -> int:
    return sum(stats.edge_count(r.name) for r in rels) * EDGE_BYTES


def _prop_bytes(concept, stats: Stats, count: int) -> int:
    return sum(count * byte_size(concept.name, p, stats) for p in concept.properties)


def benefit_cost(o: Ontology, r: str, direction: str | None = None, st: Stats | None = None,
                 w: Workload | None = None, theta1: float = DEFAULT_THETA1, theta2: float = DEFAULT_THETA2,
                 *, allow_union_props: bool = False) -> RuleCandidate:
    """Benefit and byte cost of rewriting one relationship (one direction for M:N)."""
    st = st or Stats()
    rel = o.relationship(r)
    kind = rel.rel_type
    src, dst = o.concept(rel.src), o.concept(rel.dst)
    if kind is RelType.ONE_TO_ONE:
        raise PgsoError("NOT_A_CANDIDATE", f"{r} is 1:1 and always merged")
    if kind is RelType.UNION:
        members = {x.dst for x in o.relationships if x.rel_type is RelType.UNION and x.src == rel.src}
        neighbours = [x for x in o.incident(rel.src) if x.rel_type is not RelType.UNION
                      and ({x.src, x.dst} - {rel.src}).isdisjoint(members)]
        cost = _rel_bytes(neighbours, st)
        if allow_union_props:
            cost += _prop_bytes(src, st, st.cardinality(rel.dst))
        return RuleCandidate(r, kind, None, access_frequency((rel.src, r, rel.dst), w), cost)
    if kind is RelType.INHERITANCE:
        js = jaccard(src.property_names, dst.property_names)
        if theta2 <= js <= theta1:
            raise PgsoError("NOT_A_CANDIDATE", f"{r} keeps its isA edge (Jaccard {js:.3f})")
        side = dst if js > theta1 else src
        others = [x for x in o.incident(side.name) if x.rel_type is not RelType.INHERITANCE]
        cost = _prop_bytes(side, st, st.cardinality(side.name)) + _rel_bytes(others, st)
        return RuleCandidate(r, kind, None, access_frequency((rel.src, r, rel.dst), w) * js, cost)
    direction = direction or "FORWARD"
    if kind is RelType.ONE_TO_MANY and direction != "FORWARD":
        raise PgsoError("NOT_A_CANDIDATE", f"{r} is 1:M and only has a forward direction")
    near, far = (src, dst) if direction == "FORWARD" else (dst, src)
    benefit = sum(access_frequency((near.name, r, f"{far.name}.{p.name}"), w) for p in far.properties)
    cost = sum(st.edge_count(r) * byte_size(far.name, p, st) for p in far.properties)
    return RuleCandidate(r, kind, direction, benefit, cost)


def build_candidates(o: Ontology, st: Stats | None = None, w: Workload | None = None,
                     theta1: float = DEFAULT_THETA1, theta2: float = DEFAULT_THETA2,
                     *, allow_union_props: bool = False) -> list[RuleCandidate]:
    """Every selectable rule in declaration order; M:N yields FORWARD then BACKWARD."""
    out = []
    for rel in o.relationships:
        if rel.rel_type is RelType.ONE_TO_ONE:
            continue
        directions = ["FORWARD", "BACKWARD"] if rel.rel_type is RelType.MANY_TO_MANY else [None]
        if rel.rel_type is RelType.ONE_TO_MANY:
            directions = ["FORWARD"]
        for d in directions:
            try:
                out.append(benefit_cost(o, rel.name, d, st, w, theta1, theta2, allow_union_props=allow_union_props))
            except PgsoError as exc:
                if exc.code != "NOT_A_CANDIDATE":
                    raise
    return out


# --------------------------------------------------------------------------- knapsack


def _order(items: list[RuleCandidate]) -> list[RuleCandidate]:
    return sorted(items, key=lambda c: (-c.benefit, c.cost_bytes, c.label))


def knapsack_fptas(items: list[RuleCandidate], budget: float, epsilon: float = DEFAULT_EPSILON) -> list[RuleCandidate]:
    """(1 - epsilon)-approximate 0/1 knapsack over rule candidates.

    Profits are scaled by K = epsilon * P0 / n, where P0 is the best single
    benefit among the cheapest candidates. Any budget that admits a
    positive-benefit candidate has optimum >= P0, so one budget-independent
    table serves every budget: the result keeps the (1 - epsilon) guarantee
    and never shrinks as the budget grows. The table then records, for each
    scaled profit, the lightest subset reaching it, and the answer is the
    subset with the largest true benefit whose weight fits.
    """
    if not 0 < epsilon <= 1:
        raise ValueError("epsilon must be in (0, 1]")
    free = [c for c in items if c.cost_bytes == 0]
    paid = _order([c for c in items if c.cost_bytes > 0])
    if sum(c.cost_bytes for c in paid) <= budget:
        return free + paid
    useful = [c for c in paid if c.benefit > 0]
    fits = [c for c in useful if c.cost_bytes <= budget]
    if not fits:
        return free
    cheapest = min(c.cost_bytes for c in useful)
    p0 = max(c.benefit for c in useful if c.cost_bytes <= cheapest)
    n = len(useful)
    k = epsilon * p0 / n
    scaled = [int(math.floor(c.benefit / k)) for c in useful]
    total = sum(scaled)
    if total > MAX_PROFIT_STATES:
        # a coarser, still budget-independent grid keeps the table bounded;
        # the (1 - epsilon) bound can then loosen for budgets near the cheapest item
        k = sum(c.benefit for c in useful) / MAX_PROFIT_STATES
        log.info("knapsack profit grid coarsened to K=%g", k)
        scaled = [int(math.floor(c.benefit / k)) for c in useful]
        total = sum(scaled)

    inf = np.inf
    weight = np.full(total + 1, inf)
    profit = np.zeros(total + 1)
    weight[0] = 0.0
    took = np.zeros((n, total + 1), dtype=bool)
    for i, c in enumerate(useful):
        q = scaled[i]
        if q == 0:
            # below the profit grid: never lowers the weight of any level
            continue
        cand_w = np.full(total + 1, inf)
        cand_p = np.zeros(total + 1)
        cand_w[q:] = weight[:-q] + c.cost_bytes
        cand_p[q:] = profit[:-q] + c.benefit
        better = cand_w < weight
        weight = np.where(better, cand_w, weight)
        profit = np.where(better, cand_p, profit)
        took[i] = better

    ok = np.nonzero(weight <= budget)[0]
    best_q = int(ok[np.argmax(profit[ok])])
    chosen = []
    q = best_q
    for i in range(n - 1, -1, -1):
        if took[i, q]:
            chosen.append(useful[i])
            q -= scaled[i]
    chosen.reverse()
    return free + chosen


def brute_force_knapsack(items: list[RuleCandidate], budget: float) -> float:
    """Exact optimum benefit by subset enumeration (test oracle, small inputs)."""
    best = 0.0
    n = len(items)
    for mask in range(1 << n):
        cost = benefit = 0.0
        for i in range(n):
            if mask >> i & 1:
                cost += items[i].cost_bytes
                benefit += items[i].benefit
        if cost <= budget and benefit > best:
            best = benefit
    return best


# --------------------------------------------------------------------------- budgeted schemas


def schema_for_selection(o: Ontology, selection: Selection | None, candidates: list[RuleCandidate],
                         theta1: float, theta2: float, *, algorithm: str, budget: float | None,
                         st: Stats | None = None, shuffle_seed: int | None = None,
                         notes: list[str] | None = None) -> tuple[WorkingSchema, PropertyGraphSchema]:
    """Run the fixpoint restricted to ``selection`` and report what was applied."""
    s = run_fixpoint(WorkingSchema.from_ontology(o), theta1, theta2, selected=selection, shuffle_seed=shuffle_seed)
    used = candidates if selection is None else [c for c in candidates if c.key in selection]
    report = BudgetReport(
        algorithm=algorithm,
        cost_bytes=int(sum(c.cost_bytes for c in used)),
        benefit_score=float(sum(c.benefit for c in used)),
        applied_rules=sorted(c.label for c in used),
        origin=s.ontology_fingerprint,
        budget_bytes=None if budget is None else int(budget),
        warnings=(st or Stats()).missing(o),
        notes=list(notes or []),
    )
    return s, generate_pgs(s, report)


def applied_candidates(s: WorkingSchema) -> set[tuple[str, str | None]]:
    out = set()
    for kind, eid in s.applied:
        rel = s.origin_of.get(eid, eid)
        if kind == "ONE_TO_MANY":
            out.add((rel, "FORWARD"))
        elif kind.startswith("MANY_TO_MANY:"):
            out.add((rel, kind.split(":")[1]))
        elif kind in ("UNION", "INHERITANCE"):
            out.add((rel, None))
    return out


def nsc_schema(o: Ontology, theta1: float = DEFAULT_THETA1, theta2: float = DEFAULT_THETA2,
               st: Stats | None = None, w: Workload | None = None, *, shuffle_seed: int | None = None,
               allow_union_props: bool = False) -> PropertyGraphSchema:
    """Unconstrained schema with its benefit/cost report filled in."""
    cands = build_candidates(o, st, w, theta1, theta2, allow_union_props=allow_union_props)
    return schema_for_selection(o, None, cands, theta1, theta2, algorithm="nsc", budget=None, st=st,
                                shuffle_seed=shuffle_seed)[1]


def optimize_relation_centric(o: Ontology, budget: float, theta1: float = DEFAULT_THETA1,
                              theta2: float = DEFAULT_THETA2, epsilon: float = DEFAULT_EPSILON,
                              w: Workload | None = None, st: Stats | None = None, *,
                              allow_union_props: bool = False, shuffle_seed: int | None = None) -> PropertyGraphSchema:
    if budget < 0:
        raise PgsoError("BAD_BUDGET", "budget must be nonnegative")
    cands = build_candidates(o, st, w, theta1, theta2, allow_union_props=allow_union_props)
    chosen = knapsack_fptas(cands, budget, epsilon)
    selection = {c.key for c in chosen}
    return schema_for_selection(o, selection, cands, theta1, theta2, algorithm="rc", budget=budget, st=st,
                                shuffle_seed=shuffle_seed)[1]


def benefit_ratio(candidate: PropertyGraphSchema, reference_nsc: PropertyGraphSchema) -> float:
    a, b = candidate.budget_report, reference_nsc.budget_report
    if a.origin and b.origin and a.origin != b.origin:
        raise PgsoError("MISMATCHED_ORIGIN", "schemas derive from different ontologies")
    if b.benefit_score == 0:
        return 1.0 if a.benefit_score == 0 else math.inf
    return a.benefit_score / b.benefit_score
