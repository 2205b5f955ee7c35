"""Unconstrained fixpoint optimization, schema generation and canonical form."""
from __future__ import annotations

import json
import random
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Mapping

from .errors import NonConvergence, PgsoError
from .ontology import Cardinality, Ontology, RelType, ValueType
from .rules import (
    DEFAULT_THETA1,
    DEFAULT_THETA2,
    WorkingSchema,
    _apply_inheritance,
    _apply_many_to_many,
    _apply_one_to_many,
    _apply_one_to_one,
    _apply_union,
    inheritance_enabled,
    normalize_fold_names,
    refresh,
    union_enabled,
)

# candidate key: (relationship name, direction); direction is None for union
# and inheritance, "FORWARD" for 1:M and "FORWARD"/"BACKWARD" for M:N
Selection = set[tuple[str, str | None]]


@dataclass(frozen=True)
class PropertySchema:
    name: str
    value_type: ValueType
    cardinality: Cardinality = Cardinality.SCALAR
    provenance: str | None = None
    origin: str = ""
    base: str = ""
    via: tuple[str, str] | None = None


@dataclass(frozen=True)
class NodeType:
    name: str
    properties: tuple[PropertySchema, ...] = ()

    def prop(self, name: str) -> PropertySchema:
        for p in self.properties:
            if p.name == name:
                return p
        raise KeyError(name)


@dataclass(frozen=True)
class EdgeType:
    name: str
    src: str
    dst: str
    kind: RelType


@dataclass
class BudgetReport:
    algorithm: str = "nsc"
    cost_bytes: int = 0
    benefit_score: float = 0.0
    applied_rules: list[str] = field(default_factory=list)
    origin: str = ""
    budget_bytes: int | None = None
    warnings: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)


@dataclass
class PropertyGraphSchema:
    node_types: tuple[NodeType, ...] = ()
    edge_types: tuple[EdgeType, ...] = ()
    budget_report: BudgetReport = field(default_factory=BudgetReport)
    # rewrite log that produced the schema; not serialized, used by the instance loader
    log: list = field(default_factory=list, compare=False, repr=False)

    def node(self, name: str) -> NodeType:
        for n in self.node_types:
            if n.name == name:
                return n
        raise KeyError(name)

    @property
    def node_names(self) -> list[str]:
        return [n.name for n in self.node_types]

    def edges_named(self, name: str) -> list[EdgeType]:
        return [e for e in self.edge_types if e.name == name]


# --------------------------------------------------------------------------- fixpoint


def _pending(s: WorkingSchema, eid: str, selected: Selection | None, theta1: float, theta2: float) -> list[str | None]:
    """Directions of ``eid`` that still need a rule application."""
    e = s.edges[eid]
    kind = e.kind

    def chosen(direction: str | None) -> bool:
        return selected is None or (e.origin_rel, direction) in selected

    if kind is RelType.ONE_TO_ONE:
        return [None] if not s.is_applied("ONE_TO_ONE", eid) else []
    if kind is RelType.UNION:
        ok = not s.is_applied("UNION", eid) and chosen(None) and union_enabled(s, e)
        return [None] if ok else []
    if kind is RelType.INHERITANCE:
        if s.is_applied("INHERITANCE", eid) or not inheritance_enabled(s, e):
            return []
        in_band = theta2 <= (e.jaccard or 0.0) <= theta1 and e.src != e.dst
        return [None] if in_band or chosen(None) else []
    if kind is RelType.ONE_TO_MANY:
        ok = not s.is_applied("ONE_TO_MANY", eid) and chosen("FORWARD")
        return ["FORWARD"] if ok else []
    return [d for d in ("FORWARD", "BACKWARD")
            if not s.is_applied(f"MANY_TO_MANY:{d}", eid) and chosen(d)]


def _apply(s: WorkingSchema, eid: str, direction: str | None, theta1: float, theta2: float) -> None:
    kind = s.edges[eid].kind
    if kind is RelType.ONE_TO_ONE:
        if s.edges[eid].src == s.edges[eid].dst:
            _drop_self_merge(s, eid)
        else:
            _apply_one_to_one(s, eid)
    elif kind is RelType.UNION:
        _apply_union(s, eid)
    elif kind is RelType.INHERITANCE:
        _apply_inheritance(s, eid, theta1, theta2)
    elif kind is RelType.ONE_TO_MANY:
        _apply_one_to_many(s, eid)
    else:
        _apply_many_to_many(s, eid, direction)


def _drop_self_merge(s: WorkingSchema, eid: str) -> None:
    # an earlier merge already joined both endpoints; nothing left to merge
    e = s.edges[eid]
    with s.record("ONE_TO_ONE_DROP", e):
        s._remove_edge(eid)
        s._mark("ONE_TO_ONE", eid)


def merge_one_to_one(s: WorkingSchema) -> list[str]:
    """Apply every 1:1 relationship in declaration order; returns merged node names."""
    merged = []
    for eid in list(s.edges):
        if eid in s.edges and s.edges[eid].kind is RelType.ONE_TO_ONE and not s.is_applied("ONE_TO_ONE", eid):
            if s.edges[eid].src == s.edges[eid].dst:
                _drop_self_merge(s, eid)
            else:
                merged.append(_apply_one_to_one(s, eid))
    return merged


def run_fixpoint(s: WorkingSchema, theta1: float = DEFAULT_THETA1, theta2: float = DEFAULT_THETA2, *,
                 selected: Selection | None = None, shuffle_seed: int | None = None,
                 max_passes: int | None = None) -> WorkingSchema:
    """Apply rules in place until a full pass leaves the schema unchanged.

    ``selected`` restricts rewriting to the given candidate keys (1:1 merges
    and in-band inheritance are always applied). ``shuffle_seed`` permutes
    the per-pass order of everything except the 1:1 prepass.
    """
    if theta2 > theta1:
        raise PgsoError("THETA_ORDER", f"theta2={theta2} exceeds theta1={theta1}")
    n_rel = len({e.origin_rel for e in s.edges.values()})
    bound = max_passes if max_passes is not None else n_rel + 1
    step_cap = 50 * (n_rel + 1) ** 2 + 1000
    rng = random.Random(shuffle_seed) if shuffle_seed is not None else None
    merge_one_to_one(s)
    s.snapshot_units()
    refresh(s)
    prev = s.structure_key()
    steps = 0
    for _ in range(bound):
        while True:
            work = [(eid, d) for eid in list(s.edges) for d in _pending(s, eid, selected, theta1, theta2)]
            if not work:
                break
            if rng is not None:
                rng.shuffle(work)
            for eid, d in work:
                if eid in s.edges and d in _pending(s, eid, selected, theta1, theta2):
                    _apply(s, eid, d, theta1, theta2)
                    steps += 1
            if steps > step_cap:
                raise NonConvergence(f"more than {step_cap} rule applications")
        refresh(s)
        cur = s.structure_key()
        if cur == prev and not any(_pending(s, eid, selected, theta1, theta2) for eid in s.edges):
            normalize_fold_names(s)
            return s
        prev = cur
    raise NonConvergence(f"schema still changing after {bound} passes")


def optimize_unconstrained(o: Ontology, theta1: float = DEFAULT_THETA1, theta2: float = DEFAULT_THETA2,
                           shuffle_seed: int | None = None) -> WorkingSchema:
    return run_fixpoint(WorkingSchema.from_ontology(o), theta1, theta2, shuffle_seed=shuffle_seed)


# --------------------------------------------------------------------------- schema generation


def _display_names(s: WorkingSchema, node) -> list[PropertySchema]:
    props = sorted(node.props.values(), key=lambda p: p.key)
    scalar_bases = Counter(p.base for p in props if not p.is_list)
    list_names = Counter(f"{p.origin}.{p.base}" for p in props if p.is_list)
    native = set()
    for c in node.constituents:
        native |= s.native.get(c, frozenset())
    out = []
    for p in props:
        if p.is_list:
            name = f"{p.origin}.{p.base}"
            if list_names[name] > 1:
                label, direction = p.via
                name = f"{label}.{name}" if direction == "FORWARD" else f"{label}^.{name}"
            out.append(PropertySchema(name, p.value_type, Cardinality.LIST, p.origin, p.origin, p.base, p.via))
        else:
            name = p.base if scalar_bases[p.base] == 1 else f"{p.origin}.{p.base}"
            prov = None if (p.origin, p.base) in native else p.origin
            out.append(PropertySchema(name, p.value_type, Cardinality.SCALAR, prov, p.origin, p.base))
    taken = Counter(p.name for p in out)
    if any(v > 1 for v in taken.values()):
        # a scalar "Origin.base" can still collide with a list name
        out = [replace(p, name=f"{p.name}[]")
               if p.cardinality is Cardinality.LIST and taken[p.name] > 1 else p for p in out]
    return sorted(out, key=lambda p: p.name)


def generate_pgs(s: WorkingSchema, report: BudgetReport | None = None) -> PropertyGraphSchema:
    nodes = tuple(NodeType(n.name, tuple(_display_names(s, n))) for n in s.nodes.values())
    edges = tuple(EdgeType(e.label, e.src, e.dst, e.kind) for e in s.edges.values())
    if report is None:
        report = BudgetReport(origin=s.ontology_fingerprint,
                              applied_rules=applied_rule_names(s))
    return PropertyGraphSchema(nodes, edges, report, list(s.log))


def applied_rule_names(s: WorkingSchema) -> list[str]:
    return sorted({f"{kind}({eid})" for kind, eid in s.applied})


def direct_schema(o: Ontology) -> PropertyGraphSchema:
    """Baseline schema: one node type per concept, one edge type per relationship."""
    return generate_pgs(WorkingSchema.from_ontology(o))


# --------------------------------------------------------------------------- canonical form and JSON


def _prop_json(p: PropertySchema) -> dict[str, Any]:
    d: dict[str, Any] = {"name": p.name, "type": p.value_type.value, "cardinality": p.cardinality.value,
                         "provenance": p.provenance, "origin": p.origin, "base": p.base}
    d["via"] = list(p.via) if p.via else None
    return d


def pgs_to_dict(p: PropertyGraphSchema, *, include_report: bool = True) -> dict[str, Any]:
    nodes = sorted(p.node_types, key=lambda n: n.name)
    edges = sorted({(e.name, e.src, e.dst, e.kind.value) for e in p.edge_types})
    doc: dict[str, Any] = {
        "nodeTypes": [{"name": n.name, "properties": [_prop_json(q) for q in sorted(n.properties, key=lambda q: q.name)]}
                      for n in nodes],
        "edgeTypes": [{"name": a, "src": b, "dst": c, "kind": d} for a, b, c, d in edges],
    }
    if include_report:
        r = p.budget_report
        doc["budgetReport"] = {
            "algorithm": r.algorithm, "costBytes": r.cost_bytes, "benefitScore": r.benefit_score,
            "appliedRules": list(r.applied_rules), "origin": r.origin, "budgetBytes": r.budget_bytes,
            "warnings": list(r.warnings), "notes": list(r.notes),
        }
    return doc


def pgs_to_json(p: PropertyGraphSchema) -> str:
    return json.dumps(pgs_to_dict(p), indent=2, sort_keys=True)


def pgs_from_json(data: str | bytes | Mapping[str, Any]) -> PropertyGraphSchema:
    doc = json.loads(data) if isinstance(data, (str, bytes)) else data
    nodes = []
    for n in doc.get("nodeTypes", []):
        props = tuple(PropertySchema(q["name"], ValueType(q["type"]), Cardinality(q["cardinality"]), q.get("provenance"),
                                     q.get("origin", ""), q.get("base", ""), tuple(q["via"]) if q.get("via") else None)
                      for q in n.get("properties", []))
        nodes.append(NodeType(n["name"], props))
    edges = tuple(EdgeType(e["name"], e["src"], e["dst"], RelType(e["kind"])) for e in doc.get("edgeTypes", []))
    r = doc.get("budgetReport") or {}
    report = BudgetReport(r.get("algorithm", "nsc"), r.get("costBytes", 0), r.get("benefitScore", 0.0),
                          list(r.get("appliedRules", [])), r.get("origin", ""), r.get("budgetBytes"),
                          list(r.get("warnings", [])), list(r.get("notes", [])))
    return PropertyGraphSchema(tuple(nodes), edges, report)


def canonicalize(p: PropertyGraphSchema) -> bytes:
    """Order-insensitive serialization of the schema structure (report excluded)."""
    return json.dumps(pgs_to_dict(p, include_report=False), sort_keys=True, separators=(",", ":")).encode()


def canonical_set(schemas: Iterable[PropertyGraphSchema]) -> set[bytes]:
    return {canonicalize(p) for p in schemas}
