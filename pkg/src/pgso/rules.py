"""Relationship rewrite rules over a mutable working schema.

A :class:`WorkingSchema` starts as the direct mapping of an ontology (one
node per concept, one edge per relationship). Each rule rewrites the part of
the schema around one edge. The public ``apply_*`` functions are pure: they
copy the schema, mutate the copy and return it. The optimizers use the
in-place ``_apply_*`` variants.

Property identity
    Scalar properties are keyed by ``(origin, base)`` where ``origin`` is the
    topmost inheritance ancestor that declares a property of that name, so a
    name shared along an ``isA`` chain is one property. LIST properties are
    additionally keyed by the edge label and direction they were replicated
    over. Display names are only assigned when the final schema is generated,
    which keeps naming independent of rule order.
"""
from __future__ import annotations

import contextlib
import enum
from dataclasses import dataclass, field, replace
from typing import Iterator

from .errors import PgsoError, RuleNotApplicable
from .ontology import Ontology, RelType, ValueType

DEFAULT_THETA1 = 0.66
DEFAULT_THETA2 = 0.33


class Direction(str, enum.Enum):
    FORWARD = "FORWARD"
    BACKWARD = "BACKWARD"
    BOTH = "BOTH"


def jaccard(a: set | frozenset, b: set | frozenset) -> float:
    """|a ∩ b| / |a ∪ b|, with 0 for two empty sets."""
    union = len(set(a) | set(b))
    if union == 0:
        return 0.0
    return len(set(a) & set(b)) / union


@dataclass(frozen=True, order=True)
class Prop:
    origin: str
    base: str
    value_type: ValueType
    # (edge label, "FORWARD"|"BACKWARD") for replicated LIST properties
    via: tuple[str, str] | None = None

    @property
    def key(self) -> tuple:
        return (self.via or ("", ""), self.origin, self.base)

    @property
    def is_list(self) -> bool:
        return self.via is not None


@dataclass
class SchemaNode:
    name: str
    constituents: frozenset[str]
    props: dict[tuple, Prop] = field(default_factory=dict)
    scalar_props: dict[tuple, Prop] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.scalar_props:
            self.scalar_props = {k: p for k, p in self.props.items() if p.via is None}

    def copy(self) -> "SchemaNode":
        return SchemaNode(self.name, self.constituents, dict(self.props), dict(self.scalar_props))

    def add(self, prop: Prop) -> None:
        self.props[prop.key] = prop
        if prop.via is None:
            self.scalar_props[prop.key] = prop

    def scalars(self) -> list[Prop]:
        return list(self.scalar_props.values())


@dataclass(frozen=True)
class SchemaEdge:
    id: str
    label: str
    src: str
    dst: str
    kind: RelType
    origin_rel: str
    jaccard: float | None = None

    @property
    def signature(self) -> tuple:
        return (self.label, self.src, self.dst, self.kind)


@dataclass
class RewriteRecord:
    rule_kind: str
    relationship: str
    label: str = ""
    src: str = ""
    dst: str = ""
    direction: str | None = None
    merged_into: str | None = None
    nodes_removed: list[str] = field(default_factory=list)
    edges_added: list[str] = field(default_factory=list)
    edges_removed: list[str] = field(default_factory=list)
    properties_copied: list[tuple[str, Prop]] = field(default_factory=list)
    renamed: dict[str, str] = field(default_factory=dict)
    ops: list[tuple] = field(default_factory=list)


def applied_key(kind: RelType, direction: str | None = None) -> str:
    return kind.value if direction is None else f"{kind.value}:{direction}"


class WorkingSchema:
    def __init__(self) -> None:
        self.nodes: dict[str, SchemaNode] = {}
        self.edges: dict[str, SchemaEdge] = {}
        self.incident: dict[str, set[str]] = {}
        self.by_sig: dict[tuple, str] = {}
        # every edge id ever created -> the ontology relationship it stems from
        self.origin_of: dict[str, str] = {}
        self.applied: set[tuple[str, str]] = set()
        # live parent->child property/edge inheritance: (parent, child, label)
        self.links: set[tuple[str, str, str]] = set()
        # union nodes that are also their own member (a 1:1 merge joined them);
        # they hold member data and survive the union rule
        self.self_members: set[str] = set()
        # concept -> {(origin, base)} declared natively; drives provenance display
        self.native: dict[str, frozenset[tuple[str, str]]] = {}
        # fold bookkeeping: node -> units folded into it, and the isA parents
        # of each unit when folding started; used to name fold results
        self.units: dict[str, frozenset[str]] = {}
        self.unit_parents: dict[str, frozenset[str]] = {}
        self.ontology_fingerprint: str = ""
        self.log: list[RewriteRecord] = []
        self._rec: RewriteRecord | None = None
        # change tracking so refresh only revisits sources that changed
        self._tick = 0
        self._touched: dict[str, int] = {}
        self._seen: dict[tuple, int] = {}

    def _touch(self, *nodes: str) -> None:
        self._tick += 1
        for n in nodes:
            self._touched[n] = self._tick

    def _stale(self, key: tuple, source: str) -> bool:
        """True if ``source`` changed since ``key`` was last propagated."""
        if self._seen.get(key, -1) >= self._touched.get(source, 0):
            return False
        self._seen[key] = self._tick
        return True

    # ------------------------------------------------------------------ construction

    @classmethod
    def from_ontology(cls, onto: Ontology) -> "WorkingSchema":
        s = cls()
        s.ontology_fingerprint = onto.fingerprint()
        origin = property_origins(onto)
        for c in onto.concepts:
            props = {}
            for p in c.properties:
                prop = Prop(origin[(c.name, p.name)], p.name, p.value_type)
                props[prop.key] = prop
            s.native[c.name] = frozenset((pr.origin, pr.base) for pr in props.values())
            s._add_node(c.name, frozenset([c.name]), props)
        for r in onto.relationships:
            js = None
            if r.rel_type is RelType.INHERITANCE:
                js = jaccard(onto.concept(r.src).property_names, onto.concept(r.dst).property_names)
            s._add_edge(SchemaEdge(r.name, r.name, r.src, r.dst, r.rel_type, r.name, js))
        s.snapshot_units()
        return s

    def snapshot_units(self) -> None:
        """Treat every current node as an unfolded unit."""
        self.units = {n: frozenset([n]) for n in self.nodes}
        parents: dict[str, set[str]] = {n: set() for n in self.nodes}
        for e in self.edges.values():
            if e.kind is RelType.INHERITANCE:
                parents[e.dst].add(e.src)
        self.unit_parents = {n: frozenset(p) for n, p in parents.items()}

    def copy(self) -> "WorkingSchema":
        s = WorkingSchema()
        s.nodes = {k: v.copy() for k, v in self.nodes.items()}
        s.edges = dict(self.edges)
        s.incident = {k: set(v) for k, v in self.incident.items()}
        s.by_sig = dict(self.by_sig)
        s.origin_of = dict(self.origin_of)
        s.applied = set(self.applied)
        s.links = set(self.links)
        s.self_members = set(self.self_members)
        s.native = self.native
        s.units = dict(self.units)
        s.unit_parents = self.unit_parents
        s.ontology_fingerprint = self.ontology_fingerprint
        s.log = list(self.log)
        s._tick = self._tick
        s._touched = dict(self._touched)
        s._seen = dict(self._seen)
        return s

    # ------------------------------------------------------------------ primitive ops

    @contextlib.contextmanager
    def record(self, rule_kind: str, edge: SchemaEdge, **extra) -> Iterator[RewriteRecord]:
        rec = RewriteRecord(rule_kind, edge.id, edge.label, edge.src, edge.dst, **extra)
        outer, self._rec = self._rec, rec
        try:
            yield rec
        finally:
            self._rec = outer
        self.log.append(rec)

    def _op(self, op: tuple) -> None:
        if self._rec is not None:
            self._rec.ops.append(op)

    def _add_node(self, name: str, constituents: frozenset[str], props: dict[tuple, Prop]) -> None:
        self._op(("add_node", name, tuple(sorted(constituents)), tuple(props.values())))
        self.nodes[name] = SchemaNode(name, constituents, dict(props))
        self.incident.setdefault(name, set())
        self.units.setdefault(name, frozenset([name]))
        self._touch(name)

    def _remove_node(self, name: str) -> None:
        for eid in sorted(self.incident.get(name, ())):
            self._remove_edge(eid)
        self._op(("remove_node", name))
        del self.nodes[name]
        self.incident.pop(name, None)
        self.units.pop(name, None)
        self.self_members.discard(name)
        for link in [ln for ln in self.links if name in ln[:2]]:
            self._remove_link(link)
        if self._rec is not None:
            self._rec.nodes_removed.append(name)

    def _add_prop(self, node: str, prop: Prop) -> bool:
        n = self.nodes[node]
        if prop.key in n.props:
            return False
        self._op(("add_prop", node, prop))
        n.add(prop)
        self._touch(node)
        if self._rec is not None:
            self._rec.properties_copied.append((node, prop))
        return True

    def _add_edge(self, edge: SchemaEdge) -> str | None:
        """Insert ``edge`` unless an equivalent edge exists; returns the id kept.

        An isA or union edge from a node to itself carries no information and
        is dropped; a 1:1 merge of a union concept with its member makes one.
        """
        if edge.signature in self.by_sig:
            return None
        if edge.kind in (RelType.INHERITANCE, RelType.UNION) and edge.src == edge.dst:
            if edge.kind is RelType.UNION:
                self.self_members.add(edge.src)
            return None
        if edge.id in self.edges:
            n = 2
            while f"{edge.id}#{n}" in self.edges:
                n += 1
            edge = replace(edge, id=f"{edge.id}#{n}")
        self._op(("add_edge", edge))
        self.edges[edge.id] = edge
        self.by_sig[edge.signature] = edge.id
        self.origin_of[edge.id] = edge.origin_rel
        self.incident.setdefault(edge.src, set()).add(edge.id)
        self.incident.setdefault(edge.dst, set()).add(edge.id)
        self._touch(edge.src, edge.dst)
        if self._rec is not None:
            self._rec.edges_added.append(edge.id)
        return edge.id

    def _remove_edge(self, eid: str) -> None:
        e = self.edges.pop(eid)
        self._op(("remove_edge", eid))
        del self.by_sig[e.signature]
        self.incident[e.src].discard(eid)
        self.incident[e.dst].discard(eid)
        self._touch(e.src, e.dst)
        if self._rec is not None:
            self._rec.edges_removed.append(eid)

    def _mark(self, kind: str, eid: str) -> None:
        self._op(("mark", kind, eid))
        self.applied.add((kind, eid))

    def _set_units(self, node: str, units: frozenset[str], constituents: frozenset[str] | None = None) -> None:
        constituents = self.nodes[node].constituents if constituents is None else constituents
        self._op(("set_units", node, tuple(sorted(units)), tuple(sorted(constituents))))
        self.units[node] = units
        self.nodes[node].constituents = constituents

    def _rename_node(self, old: str, new: str) -> None:
        node = self.nodes[old]
        self._add_node(new, node.constituents, node.props)
        self._set_units(new, self.units.get(old, frozenset([old])))
        if old in self.self_members:
            self.self_members.add(new)
        for eid in sorted(self.incident[old]):
            self._repoint(eid, old, new)
        for link in sorted(ln for ln in self.links if old in ln[:2]):
            self._remove_link(link)
            self._add_link(tuple(new if x == old else x for x in link[:2]) + (link[2],))
        self._remove_node(old)

    def _add_link(self, link: tuple[str, str, str]) -> None:
        if link[0] == link[1] or link in self.links:
            return
        self._op(("add_link", link))
        self.links.add(link)

    def _remove_link(self, link: tuple[str, str, str]) -> None:
        self._op(("remove_link", link))
        self.links.discard(link)

    def _repoint(self, eid: str, old: str | set[str], new: str) -> None:
        """Move an edge endpoint, keeping its id (and applied state) unless it collapses into a duplicate."""
        olds = {old} if isinstance(old, str) else old
        e = self.edges[eid]
        moved = replace(e, src=new if e.src in olds else e.src, dst=new if e.dst in olds else e.dst)
        self._remove_edge(eid)
        self._add_edge(moved)

    def _copy_edge(self, e: SchemaEdge, old: str, new: str) -> bool:
        """Give ``new`` a copy of ``e`` in place of ``old``.

        A self-loop on ``old`` yields every variant (new->old, old->new,
        new->new), so the result is the same whichever side is copied first.
        """
        if e.src == old and e.dst == old:
            ends = [(new, old), (old, new), (new, new)]
        else:
            ends = [(new if e.src == old else e.src, new if e.dst == old else e.dst)]
        added = False
        for src, dst in ends:
            if (e.label, src, dst, e.kind) in self.by_sig:
                continue
            copy = SchemaEdge(f"{e.label}@{src}->{dst}", e.label, src, dst, e.kind, e.origin_rel, e.jaccard)
            added |= self._add_edge(copy) is not None
        return added

    # ------------------------------------------------------------------ queries

    def edges_of(self, node: str) -> list[SchemaEdge]:
        return [self.edges[i] for i in self.incident.get(node, ()) if i in self.edges]

    def is_union_concept(self, node: str) -> bool:
        return any(e.kind is RelType.UNION and e.src == node for e in self.edges_of(node))

    def has_incoming_union(self, node: str) -> bool:
        return any(e.kind is RelType.UNION and e.dst == node for e in self.edges_of(node))

    def is_applied(self, kind: str, eid: str) -> bool:
        return (kind, eid) in self.applied

    def structure_key(self) -> tuple:
        nodes = tuple(sorted((n.name, tuple(sorted(n.props))) for n in self.nodes.values()))
        edges = tuple(sorted(self.by_sig))
        return nodes, edges

    # ------------------------------------------------------------------ replay

    @classmethod
    def replay(cls, initial: "WorkingSchema", log: list[RewriteRecord]) -> "WorkingSchema":
        s = initial.copy()
        s.log = []
        for rec in log:
            for op in rec.ops:
                s._replay_op(op)
            s.log.append(rec)
        return s

    def _replay_op(self, op: tuple) -> None:
        kind, *args = op
        if kind == "add_node":
            name, constituents, props = args
            self._add_node(name, frozenset(constituents), {p.key: p for p in props})
        elif kind == "remove_node":
            # incident edges and links were logged as separate ops before this one
            del self.nodes[args[0]]
            self.incident.pop(args[0], None)
            self.units.pop(args[0], None)
        elif kind == "set_units":
            self.units[args[0]] = frozenset(args[1])
            self.nodes[args[0]].constituents = frozenset(args[2])
        elif kind == "add_prop":
            self.nodes[args[0]].add(args[1])
        elif kind == "add_edge":
            self._add_edge(args[0])
        elif kind == "remove_edge":
            self._remove_edge(args[0])
        elif kind == "mark":
            self.applied.add((args[0], args[1]))
        elif kind == "add_link":
            self.links.add(args[0])
        elif kind == "remove_link":
            self.links.discard(args[0])
        else:  # pragma: no cover - corrupted log
            raise ValueError(f"unknown op {kind}")


def property_origins(onto: Ontology) -> dict[tuple[str, str], str]:
    """Map (concept, property) to the root inheritance ancestor declaring that name."""
    parents: dict[str, list[str]] = {c.name: [] for c in onto.concepts}
    for r in onto.relationships:
        if r.rel_type is RelType.INHERITANCE:
            parents[r.dst].append(r.src)
    declared = {c.name: {p.name: p.value_type for p in c.properties} for c in onto.concepts}
    out: dict[tuple[str, str], str] = {}

    # only same-typed declarations are unified; a retyped name stays separate
    def roots(concept: str, prop: str, vt: ValueType, seen: frozenset[str]) -> set[str]:
        found: set[str] = set()
        for p in parents.get(concept, ()):
            if p in seen:
                continue
            found |= roots(p, prop, vt, seen | {p})
        if not found and declared.get(concept, {}).get(prop) is vt:
            found = {concept}
        return found

    for c in onto.concepts:
        for p in c.properties:
            out[(c.name, p.name)] = min(roots(c.name, p.name, p.value_type, frozenset([c.name])))
    return out


# ---------------------------------------------------------------------- rule checks


def _edge(s: WorkingSchema, eid: str, kind: RelType) -> SchemaEdge:
    if eid not in s.edges:
        raise RuleNotApplicable(f"no edge {eid!r} in schema")
    e = s.edges[eid]
    if e.kind is not kind:
        raise RuleNotApplicable(f"{eid} is {e.kind.value}, not {kind.value}")
    return e


def union_enabled(s: WorkingSchema, e: SchemaEdge) -> bool:
    """Unions are rewritten outermost first."""
    return not s.has_incoming_union(e.src)


def touches_union(s: WorkingSchema, node: str) -> bool:
    return any(e.kind is RelType.UNION for e in s.edges_of(node))


def inheritance_enabled(s: WorkingSchema, e: SchemaEdge) -> bool:
    """Inheritance waits until neither endpoint has a pending union edge."""
    return not (touches_union(s, e.src) or touches_union(s, e.dst))


# ---------------------------------------------------------------------- in-place rules


def _apply_union(s: WorkingSchema, eid: str) -> None:
    e = _edge(s, eid, RelType.UNION)
    if s.is_applied("UNION", eid):
        raise RuleNotApplicable(f"union rule already applied to {eid}")
    if not union_enabled(s, e):
        raise RuleNotApplicable(f"{e.src} is itself a pending union member")
    union, member = e.src, e.dst
    with s.record("UNION", e):
        for prop in list(s.nodes[union].props.values()):
            s._add_prop(member, prop)
        for other in s.edges_of(union):
            if other.kind is not RelType.UNION:
                s._copy_edge(other, union, member)
        s._remove_edge(eid)
        s._mark("UNION", eid)
        if not s.is_union_concept(union) and union not in s.self_members:
            s._remove_node(union)


def _apply_inheritance(s: WorkingSchema, eid: str, theta1: float, theta2: float) -> str:
    if theta2 > theta1:
        raise PgsoError("THETA_ORDER", f"theta2={theta2} exceeds theta1={theta1}")
    e = _edge(s, eid, RelType.INHERITANCE)
    if s.is_applied("INHERITANCE", eid):
        raise RuleNotApplicable(f"inheritance rule already applied to {eid}")
    if not inheritance_enabled(s, e):
        raise RuleNotApplicable(f"{eid} touches a union edge that is not rewritten yet")
    parent, child = e.src, e.dst
    j = e.jaccard or 0.0
    if parent == child:
        with s.record("INHERITANCE_DROP", e):
            s._remove_edge(eid)
            s._mark("INHERITANCE", eid)
        return "drop"
    if j > theta1:
        with s.record("INHERITANCE_FOLD", e, merged_into=parent):
            for prop in list(s.nodes[child].props.values()):
                s._add_prop(parent, prop)
            s._set_units(parent, s.units.get(parent, frozenset([parent])) | s.units.get(child, frozenset([child])),
                         s.nodes[parent].constituents | s.nodes[child].constituents)
            s._remove_edge(eid)
            for other in sorted(s.incident[child]):
                s._repoint(other, child, parent)
            for link in sorted(ln for ln in s.links if child in ln[:2]):
                s._remove_link(link)
                s._add_link(tuple(parent if x == child else x for x in link[:2]) + (link[2],))
            s._mark("INHERITANCE", eid)
            s._remove_node(child)
        return "fold"
    if j < theta2:
        with s.record("INHERITANCE_PUSH", e):
            s._add_link((parent, child, e.label))
            _push_down(s, parent, child)
            s._remove_edge(eid)
            s._mark("INHERITANCE", eid)
        return "push"
    with s.record("INHERITANCE_KEEP", e):
        s._mark("INHERITANCE", eid)
    return "keep"


def _push_down(s: WorkingSchema, parent: str, child: str) -> bool:
    changed = False
    have = s.nodes[child].props
    for key, prop in list(s.nodes[parent].props.items()):
        if key not in have:
            changed |= s._add_prop(child, prop)
    for other in s.edges_of(parent):
        if other.kind is not RelType.INHERITANCE:
            changed |= s._copy_edge(other, parent, child)
    return changed


def merged_name(s: WorkingSchema, a: str, b: str) -> str:
    name = f"{a}{b}"
    if name in s.nodes:
        name = f"{a}_{b}"
    return name


def _apply_one_to_one(s: WorkingSchema, eid: str) -> str:
    e = _edge(s, eid, RelType.ONE_TO_ONE)
    if s.is_applied("ONE_TO_ONE", eid):
        raise RuleNotApplicable(f"1:1 rule already applied to {eid}")
    if e.src == e.dst:
        raise PgsoError("SELF_MERGE", f"{eid} connects {e.src} to itself")
    a, b = s.nodes[e.src], s.nodes[e.dst]
    name = merged_name(s, a.name, b.name)
    with s.record("ONE_TO_ONE", e, merged_into=name):
        props = dict(a.props)
        for k, p in b.props.items():
            props.setdefault(k, p)
        s._add_node(name, a.constituents | b.constituents, props)
        if {a.name, b.name} & s.self_members:
            s.self_members.add(name)
        s._remove_edge(eid)
        for other in sorted(s.incident[a.name] | s.incident[b.name]):
            s._repoint(other, {a.name, b.name}, name)
        for link in sorted(ln for ln in s.links if {a.name, b.name} & set(ln[:2])):
            s._remove_link(link)
            s._add_link(tuple(name if x in (a.name, b.name) else x for x in link[:2]) + (link[2],))
        s._mark("ONE_TO_ONE", eid)
        s._remove_node(a.name)
        s._remove_node(b.name)
    return name


def _propagate_list(s: WorkingSchema, e: SchemaEdge, direction: str) -> bool:
    src, dst = (e.src, e.dst) if direction == "FORWARD" else (e.dst, e.src)
    changed = False
    via = (e.label, direction)
    have = s.nodes[src].props
    for p in s.nodes[dst].scalar_props.values():
        if (via, p.origin, p.base) not in have:
            changed |= s._add_prop(src, Prop(p.origin, p.base, p.value_type, via))
    return changed


def _apply_one_to_many(s: WorkingSchema, eid: str) -> None:
    e = _edge(s, eid, RelType.ONE_TO_MANY)
    if s.is_applied("ONE_TO_MANY", eid):
        raise RuleNotApplicable(f"1:M rule already applied to {eid}")
    with s.record("ONE_TO_MANY", e, direction="FORWARD"):
        _propagate_list(s, e, "FORWARD")
        s._mark("ONE_TO_MANY", eid)


def _apply_many_to_many(s: WorkingSchema, eid: str, direction: Direction | str = Direction.BOTH) -> None:
    e = _edge(s, eid, RelType.MANY_TO_MANY)
    direction = Direction(direction)
    dirs = ["FORWARD", "BACKWARD"] if direction is Direction.BOTH else [direction.value]
    for d in dirs:
        if s.is_applied(f"MANY_TO_MANY:{d}", eid):
            raise RuleNotApplicable(f"M:N rule already applied to {eid} ({d})")
    for d in dirs:
        with s.record("MANY_TO_MANY", e, direction=d):
            _propagate_list(s, e, d)
            s._mark(f"MANY_TO_MANY:{d}", eid)


def refresh(s: WorkingSchema) -> bool:
    """Re-run the propagating effects of already-applied rules to a fixpoint.

    List replication and parent-to-child inheritance stay in force after they
    fire: when the source of a replicated property later gains properties or
    edges (from another rule), the target picks them up here.
    """
    changed_any = False
    dummy = SchemaEdge("*", "*", "", "", RelType.ONE_TO_MANY, "*")
    with s.record("REFRESH", dummy) as rec:
        changed = True
        while changed:
            changed = False
            for kind, eid in sorted(s.applied):
                if eid not in s.edges or not (kind == "ONE_TO_MANY" or kind.startswith("MANY_TO_MANY:")):
                    continue
                e = s.edges[eid]
                direction = "FORWARD" if kind == "ONE_TO_MANY" else kind.split(":")[1]
                source = e.dst if direction == "FORWARD" else e.src
                if s._stale(("list", kind, eid, e.src, e.dst), source):
                    changed |= _propagate_list(s, e, direction)
            for parent, child, label in sorted(s.links):
                if s._stale(("link", parent, child, label), parent):
                    changed |= _push_down(s, parent, child)
            changed_any |= changed
    if not rec.ops:
        s.log.pop()
    return changed_any


# ---------------------------------------------------------------------- pure API


def apply_union(s: WorkingSchema, r: str) -> WorkingSchema:
    out = s.copy()
    _apply_union(out, r)
    return out


def apply_inheritance(s: WorkingSchema, r: str, theta1: float = DEFAULT_THETA1,
                      theta2: float = DEFAULT_THETA2) -> WorkingSchema:
    out = s.copy()
    _apply_inheritance(out, r, theta1, theta2)
    return out


def apply_one_to_one(s: WorkingSchema, r: str) -> WorkingSchema:
    out = s.copy()
    _apply_one_to_one(out, r)
    return out


def apply_one_to_many(s: WorkingSchema, r: str) -> WorkingSchema:
    out = s.copy()
    _apply_one_to_many(out, r)
    return out


def apply_many_to_many(s: WorkingSchema, r: str, direction: Direction | str = Direction.BOTH) -> WorkingSchema:
    out = s.copy()
    _apply_many_to_many(out, r, direction)
    return out


def fold_name(s: WorkingSchema, node: str) -> str:
    """Deterministic name for a node that absorbed folded children.

    With multiple inheritance the node that survives a chain of folds depends
    on the order they fire; naming the result after its topmost unit (ties
    broken lexicographically) removes that dependence.
    """
    units = s.units.get(node, frozenset([node]))
    if len(units) == 1:
        return node
    roots = [u for u in units if not (s.unit_parents.get(u, frozenset()) & units)]
    return min(roots or units)


def normalize_fold_names(s: WorkingSchema) -> None:
    renames = {n: fold_name(s, n) for n in s.nodes}
    renames = {a: b for a, b in renames.items() if a != b}
    if not renames:
        return
    dummy = SchemaEdge("*", "*", "", "", RelType.INHERITANCE, "*")
    with s.record("RENAME", dummy, renamed=dict(renames)):
        # two passes through temporary names so swaps cannot collide
        for old in sorted(renames):
            s._rename_node(old, f"\0{old}")
        for old in sorted(renames):
            s._rename_node(f"\0{old}", renames[old])
