"""Mini property graphs, query templates with traversal counting, DIR vs OPT comparison.

One instance file is loaded twice: once under the direct schema and once
under an optimized schema by replaying the rewrite log at instance level.
Every vertex remembers which original instances it hosts and every edge
record remembers the original instance edge it stands for, so a template
written against the direct schema can be evaluated on either graph and the
results compared binding for binding.
"""
from __future__ import annotations

import csv
import io
import json
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

from .errors import PgsoError
from .ontology import Ontology, RelType, ValueType, _load_json
from .optimizer import PropertyGraphSchema, direct_schema
from .rules import RewriteRecord, property_origins

Origin = tuple[str, str]  # (concept, instance id)

PATTERN_2HOP = "PATTERN_2HOP"
NEIGHBOR_LOOKUP = "NEIGHBOR_LOOKUP"
AGGREGATE_COUNT = "AGGREGATE_COUNT"
TEMPLATE_KINDS = (PATTERN_2HOP, NEIGHBOR_LOOKUP, AGGREGATE_COUNT)


# --------------------------------------------------------------------------- instance data


@dataclass(frozen=True)
class InstanceVertex:
    concept: str
    id: str
    properties: Mapping[str, Any] = field(default_factory=dict)

    @property
    def origin(self) -> Origin:
        return (self.concept, self.id)


@dataclass(frozen=True)
class InstanceEdge:
    rel: str
    src: str
    dst: str


@dataclass
class InstanceData:
    vertices: list[InstanceVertex] = field(default_factory=list)
    edges: list[InstanceEdge] = field(default_factory=list)


def parse_instances(data: bytes | str | Mapping[str, Any]) -> InstanceData:
    raw = _load_json(data)
    try:
        vertices = [InstanceVertex(v["concept"], str(v["id"]), dict(v.get("properties") or {}))
                    for v in raw.get("vertices", [])]
        edges = [InstanceEdge(e["rel"], str(e.get("src", e.get("srcId"))), str(e.get("dst", e.get("dstId"))))
                 for e in raw.get("edges", [])]
    except (KeyError, TypeError, AttributeError) as exc:
        raise PgsoError("CONSTRAINT_VIOLATION", f"malformed instance data: {exc}") from exc
    return InstanceData(vertices, edges)


def instances_to_dict(d: InstanceData) -> dict[str, Any]:
    return {
        "vertices": [{"concept": v.concept, "id": v.id, "properties": dict(v.properties)} for v in d.vertices],
        "edges": [{"rel": e.rel, "src": e.src, "dst": e.dst} for e in d.edges],
    }


def _type_ok(value: Any, vt: ValueType) -> bool:
    if value is None:
        return True
    if vt is ValueType.BOOL:
        return isinstance(value, bool)
    if vt is ValueType.INT:
        return isinstance(value, int) and not isinstance(value, bool)
    if vt is ValueType.DOUBLE:
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    return isinstance(value, str)


def stranded_instances(data: InstanceData, o: Ontology) -> set[Origin]:
    """Instances 1:1-tied to a union concept that reach no union instance over 1:1 edges.

    Merging such a concept with the union concept makes it a union concept
    too, and a union instance has to be one of the members; an unpaired
    instance would have nowhere to live after the union is rewritten.
    """
    rels = {r.name: r for r in o.relationships}
    unions = {r.src for r in o.relationships if r.rel_type is RelType.UNION}
    adj: dict[str, set[str]] = defaultdict(set)
    for r in o.relationships:
        if r.rel_type is RelType.ONE_TO_ONE:
            adj[r.src].add(r.dst)
            adj[r.dst].add(r.src)
    tied: set[str] = set()
    todo = [u for u in unions]
    while todo:
        c = todo.pop()
        for d in adj[c]:
            if d not in tied and d not in unions:
                tied.add(d)
                todo.append(d)
    if not tied:
        return set()
    inst_adj: dict[Origin, set[Origin]] = defaultdict(set)
    for e in data.edges:
        r = rels.get(e.rel)
        if r is not None and r.rel_type is RelType.ONE_TO_ONE:
            a, b = (r.src, e.src), (r.dst, e.dst)
            inst_adj[a].add(b)
            inst_adj[b].add(a)
    out = set()
    for v in data.vertices:
        if v.concept not in tied:
            continue
        seen, todo2 = {v.origin}, [v.origin]
        while todo2:
            x = todo2.pop()
            for y in inst_adj[x] - seen:
                seen.add(y)
                todo2.append(y)
        if not any(x[0] in unions for x in seen):
            out.add(v.origin)
    return out


_IDENTITY_KINDS = (RelType.ONE_TO_ONE, RelType.UNION, RelType.INHERITANCE)


def identity_conflicts(data: InstanceData, o: Ontology) -> list[tuple[Origin, Origin]]:
    """Pairs of same-concept instances joined by 1:1, union or isA links.

    Those links say two instances describe one entity, which can then be
    stored on one vertex; two distinct instances of one concept cannot be
    the same entity.
    """
    rels = {r.name: r for r in o.relationships}
    parent: dict[Origin, Origin] = {v.origin: v.origin for v in data.vertices}

    def find(x: Origin) -> Origin:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in data.edges:
        r = rels.get(e.rel)
        if r is None or r.rel_type not in _IDENTITY_KINDS:
            continue
        a, b = (r.src, e.src), (r.dst, e.dst)
        if a in parent and b in parent:
            parent[find(b)] = find(a)
    first: dict[tuple[Origin, str], Origin] = {}
    out = []
    for v in sorted(data.vertices, key=lambda v: v.origin):
        key = (find(v.origin), v.concept)
        if key in first:
            out.append((first[key], v.origin))
        else:
            first[key] = v.origin
    return out


def validate_instances(data: InstanceData, o: Ontology) -> None:
    """Raise CONSTRAINT_VIOLATION or ORPHAN_EDGE on the first problem found."""
    seen: set[Origin] = set()
    for v in data.vertices:
        if v.concept not in o.concept_names:
            raise PgsoError("CONSTRAINT_VIOLATION", f"unknown concept {v.concept!r}")
        if v.origin in seen:
            raise PgsoError("CONSTRAINT_VIOLATION", f"duplicate id {v.id!r} for {v.concept}")
        seen.add(v.origin)
        declared = {p.name: p.value_type for p in o.concept(v.concept).properties}
        for k, val in v.properties.items():
            if k not in declared:
                raise PgsoError("CONSTRAINT_VIOLATION", f"{v.concept} has no property {k!r}")
            if not _type_ok(val, declared[k]):
                raise PgsoError("CONSTRAINT_VIOLATION", f"{v.concept}.{k} = {val!r} is not {declared[k].value}")
    rels = {r.name: r for r in o.relationships}
    out_count: dict[tuple[str, Origin], int] = defaultdict(int)
    in_count: dict[tuple[str, Origin], int] = defaultdict(int)
    union_links: dict[Origin, int] = defaultdict(int)
    for e in data.edges:
        rel = rels.get(e.rel)
        if rel is None:
            raise PgsoError("CONSTRAINT_VIOLATION", f"unknown relationship {e.rel!r}")
        a, b = (rel.src, e.src), (rel.dst, e.dst)
        for end in (a, b):
            if end not in seen:
                raise PgsoError("ORPHAN_EDGE", f"{e.rel} references missing {end[0]} {end[1]!r}")
        out_count[(e.rel, a)] += 1
        in_count[(e.rel, b)] += 1
        kind = rel.rel_type
        if kind in (RelType.ONE_TO_ONE, RelType.INHERITANCE) and (out_count[(e.rel, a)] > 1 or in_count[(e.rel, b)] > 1):
            raise PgsoError("CONSTRAINT_VIOLATION", f"{e.rel} instances are not injective at {a} -> {b}")
        if kind in (RelType.ONE_TO_MANY, RelType.UNION) and in_count[(e.rel, b)] > 1:
            raise PgsoError("CONSTRAINT_VIOLATION", f"{b} has several incoming {e.rel} edges")
        if kind is RelType.INHERITANCE and a == b:
            raise PgsoError("CONSTRAINT_VIOLATION", f"{a} cannot be its own parent")
        if kind is RelType.UNION:
            union_links[a] += 1
    unions = {r.src for r in o.relationships if r.rel_type is RelType.UNION}
    for v in data.vertices:
        if v.concept in unions and union_links[v.origin] != 1:
            raise PgsoError("CONSTRAINT_VIOLATION",
                            f"union instance {v.origin} must link to exactly one member, has {union_links[v.origin]}")
    conflicts = identity_conflicts(data, o)
    if conflicts:
        raise PgsoError("CONSTRAINT_VIOLATION", f"{conflicts[0][0]} and {conflicts[0][1]} are linked as one entity")
    stranded = stranded_instances(data, o)
    if stranded:
        raise PgsoError("CONSTRAINT_VIOLATION",
                        f"instances {sorted(stranded)[:3]} are 1:1-tied to a union concept but paired with no union instance")


# --------------------------------------------------------------------------- property graph


@dataclass(frozen=True)
class EdgeRecord:
    idx: int          # index of the original instance edge
    label: str
    src: int          # vertex ids
    dst: int
    orig_src: Origin
    orig_dst: Origin


@dataclass
class Vertex:
    vid: int
    type: str
    hosts: tuple[Origin, ...]
    inherits: tuple[Origin, ...] = ()
    props: dict[str, Any] = field(default_factory=dict)


@dataclass
class PropertyGraph:
    schema: PropertyGraphSchema
    ontology: Ontology
    vertices: list[Vertex] = field(default_factory=list)
    records: list[EdgeRecord] = field(default_factory=list)
    host: dict[Origin, int] = field(default_factory=dict)
    values: dict[Origin, Mapping[str, Any]] = field(default_factory=dict)
    # (label, "F"/"B", vertex id, far node type) -> edge records, in insertion order;
    # copies an inheriting vertex holds of its parent's edges are left out, hops
    # follow the original placement
    adjacency: dict[tuple[str, str, int, str], list[EdgeRecord]] = field(default_factory=dict)
    # hash index for rewritten identity hops: (label, "F"/"B", origin) -> [(far origin, edge idx)]
    links: dict[tuple[str, str, Origin], list[tuple[Origin, int]]] = field(default_factory=dict)
    # (near origin, (label, direction), origin, base) -> values, one per original edge
    origin_lists: dict[tuple, list[Any]] = field(default_factory=dict)
    by_concept: dict[str, list[Origin]] = field(default_factory=dict)
    # (concept, property) -> topmost declaring concept, as in the schema's property origins
    norm: dict[tuple[str, str], str] = field(default_factory=dict)
    node_types: dict[str, Any] = field(default_factory=dict)
    # (label, "F"/"B", vertex id) -> records leaving that vertex in that direction
    by_near: dict[tuple[str, str, int], list[EdgeRecord]] = field(default_factory=dict)

    @property
    def edge_count(self) -> int:
        return len(self.records)

    def vertex_of(self, origin: Origin) -> Vertex:
        return self.vertices[self.host[origin]]

    def homes(self, concept: str) -> set[str]:
        return {self.vertices[self.host[x]].type for x in self.by_concept.get(concept, ())}


class _Clusters:
    """Union-find over original instances, each cluster placed at a schema node."""

    def __init__(self, origins: Iterable[Origin]) -> None:
        self.parent: dict[Origin, Origin] = {x: x for x in origins}
        self.where: dict[Origin, str] = {x: x[0] for x in self.parent}

    def find(self, x: Origin) -> Origin:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def at(self, x: Origin) -> str:
        return self.where[self.find(x)]

    def union(self, keep: Origin, other: Origin) -> None:
        a, b = self.find(keep), self.find(other)
        if a != b:
            self.parent[b] = a

    def retype(self, old: str, new: str) -> None:
        for root, node in list(self.where.items()):
            if node == old and self.parent[root] == root:
                self.where[root] = new


def _identity_replay(data: InstanceData, o: Ontology, log: list[RewriteRecord]) -> tuple[_Clusters, list[tuple[Origin, Origin]]]:
    rels = {r.name: r for r in o.relationships}
    clusters = _Clusters(v.origin for v in data.vertices)
    by_label: dict[str, list[tuple[Origin, Origin]]] = defaultdict(list)
    for e in data.edges:
        rel = rels[e.rel]
        by_label[e.rel].append(((rel.src, e.src), (rel.dst, e.dst)))
    pushes: list[tuple[Origin, Origin]] = []
    for rec in log:
        kind = rec.rule_kind
        pairs = [(a, b) for a, b in by_label.get(rec.label, ())
                 if clusters.at(a) == rec.src and clusters.at(b) == rec.dst]
        if kind == "ONE_TO_ONE":
            for a, b in pairs:
                clusters.union(a, b)
            clusters.retype(rec.src, rec.merged_into)
            clusters.retype(rec.dst, rec.merged_into)
        elif kind == "UNION":
            for u, m in pairs:
                clusters.union(m, u)
                clusters.where[clusters.find(m)] = rec.dst
        elif kind == "INHERITANCE_FOLD":
            for p, c in pairs:
                clusters.union(p, c)
                clusters.where[clusters.find(p)] = rec.src
            clusters.retype(rec.dst, rec.src)
        elif kind == "INHERITANCE_PUSH":
            pushes.extend(pairs)
        elif kind == "RENAME":
            tmp = {root: rec.renamed.get(node, node) for root, node in clusters.where.items()}
            clusters.where.update(tmp)
    return clusters, pushes


def load_instances(data: InstanceData, o: Ontology, pgs: PropertyGraphSchema,
                   log: list[RewriteRecord] | None = None) -> PropertyGraph:
    """Materialize ``data`` under ``pgs``; ``log`` defaults to the log carried by ``pgs``."""
    validate_instances(data, o)
    log = pgs.log if log is None else log
    rels = {r.name: r for r in o.relationships}
    clusters, pushes = _identity_replay(data, o, log)
    g = PropertyGraph(pgs, o, norm=property_origins(o), node_types={n.name: n for n in pgs.node_types})
    node_types = g.node_types
    edge_sigs = {(e.name, e.src, e.dst) for e in pgs.edge_types}

    members: dict[Origin, list[Origin]] = defaultdict(list)
    for v in data.vertices:
        members[clusters.find(v.origin)].append(v.origin)
    vid_of_root: dict[Origin, int] = {}
    for root in sorted(members, key=lambda r: min(members[r])):
        node = clusters.where[root]
        if node not in node_types:
            raise PgsoError("CONSTRAINT_VIOLATION", f"instances {sorted(members[root])} land on unknown node {node!r}")
        vid = len(g.vertices)
        vid_of_root[root] = vid
        g.vertices.append(Vertex(vid, node, tuple(sorted(members[root]))))
        for x in members[root]:
            g.host[x] = vid
    for v in data.vertices:
        g.values[v.origin] = v.properties
        g.by_concept.setdefault(v.concept, []).append(v.origin)
    for origins in g.by_concept.values():
        origins.sort()

    # parent-to-child inheritance at instance level, closed transitively
    child_of: dict[int, set[int]] = defaultdict(set)
    for p, c in pushes:
        child_of[g.host[p]].add(g.host[c])
    inheritors: dict[int, set[int]] = {}

    def below(vid: int, stack: frozenset[int]) -> set[int]:
        if vid in inheritors:
            return inheritors[vid]
        out: set[int] = set()
        for c in child_of.get(vid, ()):
            if c not in stack:
                out |= {c} | below(c, stack | {c})
        inheritors[vid] = out
        return out

    inherited: dict[int, set[Origin]] = defaultdict(set)
    for vid in range(len(g.vertices)):
        for c in below(vid, frozenset([vid])):
            inherited[c] |= set(g.vertices[vid].hosts)
    for vid, origins in inherited.items():
        g.vertices[vid].inherits = tuple(sorted(origins - set(g.vertices[vid].hosts)))

    # edge records: each original edge is placed wherever the schema has a matching type
    for idx, e in enumerate(data.edges):
        rel = rels[e.rel]
        a, b = (rel.src, e.src), (rel.dst, e.dst)
        ends_a = [g.host[a]] + sorted(below(g.host[a], frozenset([g.host[a]])))
        ends_b = [g.host[b]] + sorted(below(g.host[b], frozenset([g.host[b]])))
        placed = False
        for va in ends_a:
            for vb in ends_b:
                if (e.rel, g.vertices[va].type, g.vertices[vb].type) in edge_sigs:
                    rec = EdgeRecord(idx, e.rel, va, vb, a, b)
                    g.records.append(rec)
                    if va == g.host[a] and vb == g.host[b]:
                        g.adjacency.setdefault((e.rel, "F", va, g.vertices[vb].type), []).append(rec)
                        g.adjacency.setdefault((e.rel, "B", vb, g.vertices[va].type), []).append(rec)
                        placed = True
                    g.by_near.setdefault((e.rel, "F", va), []).append(rec)
                    g.by_near.setdefault((e.rel, "B", vb), []).append(rec)
        if not placed:
            # the rewrite turned this edge into identity (merge, union, inheritance)
            g.links.setdefault((e.rel, "F", a), []).append((b, idx))
            g.links.setdefault((e.rel, "B", b), []).append((a, idx))

    _materialize(g)
    return g


def _far_value(g: PropertyGraph, vid: int, prefer: Origin, origin: str, base: str) -> Any:
    v = g.vertices[vid]
    for x in (prefer,) + v.hosts + v.inherits:
        if (g.host[x] == vid or x in v.inherits) and g.norm.get((x[0], base)) == origin:
            val = g.values[x].get(base)
            if val is not None:
                return val
    return None


def _materialize(g: PropertyGraph) -> None:
    for v in g.vertices:
        nt = g.node_types[v.type]
        for p in nt.properties:
            if p.via is None:
                val = None
                for x in v.hosts + v.inherits:
                    if g.norm.get((x[0], p.base)) == p.origin and g.values[x].get(p.base) is not None:
                        val = g.values[x][p.base]
                        break
                v.props[p.name] = val
                continue
            label, direction = p.via
            side = "F" if direction == "FORWARD" else "B"
            groups: dict[int, list[EdgeRecord]] = defaultdict(list)
            for r in g.by_near.get((label, side, v.vid), ()):
                groups[r.idx].append(r)
            entries = []
            for idx, recs in groups.items():
                near = recs[0].orig_src if side == "F" else recs[0].orig_dst
                far = recs[0].orig_dst if side == "F" else recs[0].orig_src
                recs = sorted(recs, key=lambda r: (g.host.get(far) != (r.dst if side == "F" else r.src),
                                                   r.dst if side == "F" else r.src))
                val = None
                if g.norm.get((far[0], p.base)) == p.origin:
                    # the far endpoint declares the property itself: its own value, even if null
                    recs = []
                    val = g.values[far].get(p.base)
                for r in recs:
                    val = _far_value(g, r.dst if side == "F" else r.src, far, p.origin, p.base)
                    if val is not None:
                        break
                entries.append((far[1], idx, near, val))
            entries.sort(key=lambda t: (t[0], t[1]))
            v.props[p.name] = [val for _, _, _, val in entries if val is not None]
            for far_id, idx, near, val in entries:
                if g.host[near] != v.vid:
                    continue  # copies held by inheriting vertices
                lst = g.origin_lists.setdefault((near, p.via, p.origin, p.base), [])
                if val is not None:
                    lst.append(val)


def check_conformance(g: PropertyGraph) -> list[str]:
    """Problems with ``g`` against its schema; empty when it conforms."""
    problems = []
    node_types = {n.name: n for n in g.schema.node_types}
    sigs = {(e.name, e.src, e.dst) for e in g.schema.edge_types}
    for v in g.vertices:
        nt = node_types.get(v.type)
        if nt is None:
            problems.append(f"vertex {v.vid} has undeclared type {v.type}")
            continue
        declared = {p.name: p for p in nt.properties}
        if set(v.props) != set(declared):
            problems.append(f"vertex {v.vid} properties {sorted(v.props)} differ from {v.type}")
        for name, val in v.props.items():
            p = declared.get(name)
            if p is None:
                continue
            if p.via is not None:
                if not isinstance(val, list) or not all(_type_ok(x, p.value_type) for x in val):
                    problems.append(f"vertex {v.vid}.{name} is not LIST<{p.value_type.value}>")
            elif not _type_ok(val, p.value_type):
                problems.append(f"vertex {v.vid}.{name} is not {p.value_type.value}")
    for r in g.records:
        if (r.label, g.vertices[r.src].type, g.vertices[r.dst].type) not in sigs:
            problems.append(f"edge {r.label} {r.src}->{r.dst} has no declared type")
    return problems


def load_direct(data: InstanceData, o: Ontology) -> PropertyGraph:
    return load_instances(data, o, direct_schema(o), [])


# --------------------------------------------------------------------------- templates


@dataclass(frozen=True)
class QueryTemplate:
    name: str
    kind: str
    start: str
    rel: str | None = None
    target: str | None = None
    prop: str | None = None
    rel2: str | None = None
    target2: str | None = None


def parse_templates(data: bytes | str | Mapping[str, Any]) -> list[QueryTemplate]:
    raw = _load_json(data)
    items = raw.get("templates", []) if isinstance(raw, Mapping) else raw
    out = []
    for t in items:
        try:
            out.append(QueryTemplate(t["name"], t["kind"], t["start"], t.get("rel"), t.get("target"),
                                     t.get("prop"), t.get("rel2"), t.get("target2")))
        except (KeyError, TypeError) as exc:
            raise PgsoError("UNRESOLVABLE_TEMPLATE", f"malformed template: {exc}") from exc
    return out


def _direction(o: Ontology, near: str, rel: str, far: str | None) -> tuple[str, str]:
    try:
        r = o.relationship(rel)
    except KeyError:
        raise PgsoError("UNRESOLVABLE_TEMPLATE", f"unknown relationship {rel!r}") from None
    if r.src == near and (far is None or r.dst == far):
        return "F", r.dst
    if r.dst == near and (far is None or r.src == far):
        return "B", r.src
    raise PgsoError("UNRESOLVABLE_TEMPLATE", f"{rel} does not connect {near} and {far}")


def resolve(q: QueryTemplate, o: Ontology) -> list[tuple[str, str, str]]:
    """Hops (relationship, 'F'/'B', far concept) of ``q`` against the direct schema."""
    if q.kind not in TEMPLATE_KINDS:
        raise PgsoError("UNRESOLVABLE_TEMPLATE", f"unknown template kind {q.kind!r}")
    if q.start not in o.concept_names:
        raise PgsoError("UNRESOLVABLE_TEMPLATE", f"unknown concept {q.start!r}")
    hops = []
    here = q.start
    for rel, far in ((q.rel, q.target), (q.rel2, q.target2)):
        if rel is None:
            break
        d, far = _direction(o, here, rel, far)
        hops.append((rel, d, far))
        here = far
    need = {PATTERN_2HOP: 2, AGGREGATE_COUNT: 1}.get(q.kind)
    if need is not None and len(hops) != need:
        raise PgsoError("UNRESOLVABLE_TEMPLATE", f"{q.kind} needs {need} hop(s), {q.name} has {len(hops)}")
    if q.kind == NEIGHBOR_LOOKUP and len(hops) > 1:
        raise PgsoError("UNRESOLVABLE_TEMPLATE", f"{q.name}: lookups take at most one hop")
    if q.kind != PATTERN_2HOP:
        owner = hops[-1][2] if hops else q.start
        if q.prop not in o.concept(owner).property_names:
            raise PgsoError("UNRESOLVABLE_TEMPLATE", f"{owner} has no property {q.prop!r}")
    return hops


@dataclass
class QueryResult:
    answer: Any
    traversals: int


class _Counter:
    def __init__(self) -> None:
        self.n = 0


def _hop(g: PropertyGraph, x: Origin, rel: str, side: str, far: str, counter: _Counter) -> list[tuple[Origin, int]]:
    out = list(g.links.get((rel, side, x), ()))
    vid = g.host[x]
    for far_type in sorted(g.homes(far)):
        for r in g.adjacency.get((rel, side, vid, far_type), ()):
            counter.n += 1
            near_o, far_o, far_v = (r.orig_src, r.orig_dst, r.dst) if side == "F" else (r.orig_dst, r.orig_src, r.src)
            if near_o == x and g.host[far_o] == far_v:
                out.append((far_o, r.idx))
    return out


def _sort_pairs(pairs: list[tuple[str, Any]]) -> list[list[Any]]:
    return [list(p) for p in sorted(pairs, key=lambda t: (t[0], json.dumps(t[1], sort_keys=True)))]


def _list_shortcut(g: PropertyGraph, x: Origin, rel: str, side: str, far: str, prop: str) -> list | None:
    """Values of a replicated LIST property answering the hop locally, if the schema has one."""
    origin = g.norm.get((far, prop))
    via = (rel, "FORWARD" if side == "F" else "BACKWARD")
    node = g.node_types[g.vertex_of(x).type]
    if not any(p.via == via and p.origin == origin and p.base == prop for p in node.properties):
        return None
    return g.origin_lists.get((x, via, origin, prop), [])


def run_query(g: PropertyGraph, q: QueryTemplate) -> QueryResult:
    """Evaluate ``q`` left to right; traversals count adjacency records visited."""
    hops = resolve(q, g.ontology)
    counter = _Counter()
    starts = g.by_concept.get(q.start, [])
    if q.kind == PATTERN_2HOP:
        (r1, d1, t1), (r2, d2, t2) = hops
        total = 0
        for s in starts:
            for y, _ in _hop(g, s, r1, d1, t1, counter):
                total += len(_hop(g, y, r2, d2, t2, counter))
        return QueryResult(total, counter.n)
    if not hops:
        pairs = [(s[1], g.values[s].get(q.prop)) for s in starts]
        return QueryResult(_sort_pairs([p for p in pairs if p[1] is not None]), 0)
    rel, side, far = hops[0]
    pairs = []
    counts = []
    for s in starts:
        values = _list_shortcut(g, s, rel, side, far, q.prop)
        if values is None:
            values = [g.values[y].get(q.prop) for y, _ in _hop(g, s, rel, side, far, counter)]
            values = [v for v in values if v is not None]
        pairs += [(s[1], v) for v in values]
        counts.append((s[1], len(values)))
    if q.kind == AGGREGATE_COUNT:
        return QueryResult(_sort_pairs(counts), counter.n)
    return QueryResult(_sort_pairs(pairs), counter.n)


# --------------------------------------------------------------------------- comparison


@dataclass
class BenchRow:
    template: str
    answer_dir: Any
    answer_opt: Any
    trav_dir: int
    trav_opt: int

    @property
    def mismatch(self) -> bool:
        return self.answer_dir != self.answer_opt


@dataclass
class BenchReport:
    rows: list[BenchRow] = field(default_factory=list)

    @property
    def mismatches(self) -> list[str]:
        return [r.template for r in self.rows if r.mismatch]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["template", "answer_dir", "answer_opt", "trav_dir", "trav_opt"])
        for r in self.rows:
            w.writerow([r.template, _compact(r.answer_dir), _compact(r.answer_opt), r.trav_dir, r.trav_opt])
        return buf.getvalue()

    def to_table(self) -> str:
        head = ("template", "trav_dir", "trav_opt", "status")
        body = [(r.template, str(r.trav_dir), str(r.trav_opt), "ANSWER_MISMATCH" if r.mismatch else "ok")
                for r in self.rows]
        widths = [max(len(x) for x in col) for col in zip(head, *body)]
        lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in [head, *body]]
        return "\n".join(lines) + "\n"


def _compact(answer: Any) -> str:
    return json.dumps(answer, separators=(",", ":"), sort_keys=True)


def compare(dir_graph: PropertyGraph, opt_graph: PropertyGraph, templates: Iterable[QueryTemplate]) -> BenchReport:
    report = BenchReport()
    for q in templates:
        a, b = run_query(dir_graph, q), run_query(opt_graph, q)
        report.rows.append(BenchRow(q.name, a.answer, b.answer, a.traversals, b.traversals))
    return report

