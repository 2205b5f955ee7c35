"""Ontology, statistics and workload inputs.

The on-disk format is a small JSON projection of an OWL-style ontology:
concepts with typed data properties plus typed relationships between them.
Everything here is immutable once parsed.
"""
from __future__ import annotations

import enum
import json
import logging
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

from .errors import OntologyValidationError

log = logging.getLogger(__name__)


class ValueType(str, enum.Enum):
    INT = "INT"
    DOUBLE = "DOUBLE"
    BOOL = "BOOL"
    STRING = "STRING"
    DATE = "DATE"


class Cardinality(str, enum.Enum):
    SCALAR = "SCALAR"
    LIST = "LIST"


class RelType(str, enum.Enum):
    ONE_TO_ONE = "ONE_TO_ONE"
    ONE_TO_MANY = "ONE_TO_MANY"
    MANY_TO_MANY = "MANY_TO_MANY"
    UNION = "UNION"
    INHERITANCE = "INHERITANCE"


# bytes per value; the edge record size is used to put edge copies on the same scale
TYPE_BYTES = {
    ValueType.INT: 8,
    ValueType.DOUBLE: 8,
    ValueType.BOOL: 1,
    ValueType.DATE: 8,
    ValueType.STRING: 32,
}
EDGE_BYTES = 16
DEFAULT_CARDINALITY = 1000
DEFAULT_EDGE_COUNT = 1000


@dataclass(frozen=True)
class DataProperty:
    name: str
    value_type: ValueType
    cardinality: Cardinality = Cardinality.SCALAR
    provenance: str | None = None
    # relationship a LIST property was replicated over; used for list-length sizing
    via: str | None = None


@dataclass(frozen=True)
class Concept:
    name: str
    properties: tuple[DataProperty, ...] = ()

    @property
    def property_names(self) -> frozenset[str]:
        return frozenset(p.name for p in self.properties)


@dataclass(frozen=True)
class Relationship:
    name: str
    src: str
    dst: str
    rel_type: RelType


@dataclass(frozen=True)
class Ontology:
    concepts: tuple[Concept, ...] = ()
    relationships: tuple[Relationship, ...] = ()

    def concept(self, name: str) -> Concept:
        for c in self.concepts:
            if c.name == name:
                return c
        raise KeyError(name)

    def relationship(self, name: str) -> Relationship:
        for r in self.relationships:
            if r.name == name:
                return r
        raise KeyError(name)

    @property
    def concept_names(self) -> list[str]:
        return [c.name for c in self.concepts]

    def incident(self, concept: str) -> list[Relationship]:
        """Relationships touching ``concept``, in declaration order."""
        return [r for r in self.relationships if concept in (r.src, r.dst)]

    def fingerprint(self) -> str:
        import hashlib

        return hashlib.sha256(serialize_ontology(self).encode()).hexdigest()[:16]


# --------------------------------------------------------------------------- parsing


def _load_json(data: bytes | str | Mapping[str, Any]) -> Any:
    if isinstance(data, Mapping):
        return data
    try:
        if isinstance(data, bytes):
            data = data.decode("utf-8")
        return json.loads(data)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise OntologyValidationError([("MALFORMED_JSON", str(exc))]) from exc


def parse_ontology(data: bytes | str | Mapping[str, Any], *, allow_union_props: bool = False) -> Ontology:
    """Parse and validate an ontology document.

    Raises :class:`OntologyValidationError` listing every violation found;
    no partially-validated ontology is ever returned.
    """
    doc = _load_json(data)
    errors: list[tuple[str, str]] = []
    if not isinstance(doc, dict) or not isinstance(doc.get("concepts", []), list) or not isinstance(
        doc.get("relationships", []), list
    ):
        raise OntologyValidationError([("MALFORMED_JSON", "expected an object with concept and relationship lists")])

    concepts: list[Concept] = []
    for raw in doc.get("concepts", []):
        if not isinstance(raw, dict) or not isinstance(raw.get("name"), str):
            errors.append(("MALFORMED_JSON", f"bad concept entry {raw!r}"))
            continue
        props = []
        seen: set[str] = set()
        for rp in raw.get("properties", []) or []:
            if not isinstance(rp, dict) or not isinstance(rp.get("name"), str):
                errors.append(("MALFORMED_JSON", f"bad property entry in {raw['name']}: {rp!r}"))
                continue
            try:
                vt = ValueType(rp.get("type", "STRING"))
            except ValueError:
                errors.append(("BAD_VALUE_TYPE", f"{raw['name']}.{rp['name']}: {rp.get('type')!r}"))
                continue
            if rp["name"] in seen:
                errors.append(("DUPLICATE_NAME", f"property {raw['name']}.{rp['name']}"))
                continue
            seen.add(rp["name"])
            props.append(DataProperty(rp["name"], vt))
        concepts.append(Concept(raw["name"], tuple(props)))

    rels: list[Relationship] = []
    for raw in doc.get("relationships", []):
        if not isinstance(raw, dict) or not all(isinstance(raw.get(k), str) for k in ("name", "src", "dst")):
            errors.append(("MALFORMED_JSON", f"bad relationship entry {raw!r}"))
            continue
        try:
            rt = RelType(raw.get("type"))
        except ValueError:
            errors.append(("BAD_REL_TYPE", f"{raw['name']}: {raw.get('type')!r}"))
            continue
        rels.append(Relationship(raw["name"], raw["src"], raw["dst"], rt))

    onto = Ontology(tuple(concepts), tuple(rels))
    errors.extend(validate_ontology(onto, allow_union_props=allow_union_props))
    if errors:
        raise OntologyValidationError(errors)
    return onto


def _find_cycle(nodes: Iterable[str], edges: list[tuple[str, str]]) -> list[str] | None:
    adj: dict[str, list[str]] = {n: [] for n in nodes}
    for s, d in edges:
        adj.setdefault(s, []).append(d)
        adj.setdefault(d, [])
    color = {n: 0 for n in adj}
    stack: list[str] = []

    def visit(n: str) -> list[str] | None:
        color[n] = 1
        stack.append(n)
        for m in adj[n]:
            if color[m] == 1:
                return stack[stack.index(m):] + [m]
            if color[m] == 0:
                found = visit(m)
                if found:
                    return found
        stack.pop()
        color[n] = 2
        return None

    for n in sorted(adj):
        if color[n] == 0:
            found = visit(n)
            if found:
                return found
    return None


def validate_ontology(onto: Ontology, *, allow_union_props: bool = False) -> list[tuple[str, str]]:
    errors: list[tuple[str, str]] = []
    names = [c.name for c in onto.concepts]
    for n in sorted({n for n in names if names.count(n) > 1}):
        errors.append(("DUPLICATE_NAME", f"concept {n}"))
    rnames = [r.name for r in onto.relationships]
    for n in sorted({n for n in rnames if rnames.count(n) > 1}):
        errors.append(("DUPLICATE_NAME", f"relationship {n}"))
    for c in onto.concepts:
        pn = [p.name for p in c.properties]
        for n in sorted({n for n in pn if pn.count(n) > 1}):
            errors.append(("DUPLICATE_NAME", f"property {c.name}.{n}"))
        for p in c.properties:
            if p.cardinality is not Cardinality.SCALAR:
                errors.append(("MALFORMED_JSON", f"input property {c.name}.{p.name} must be scalar"))

    known = set(names)
    for r in onto.relationships:
        for end in (r.src, r.dst):
            if end not in known:
                errors.append(("UNKNOWN_CONCEPT_REF", f"relationship {r.name} references {end}"))

    # 1:1 partners become one schema node, so a cycle through them is a cycle too
    ident = {n: n for n in known}

    def find(n: str) -> str:
        while ident[n] != n:
            ident[n] = ident[ident[n]]
            n = ident[n]
        return n

    for r in onto.relationships:
        if r.rel_type is RelType.ONE_TO_ONE and r.src in known and r.dst in known:
            a, b = sorted((find(r.src), find(r.dst)))
            ident[b] = a
    for kind in (RelType.INHERITANCE, RelType.UNION):
        edges = [(r.src, r.dst) for r in onto.relationships if r.rel_type is kind]
        cycle = _find_cycle(known, edges)
        if cycle:
            errors.append(("CYCLE_DETECTED", f"{kind.value.lower()} cycle: {' -> '.join(cycle)}"))
            continue
        merged = [(find(s), find(d)) for s, d in edges if s in known and d in known and find(s) != find(d)]
        cycle = _find_cycle({find(n) for n in known}, merged)
        if cycle:
            errors.append(("CYCLE_DETECTED", f"{kind.value.lower()} cycle through 1:1 partners: "
                                             f"{' -> '.join(cycle)}"))

    if not allow_union_props:
        by_name = {c.name: c for c in onto.concepts}
        for u in sorted({r.src for r in onto.relationships if r.rel_type is RelType.UNION}):
            if u in by_name and by_name[u].properties:
                errors.append(("UNION_HAS_PROPERTIES", f"union concept {u} declares data properties"))
    return errors


def serialize_ontology(onto: Ontology) -> str:
    doc = {
        "concepts": [
            {"name": c.name, "properties": [{"name": p.name, "type": p.value_type.value} for p in c.properties]}
            for c in onto.concepts
        ],
        "relationships": [
            {"name": r.name, "src": r.src, "dst": r.dst, "type": r.rel_type.value} for r in onto.relationships
        ],
    }
    return json.dumps(doc, indent=2)


# --------------------------------------------------------------------------- statistics


@dataclass(frozen=True)
class Stats:
    concept_cardinality: Mapping[str, int] = field(default_factory=dict)
    relationship_edge_count: Mapping[str, int] = field(default_factory=dict)
    property_avg_bytes: Mapping[str, int] = field(default_factory=dict)

    def cardinality(self, concept: str) -> int:
        if concept in self.concept_cardinality:
            return self.concept_cardinality[concept]
        return DEFAULT_CARDINALITY

    def edge_count(self, rel: str) -> int:
        if rel in self.relationship_edge_count:
            return self.relationship_edge_count[rel]
        return DEFAULT_EDGE_COUNT

    def missing(self, onto: Ontology) -> list[str]:
        """Warnings for every ontology element that falls back to a default."""
        out = [f"no cardinality for concept {c.name}; using {DEFAULT_CARDINALITY}"
               for c in onto.concepts if c.name not in self.concept_cardinality]
        out += [f"no edge count for relationship {r.name}; using {DEFAULT_EDGE_COUNT}"
                for r in onto.relationships if r.name not in self.relationship_edge_count]
        return out


def parse_stats(data: bytes | str | Mapping[str, Any], onto: Ontology | None = None) -> Stats:
    doc = _load_json(data)
    if not isinstance(doc, dict):
        raise OntologyValidationError([("MALFORMED_JSON", "stats must be an object")])
    errors: list[tuple[str, str]] = []
    cards = {k: int(v.get("cardinality", DEFAULT_CARDINALITY)) for k, v in (doc.get("concepts") or {}).items()}
    edges = {k: int(v.get("edgeCount", DEFAULT_EDGE_COUNT)) for k, v in (doc.get("relationships") or {}).items()}
    sizes = {k: int(v["avgBytes"]) for k, v in (doc.get("properties") or {}).items()}
    for k, v in list(cards.items()) + list(edges.items()):
        if v < 0:
            errors.append(("MALFORMED_JSON", f"negative count for {k}"))
    for k, v in sizes.items():
        if v <= 0:
            errors.append(("MALFORMED_JSON", f"avgBytes for {k} must be positive"))
    if onto is not None:
        cn = set(onto.concept_names)
        rn = {r.name for r in onto.relationships}
        errors += [("UNKNOWN_CONCEPT_REF", f"stats concept {k}") for k in cards if k not in cn]
        errors += [("UNKNOWN_CONCEPT_REF", f"stats relationship {k}") for k in edges if k not in rn]
        for key in sizes:
            owner, _, prop = key.partition(".")
            if owner not in cn or prop not in onto.concept(owner).property_names:
                errors.append(("UNKNOWN_CONCEPT_REF", f"stats property {key}"))
    if errors:
        raise OntologyValidationError(errors)
    return Stats(cards, edges, sizes)


def byte_size(concept: str, prop: DataProperty, stats: Stats) -> int:
    """Bytes of one value of ``prop``; honours per-property overrides."""
    key = f"{prop.provenance or concept}.{prop.name.split('.')[-1]}" if prop.cardinality is Cardinality.LIST else f"{concept}.{prop.name}"
    if key in stats.property_avg_bytes:
        return stats.property_avg_bytes[key]
    return TYPE_BYTES[prop.value_type]


def size_of_concept(c: Concept, stats: Stats) -> int:
    """Total bytes of all data property values over every instance of ``c``."""
    n = stats.cardinality(c.name)
    total = 0.0
    for p in c.properties:
        per_value = byte_size(c.name, p, stats)
        if p.cardinality is Cardinality.LIST:
            avg_len = stats.edge_count(p.via) / max(1, n) if p.via else 1.0
            total += n * avg_len * per_value
        else:
            total += n * per_value
    return int(round(total))


# --------------------------------------------------------------------------- workload


@dataclass(frozen=True)
class WorkloadEntry:
    src: str
    rel: str | None = None
    dst_property: str | None = None
    frequency: float = 1.0

    @property
    def dst_owner(self) -> str | None:
        return self.dst_property.split(".", 1)[0] if self.dst_property else None


@dataclass(frozen=True)
class Workload:
    entries: tuple[WorkloadEntry, ...] = ()

    @property
    def uniform(self) -> bool:
        return not self.entries


def parse_workload(data: bytes | str | Mapping[str, Any], onto: Ontology | None = None) -> Workload:
    doc = _load_json(data)
    if not isinstance(doc, dict) or not isinstance(doc.get("entries", []), list):
        raise OntologyValidationError([("MALFORMED_JSON", "workload must be an object with an entries list")])
    entries = []
    errors: list[tuple[str, str]] = []
    for raw in doc["entries"]:
        try:
            e = WorkloadEntry(raw["src"], raw.get("rel"), raw.get("dstProperty"), float(raw.get("frequency", 1)))
        except (KeyError, TypeError, ValueError):
            errors.append(("MALFORMED_JSON", f"bad workload entry {raw!r}"))
            continue
        if e.frequency < 0:
            errors.append(("MALFORMED_JSON", f"negative frequency in {raw!r}"))
        if onto is not None:
            cn = set(onto.concept_names)
            if e.src not in cn:
                errors.append(("UNKNOWN_CONCEPT_REF", f"workload src {e.src}"))
            if e.rel is not None and e.rel not in {r.name for r in onto.relationships}:
                errors.append(("UNKNOWN_CONCEPT_REF", f"workload rel {e.rel}"))
            if e.dst_owner is not None and e.dst_owner not in cn:
                errors.append(("UNKNOWN_CONCEPT_REF", f"workload property {e.dst_property}"))
        entries.append(e)
    if errors:
        raise OntologyValidationError(errors)
    return Workload(tuple(entries))


def access_frequency(target: str | tuple, w: Workload | None) -> float:
    """AF of a concept, or of a path ``(src, rel, dstProperty)``.

    In a path, ``rel`` and ``dstProperty`` may be None (wildcards), and
    ``dstProperty`` may be a bare concept name meaning any of its properties.
    An absent or empty workload is uniform: every target has frequency 1.
    """
    if w is None or w.uniform:
        return 1.0
    if isinstance(target, str):
        return sum(e.frequency for e in w.entries if e.src == target or e.dst_owner == target)
    src, rel, dst_prop = (tuple(target) + (None, None))[:3]
    total = 0.0
    for e in w.entries:
        if e.src != src:
            continue
        if rel is not None and e.rel != rel:
            continue
        if dst_prop is not None:
            if "." in dst_prop:
                if e.dst_property != dst_prop:
                    continue
            elif e.dst_owner != dst_prop:
                continue
        total += e.frequency
    return total
