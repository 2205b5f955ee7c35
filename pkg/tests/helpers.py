"""Small builders shared by the test modules."""
from __future__ import annotations

from pgso.ontology import Ontology, parse_ontology


def make(concepts: dict[str, list], rels: list[tuple[str, str, str, str]] = (), **kw) -> Ontology:
    """Ontology from ``{concept: [prop | (prop, type)]}`` and ``(name, src, dst, kind)`` tuples.

    Kinds may be abbreviated: 11, 1M, MN, U, ISA.
    """
    short = {"11": "ONE_TO_ONE", "1M": "ONE_TO_MANY", "MN": "MANY_TO_MANY", "U": "UNION", "ISA": "INHERITANCE"}
    doc = {
        "concepts": [
            {"name": c, "properties": [{"name": p, "type": "STRING"} if isinstance(p, str)
                                       else {"name": p[0], "type": p[1]} for p in props]}
            for c, props in concepts.items()
        ],
        "relationships": [{"name": n, "src": s, "dst": d, "type": short.get(k, k)} for n, s, d, k in rels],
    }
    return parse_ontology(doc, **kw)


def props_of(p, node: str) -> set[str]:
    return {q.name for q in p.node(node).properties}


def edge_set(p) -> set[tuple[str, str, str]]:
    return {(e.name, e.src, e.dst) for e in p.edge_types}
