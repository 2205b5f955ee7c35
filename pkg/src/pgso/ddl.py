"""Cypher-flavoured DDL rendering of a property graph schema."""
from __future__ import annotations

import re

from .ontology import Cardinality
from .optimizer import PropertyGraphSchema

_PLAIN = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def _ident(name: str) -> str:
    return name if _PLAIN.match(name) else "`" + name.replace("`", "``") + "`"


def emit_ddl(p: PropertyGraphSchema) -> str:
    """One line per node type, then one per edge type, both sorted."""
    lines = []
    for n in sorted(p.node_types, key=lambda n: n.name):
        props = []
        for q in sorted(n.properties, key=lambda q: q.name):
            vt = q.value_type.value
            props.append(f"{_ident(q.name)}: {f'LIST<{vt}>' if q.cardinality is Cardinality.LIST else vt}")
        body = f" {{{', '.join(props)}}}" if props else ""
        lines.append(f"(:{_ident(n.name)}{body})")
    for name, src, dst, kind in sorted({(e.name, e.src, e.dst, e.kind.value) for e in p.edge_types}):
        lines.append(f"(:{_ident(src)})-[:{_ident(name)}]->(:{_ident(dst)})  // {kind}")
    return "\n".join(lines) + ("\n" if lines else "")
