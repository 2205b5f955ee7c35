"""Random and fixed-shape ontology generators for tests and benchmarks."""
from __future__ import annotations

import random

from .ontology import Concept, DataProperty, Ontology, Relationship, RelType, ValueType, validate_ontology

_PROP_POOL = ["id", "name", "code", "score", "since", "flag", "label", "amount", "rate", "note"]
_PROP_TYPES = {
    "id": ValueType.INT, "name": ValueType.STRING, "code": ValueType.STRING, "score": ValueType.DOUBLE,
    "since": ValueType.DATE, "flag": ValueType.BOOL, "label": ValueType.STRING, "amount": ValueType.DOUBLE,
    "rate": ValueType.DOUBLE, "note": ValueType.STRING,
}


def _props(rng: random.Random, k: int) -> tuple[DataProperty, ...]:
    names = rng.sample(_PROP_POOL, k)
    return tuple(DataProperty(n, _PROP_TYPES[n]) for n in sorted(names))


def random_ontology(rng: random.Random, max_concepts: int = 12, *, multiple_inheritance: bool = False,
                    nested_unions: bool = True) -> Ontology:
    """A random valid ontology mixing all five relationship types.

    Inheritance forms a forest unless ``multiple_inheritance`` is set. Union
    concepts are property-free; with ``nested_unions`` a union member may
    itself be a union concept.
    """
    n = rng.randint(2, max_concepts)
    names = [f"C{i}" for i in range(n)]
    props = {c: _props(rng, rng.randint(0, 4)) for c in names}
    rels: list[tuple[str, str, RelType]] = []

    union_heads = [c for c in names if rng.random() < 0.2]
    for u in union_heads:
        props[u] = ()
        later = [c for c in names if c > u] if nested_unions else [c for c in names if c > u and c not in union_heads]
        for m in rng.sample(later, min(len(later), rng.randint(1, 3))):
            rels.append((u, m, RelType.UNION))

    has_parent: dict[str, int] = {c: 0 for c in names}
    for i, child in enumerate(names[1:], start=1):
        tries = 2 if multiple_inheritance else 1
        for _ in range(tries):
            if rng.random() < 0.35:
                parent = names[rng.randrange(0, i)]
                if (parent, child, RelType.INHERITANCE) in rels:
                    continue
                if has_parent[child] and not multiple_inheritance:
                    continue
                rels.append((parent, child, RelType.INHERITANCE))
                has_parent[child] += 1
                if rng.random() < 0.5:
                    # make the child resemble the parent so every Jaccard band occurs
                    shared = {p.name: p for p in props[parent] + props[child]}
                    keep = [shared[k] for k in sorted(shared) if rng.random() < 0.8]
                    props[child] = tuple(keep)

    for u in union_heads:
        props[u] = ()

    for _ in range(rng.randint(0, n + 2)):
        a, b = rng.choice(names), rng.choice(names)
        kind = rng.choices([RelType.ONE_TO_MANY, RelType.MANY_TO_MANY, RelType.ONE_TO_ONE], [5, 3, 1])[0]
        if kind is RelType.ONE_TO_ONE and a == b:
            continue
        rels.append((a, b, kind))

    rng.shuffle(rels)

    def build(rels):
        return Ontology(tuple(Concept(c, props[c]) for c in names),
                        tuple(Relationship(f"r{i}", a, b, kind) for i, (a, b, kind) in enumerate(rels)))

    onto = build(rels)
    # drop 1:1 links that close a union or isA cycle once their ends are merged
    while any(code == "CYCLE_DETECTED" for code, _ in validate_ontology(onto)):
        last = max(i for i, r in enumerate(rels) if r[2] is RelType.ONE_TO_ONE)
        rels = rels[:last] + rels[last + 1:]
        onto = build(rels)
    errors = validate_ontology(onto)
    if errors:  # pragma: no cover - generator bug
        raise AssertionError(errors)
    return onto


def fin_scale_ontology(seed: int = 7) -> Ontology:
    """28 concepts and 138 relationships: 4 union, 69 inheritance, 30 1:M, 35 others."""
    from .ontology import Relationship

    rng = random.Random(seed)
    names = [f"Fin{i:02d}" for i in range(28)]
    props = {c: _props(rng, rng.randint(1, 5)) for c in names}
    unions = names[:2]
    for u in unions:
        props[u] = ()
    rels: list[tuple[str, str, RelType]] = []
    rels += [(unions[0], names[5], RelType.UNION), (unions[0], names[6], RelType.UNION),
             (unions[1], names[7], RelType.UNION), (unions[1], names[8], RelType.UNION)]
    pairs = [(names[i], names[j]) for i in range(2, 28) for j in range(i + 1, 28)]
    rng.shuffle(pairs)
    isa = sorted(pairs[:69], key=lambda ab: ab[1])
    rels += [(a, b, RelType.INHERITANCE) for a, b in isa]
    # subclasses mostly extend their parents, as in real class hierarchies
    for child in names[2:]:
        inherited = {p.name for a, b in isa if b == child for p in props[a] if rng.random() < 0.7}
        own = {p.name for p in props[child]} if rng.random() < 0.5 else set(rng.sample(_PROP_POOL, 1))
        props[child] = tuple(DataProperty(n, _PROP_TYPES[n]) for n in sorted(inherited | own))
    others = [(rng.choice(names), rng.choice(names)) for _ in range(65)]
    rels += [(a, b, RelType.ONE_TO_MANY) for a, b in others[:30]]
    for a, b in others[30:]:
        if a != b and rng.random() < 0.15:
            rels.append((a, b, RelType.ONE_TO_ONE))
        else:
            rels.append((a, b, RelType.MANY_TO_MANY))
    rng.shuffle(rels)
    relationships = tuple(Relationship(f"fr{i:03d}", a, b, k) for i, (a, b, k) in enumerate(rels))
    return Ontology(tuple(Concept(c, props[c]) for c in names), relationships)


def _value(rng: random.Random, vt: ValueType):
    if rng.random() < 0.15:
        return None
    if vt is ValueType.INT:
        return rng.randint(0, 9)
    if vt is ValueType.DOUBLE:
        return rng.choice([0.5, 1.25, 2.0, 3.5])
    if vt is ValueType.BOOL:
        return rng.random() < 0.5
    if vt is ValueType.DATE:
        return f"2020-01-{rng.randint(1, 28):02d}"
    return rng.choice(["a", "b", "c", "d", "e"])


def random_instances(rng: random.Random, onto: Ontology, max_per_concept: int = 4):
    """Random instance data that satisfies every constraint the loader validates."""
    from .bench import InstanceData, InstanceEdge, InstanceVertex, identity_conflicts, stranded_instances

    ids: dict[str, list[str]] = {}
    vertices = []
    for c in onto.concepts:
        ids[c.name] = [f"{c.name.lower()}_{i}" for i in range(rng.randint(0, max_per_concept))]
        for i in ids[c.name]:
            vertices.append(InstanceVertex(c.name, i, {p.name: _value(rng, p.value_type) for p in c.properties
                                                       if rng.random() < 0.9}))
    edges: list[InstanceEdge] = []
    union_rels: dict[str, list] = {}
    for r in onto.relationships:
        if r.rel_type is RelType.UNION:
            union_rels.setdefault(r.src, []).append(r)
    drop: set[tuple[str, str]] = set()
    for u, rels in union_rels.items():
        free = {r.name: list(ids[r.dst]) for r in rels}
        for i in ids[u]:
            options = [r for r in rels if free[r.name]]
            if not options:
                drop.add((u, i))
                continue
            r = rng.choice(options)
            m = free[r.name].pop(rng.randrange(len(free[r.name])))
            edges.append(InstanceEdge(r.name, i, m))
    for u, i in drop:
        ids[u].remove(i)
    drop = set(drop)
    for r in onto.relationships:
        a, b = list(ids[r.src]), list(ids[r.dst])
        if r.rel_type in (RelType.ONE_TO_ONE, RelType.INHERITANCE):
            rng.shuffle(a)
            rng.shuffle(b)
            for x, y in zip(a, b):
                if rng.random() < 0.7 and not (r.rel_type is RelType.INHERITANCE and r.src == r.dst and x == y):
                    edges.append(InstanceEdge(r.name, x, y))
        elif r.rel_type is RelType.ONE_TO_MANY:
            for y in b:
                if a and rng.random() < 0.75:
                    edges.append(InstanceEdge(r.name, rng.choice(a), y))
        elif r.rel_type is RelType.MANY_TO_MANY:
            for x in a:
                for y in rng.sample(b, min(len(b), rng.randint(0, 2))):
                    edges.append(InstanceEdge(r.name, x, y))
    # a dropped nested union instance can leave its outer union instance unlinked
    rels = {r.name: r for r in onto.relationships}
    while True:
        edges = [e for e in edges if (rels[e.rel].src, e.src) not in drop and (rels[e.rel].dst, e.dst) not in drop]
        linked = {(rels[e.rel].src, e.src) for e in edges if rels[e.rel].rel_type is RelType.UNION}
        more = {(u, i) for u in union_rels for i in ids[u] if (u, i) not in linked} - drop
        if not more:
            live = [v for v in vertices if (v.concept, v.id) not in drop]
            more = stranded_instances(InstanceData(live, edges), onto) - drop
        if not more:
            more = {b for _, b in identity_conflicts(InstanceData(live, edges), onto)} - drop
        if not more:
            break
        drop |= more
    vertices = [v for v in vertices if (v.concept, v.id) not in drop]
    return InstanceData(vertices, edges)


def random_templates(rng: random.Random, onto: Ontology, count: int = 6):
    """Random templates that resolve against the direct mapping of ``onto``."""
    from .bench import AGGREGATE_COUNT, NEIGHBOR_LOOKUP, PATTERN_2HOP, QueryTemplate

    def step(concept: str):
        opts = [(r.name, r.dst) for r in onto.relationships if r.src == concept]
        opts += [(r.name, r.src) for r in onto.relationships if r.dst == concept and r.src != r.dst]
        return rng.choice(opts) if opts else None

    out = []
    for k in range(count * 4):
        if len(out) >= count:
            break
        start = rng.choice(onto.concepts).name
        kind = rng.choice([PATTERN_2HOP, NEIGHBOR_LOOKUP, AGGREGATE_COUNT, NEIGHBOR_LOOKUP])
        first = step(start)
        if kind == NEIGHBOR_LOOKUP and (first is None or rng.random() < 0.25):
            props = onto.concept(start).property_names
            if props:
                out.append(QueryTemplate(f"t{k}", kind, start, prop=sorted(props)[0]))
            continue
        if first is None:
            continue
        rel, target = first
        if kind == PATTERN_2HOP:
            second = step(target)
            if second is not None:
                out.append(QueryTemplate(f"t{k}", kind, start, rel, target, rel2=second[0], target2=second[1]))
            continue
        props = sorted(onto.concept(target).property_names)
        if props:
            out.append(QueryTemplate(f"t{k}", kind, start, rel, target, prop=rng.choice(props)))
    return out
