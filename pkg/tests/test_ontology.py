from __future__ import annotations

import copy
import json
import random

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pgso.errors import OntologyValidationError
from pgso.ontology import (
    Cardinality,
    Concept,
    DataProperty,
    Stats,
    ValueType,
    Workload,
    WorkloadEntry,
    access_frequency,
    parse_ontology,
    parse_stats,
    parse_workload,
    serialize_ontology,
    size_of_concept,
)
from pgso.synth import random_ontology

MED_SNIPPET = {
    "concepts": [
        {"name": "Drug", "properties": [{"name": "name", "type": "STRING"}]},
        {"name": "Risk", "properties": []},
        {"name": "BlackBoxWarning", "properties": [{"name": "text", "type": "STRING"}]},
        {"name": "ContraIndication", "properties": [{"name": "condition", "type": "STRING"}]},
    ],
    "relationships": [
        {"name": "cause", "src": "Drug", "dst": "Risk", "type": "ONE_TO_MANY"},
        {"name": "riskBlackBox", "src": "Risk", "dst": "BlackBoxWarning", "type": "UNION"},
        {"name": "riskContra", "src": "Risk", "dst": "ContraIndication", "type": "UNION"},
    ],
}


def _codes(doc, **kw) -> set[str]:
    with pytest.raises(OntologyValidationError) as info:
        parse_ontology(json.dumps(doc), **kw)
    return info.value.codes


def test_med_snippet_parses_with_two_unions():
    o = parse_ontology(json.dumps(MED_SNIPPET).encode())
    assert len(o.concepts) == 4
    assert sum(r.rel_type.value == "UNION" for r in o.relationships) == 2


def test_empty_ontology_is_valid():
    o = parse_ontology('{"concepts":[],"relationships":[]}')
    assert o.concepts == () and o.relationships == ()


def test_inheritance_two_cycle_rejected():
    doc = {"concepts": [{"name": "A", "properties": []}, {"name": "B", "properties": []}],
           "relationships": [{"name": "x", "src": "A", "dst": "B", "type": "INHERITANCE"},
                             {"name": "y", "src": "B", "dst": "A", "type": "INHERITANCE"}]}
    assert "CYCLE_DETECTED" in _codes(doc)


def test_union_cycle_rejected():
    doc = {"concepts": [{"name": "A", "properties": []}, {"name": "B", "properties": []}],
           "relationships": [{"name": "x", "src": "A", "dst": "B", "type": "UNION"},
                             {"name": "y", "src": "B", "dst": "A", "type": "UNION"}]}
    assert "CYCLE_DETECTED" in _codes(doc)


def test_union_cycle_through_one_to_one_partners_rejected():
    doc = {"concepts": [{"name": n, "properties": []} for n in ("U", "V", "M")],
           "relationships": [{"name": "a", "src": "U", "dst": "V", "type": "UNION"},
                             {"name": "b", "src": "V", "dst": "M", "type": "UNION"},
                             {"name": "c", "src": "U", "dst": "M", "type": "ONE_TO_ONE"}]}
    assert "CYCLE_DETECTED" in _codes(doc)


def test_union_tied_one_to_one_to_its_own_member_is_valid():
    doc = {"concepts": [{"name": "U", "properties": []}, {"name": "M", "properties": []}],
           "relationships": [{"name": "a", "src": "U", "dst": "M", "type": "UNION"},
                             {"name": "c", "src": "U", "dst": "M", "type": "ONE_TO_ONE"}]}
    parse_ontology(json.dumps(doc))


def test_mixed_kinds_do_not_form_a_cycle():
    doc = {"concepts": [{"name": "A", "properties": []}, {"name": "B", "properties": []}],
           "relationships": [{"name": "x", "src": "A", "dst": "B", "type": "UNION"},
                             {"name": "y", "src": "B", "dst": "A", "type": "INHERITANCE"}]}
    parse_ontology(json.dumps(doc))


@pytest.mark.parametrize("text,code", [
    ("{not json", "MALFORMED_JSON"),
    (b"\xff\xfe", "MALFORMED_JSON"),
    ('{"concepts":[{"name":"A","properties":[]}],"relationships":[{"name":"r","src":"A","dst":"Z","type":"ONE_TO_MANY"}]}',
     "UNKNOWN_CONCEPT_REF"),
    ('{"concepts":[{"name":"A","properties":[]},{"name":"A","properties":[]}],"relationships":[]}', "DUPLICATE_NAME"),
    ('{"concepts":[{"name":"A","properties":[{"name":"p","type":"INT"},{"name":"p","type":"INT"}]}],"relationships":[]}',
     "DUPLICATE_NAME"),
    ('{"concepts":[{"name":"A","properties":[]}],"relationships":[{"name":"r","src":"A","dst":"A","type":"FRIEND"}]}',
     "BAD_REL_TYPE"),
])
def test_parse_errors(text, code):
    with pytest.raises(OntologyValidationError) as info:
        parse_ontology(text)
    assert code in info.value.codes


def test_union_props_need_flag():
    doc = copy.deepcopy(MED_SNIPPET)
    doc["concepts"][1]["properties"] = [{"name": "level", "type": "INT"}]
    assert "UNION_HAS_PROPERTIES" in _codes(doc)
    o = parse_ontology(json.dumps(doc), allow_union_props=True)
    assert o.concept("Risk").property_names == {"level"}


def test_size_of_concept_examples():
    props = (DataProperty("i", ValueType.INT), DataProperty("d", ValueType.DOUBLE))
    assert size_of_concept(Concept("A", props), Stats({"A": 0})) == 0
    assert size_of_concept(Concept("A", props), Stats({"A": 100})) == 1600
    s = Concept("S", (DataProperty("name", ValueType.STRING),))
    assert size_of_concept(s, Stats({"S": 10}, {}, {"S.name": 24})) == 240


def test_size_of_list_property_uses_average_list_length():
    lst = DataProperty("B.q", ValueType.INT, Cardinality.LIST, provenance="B", via="r")
    # 200 edges over 100 sources: two 8-byte values per instance
    assert size_of_concept(Concept("A", (lst,)), Stats({"A": 100}, {"r": 200})) == 1600


@given(st.integers(0, 10_000), st.integers(0, 10_000), st.integers(1, 64), st.integers(1, 64))
def test_size_monotone(n1, n2, b1, b2):
    c = Concept("S", (DataProperty("name", ValueType.STRING), DataProperty("k", ValueType.INT)))
    lo_n, hi_n = sorted((n1, n2))
    lo_b, hi_b = sorted((b1, b2))
    assert size_of_concept(c, Stats({"S": lo_n}, {}, {"S.name": lo_b})) <= \
        size_of_concept(c, Stats({"S": hi_n}, {}, {"S.name": lo_b}))
    assert size_of_concept(c, Stats({"S": lo_n}, {}, {"S.name": lo_b})) <= \
        size_of_concept(c, Stats({"S": lo_n}, {}, {"S.name": hi_b}))


def test_access_frequency_examples():
    assert access_frequency("Drug", None) == 1
    assert access_frequency(("Drug", "treat", "Indication.desc"), Workload()) == 1
    w = Workload((WorkloadEntry("Drug", "treat", "Indication.desc", 120),))
    assert access_frequency(("Drug", "treat", "Indication.desc"), w) == 120
    w2 = Workload((WorkloadEntry("Drug", "treat", "Indication.desc", 120), WorkloadEntry("Drug", "cause", None, 30)))
    assert access_frequency("Drug", w2) == 150
    assert access_frequency("Indication", w2) == 120


def test_stats_and_workload_reject_unknown_refs():
    o = parse_ontology(json.dumps(MED_SNIPPET))
    with pytest.raises(OntologyValidationError) as info:
        parse_stats('{"concepts":{"Nope":{"cardinality":3}}}', o)
    assert "UNKNOWN_CONCEPT_REF" in info.value.codes
    with pytest.raises(OntologyValidationError):
        parse_workload('{"entries":[{"src":"Drug","frequency":-1}]}', o)


def test_missing_stats_fall_back_with_warnings():
    o = parse_ontology(json.dumps(MED_SNIPPET))
    st_ = parse_stats('{"concepts":{"Drug":{"cardinality":5}}}', o)
    assert st_.cardinality("Drug") == 5 and st_.cardinality("Risk") == 1000
    assert st_.edge_count("cause") == 1000
    warnings = st_.missing(o)
    assert any("Risk" in w for w in warnings) and not any("concept Drug" in w for w in warnings)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.booleans())
def test_round_trip(seed, mi):
    o = random_ontology(random.Random(seed), multiple_inheritance=mi)
    assert parse_ontology(serialize_ontology(o)) == o


def _independent_valid(doc: dict) -> bool:
    """Ontology invariants checked from scratch with networkx."""
    names = [c["name"] for c in doc["concepts"]]
    if len(set(names)) != len(names):
        return False
    rnames = [r["name"] for r in doc["relationships"]]
    if len(set(rnames)) != len(rnames):
        return False
    for c in doc["concepts"]:
        pn = [p["name"] for p in c["properties"]]
        if len(set(pn)) != len(pn):
            return False
    kinds = {"ONE_TO_ONE", "ONE_TO_MANY", "MANY_TO_MANY", "UNION", "INHERITANCE"}
    for r in doc["relationships"]:
        if r["type"] not in kinds or r["src"] not in names or r["dst"] not in names:
            return False
    ones = nx.Graph()
    ones.add_nodes_from(names)
    ones.add_edges_from((r["src"], r["dst"]) for r in doc["relationships"] if r["type"] == "ONE_TO_ONE")
    block = {n: min(comp) for comp in nx.connected_components(ones) for n in comp}
    for kind in ("INHERITANCE", "UNION"):
        pairs = [(r["src"], r["dst"]) for r in doc["relationships"] if r["type"] == kind]
        g = nx.DiGraph(pairs)
        g.add_nodes_from(names)
        if not nx.is_directed_acyclic_graph(g):
            return False
        q = nx.DiGraph((block[a], block[b]) for a, b in pairs if block[a] != block[b])
        if not nx.is_directed_acyclic_graph(q):
            return False
    heads = {r["src"] for r in doc["relationships"] if r["type"] == "UNION"}
    return not any(c["properties"] for c in doc["concepts"] if c["name"] in heads)


def _mutate(doc: dict, rng: random.Random) -> dict:
    doc = copy.deepcopy(doc)
    concepts, rels = doc["concepts"], doc["relationships"]
    names = [c["name"] for c in concepts]
    choice = rng.randrange(7)
    if choice == 0 and rels:
        rng.choice(rels)[rng.choice(["src", "dst"])] = rng.choice(names + ["Ghost"])
    elif choice == 1 and rels:
        rng.choice(rels)["type"] = rng.choice(["UNION", "INHERITANCE", "ONE_TO_MANY", "BOGUS"])
    elif choice == 2 and len(concepts) > 1:
        concepts[1]["name"] = concepts[0]["name"]
    elif choice == 3 and rels:
        rels.append(dict(rng.choice(rels)))
    elif choice == 4:
        rng.choice(concepts)["properties"].append({"name": "name", "type": "STRING"})
    elif choice == 5 and rng.random() < 0.5:
        rels.append({"name": "m11", "src": rng.choice(names), "dst": rng.choice(names), "type": "ONE_TO_ONE"})
    elif choice == 5:
        a, b = rng.choice(names), rng.choice(names)
        kind = rng.choice(["UNION", "INHERITANCE"])
        rels += [{"name": "m1", "src": a, "dst": b, "type": kind}, {"name": "m2", "src": b, "dst": a, "type": kind}]
    else:
        concepts.pop(rng.randrange(len(concepts)))
    return doc


def test_mutation_fuzz_never_accepts_invalid():
    rng = random.Random(11)
    accepted_invalid = 0
    for i in range(400):
        base = json.loads(serialize_ontology(random_ontology(random.Random(i))))
        doc = _mutate(base, rng)
        expected = _independent_valid(doc)
        try:
            parse_ontology(json.dumps(doc))
            ok = True
        except OntologyValidationError:
            ok = False
        accepted_invalid += ok and not expected
        assert ok == expected, doc
    assert accepted_invalid == 0
