import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphs import random_kg, random_schema
from kgsynth.bench import cell_config
from kgsynth.kggen import KnowledgeGraph, generate_kg
from kgsynth.pipeline import RunTimings, build_schema
from kgsynth.schema import ClassHierarchy, RelationProfile, Schema
from kgsynth.serializer import (
    DISJOINT,
    INDIVIDUAL,
    THING,
    IriPolicy,
    NTriplesError,
    graph_files,
    parse_files,
    parse_ntriples,
    parse_stats,
    render_stats,
    serialize,
)

BASE = "http://pygraf.t/"


def _small():
    h = ClassHierarchy(parent=[-1, 0, -1], disjoint_pairs={(1, 2)})
    rels = [
        RelationProfile(flags=frozenset({"transitive", "symmetric"}), domain=0, range=0),
        RelationProfile(flags=frozenset({"functional"}), domain=1, range=2, inverse_of=2),
        RelationProfile(flags=frozenset({"inverse_functional"}), domain=2, range=1, inverse_of=1, subproperty_of=0),
    ]
    schema = Schema(h, rels)
    kg = KnowledgeGraph(entities=[0, 1, 2], typing={0: {1}, 1: {2}}, triples={(0, 1, 1), (0, 0, 2)})
    return schema, kg


def test_ntriples_layout():
    schema, kg = _small()
    text = serialize(schema, kg)
    lines = text.splitlines()
    assert lines == sorted(lines) and len(lines) == len(set(lines))
    assert f"<{BASE}C0> <http://www.w3.org/2000/01/rdf-schema#subClassOf> <{THING}> ." in lines
    assert f"<{BASE}C1> <{DISJOINT}> <{BASE}C2> ." in lines
    assert f"<{BASE}E2> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <{INDIVIDUAL}> ." in lines
    assert f"<{BASE}R2> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://www.w3.org/2002/07/owl#InverseFunctionalProperty> ." in lines
    assert f"<{BASE}E0> <{BASE}R1> <{BASE}E1> ." in lines


def test_round_trip_small():
    schema, kg = _small()
    parsed = parse_ntriples(serialize(schema, kg))
    assert parsed.schema == schema
    assert parsed.kg == kg
    assert parsed.skipped == []


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6))
def test_round_trip_random(seed):
    rng = random.Random(seed)
    schema = random_schema(rng)
    kg = random_kg(rng, schema)
    text = serialize(schema, kg)
    parsed = parse_ntriples(text)
    assert parsed.schema == schema
    assert parsed.kg == kg
    assert serialize(parsed.schema, parsed.kg) == text


def test_custom_base():
    schema, kg = _small()
    iri = IriPolicy(base="urn:x:")
    text = serialize(schema, kg, iri=iri)
    assert BASE not in text
    assert parse_ntriples(text, iri=iri).schema == schema


def test_unknown_statements_are_skipped():
    schema, kg = _small()
    extra = (
        '<http://example.org/a> <http://example.org/b> "lit"@en .\n'
        "_:b0 <http://example.org/b> <http://example.org/c> .\n"
        "<http://example.org/a> <http://example.org/b> <http://example.org/c> .\n"
        "# a comment\n\n"
    )
    parsed = parse_ntriples(serialize(schema, kg) + extra)
    assert parsed.schema == schema and parsed.kg == kg
    assert len(parsed.skipped) == 3


@pytest.mark.parametrize(
    "text",
    [
        "<a> <b> <c>\n",
        "<a> <b> .\n",
        '<a> "p" <c> .\n',
        "<a b> <p> <c> .\n",
        '"s" <p> <c> .\n',
    ],
)
def test_malformed_lines(text):
    with pytest.raises(NTriplesError) as info:
        parse_ntriples("# header\n" + text, source="x.nt")
    assert info.value.line == 2
    assert str(info.value).startswith("x.nt:2:")


def test_non_contiguous_ids_rejected():
    text = f"<{BASE}C1> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://www.w3.org/2002/07/owl#Class> .\n"
    with pytest.raises(ValueError):
        parse_ntriples(text)


def test_schema_and_kg_files_combine(tmp_path):
    schema, kg = _small()
    files = graph_files(schema, kg, ["ntriples", "turtle"])
    assert set(files) == {"schema.nt", "kg.nt", "full.nt", "schema.ttl", "kg.ttl", "full.ttl"}
    for name, content in files.items():
        (tmp_path / name).write_text(content)
    parsed = parse_files(tmp_path / "schema.nt", tmp_path / "kg.nt")
    assert parsed.schema == schema and parsed.kg == kg
    assert parse_ntriples(files["full.nt"]).kg == kg


def test_stats_round_trip():
    values = {"a": 1, "b": 0.5, "c": ("ntriples", "turtle"), "d": "text with = sign"}
    assert parse_stats(render_stats(values)) == {"a": "1", "b": "0.5", "c": "ntriples,turtle", "d": "text with = sign"}


def test_grid_cell_round_trip():
    cfg = cell_config("S4", "G1", 8)
    schema = build_schema(cfg, RunTimings(), [])
    kg, _ = generate_kg(cfg, schema)
    text = serialize(schema, kg)
    parsed = parse_ntriples(text)
    assert parsed.schema == schema and parsed.kg == kg


def test_independent_parser_agrees():
    rdflib = pytest.importorskip("rdflib")
    from rdflib.compare import isomorphic

    schema, kg = _small()
    nt = rdflib.Graph().parse(data=serialize(schema, kg), format="nt")
    ttl = rdflib.Graph().parse(data=serialize(schema, kg, "turtle"), format="turtle")
    assert len(nt) == len(serialize(schema, kg).splitlines())
    assert isomorphic(nt, ttl)
