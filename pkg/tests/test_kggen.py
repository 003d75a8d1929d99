import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphs import random_kg, random_schema
from kgsynth.bench import cell_config
from kgsynth.config import GeneratorConfig
from kgsynth.kggen import (
    Clash,
    ConstraintState,
    KnowledgeGraph,
    assign_types,
    generate_kg,
    generate_triples,
    implied_types,
    kg_metrics,
    precheck,
    relation_weights,
)
from kgsynth.pipeline import RunTimings, build_schema
from kgsynth.reasoner import check_consistency, check_schema_consistency, find_violations, materialize
from kgsynth.schema import ClassHierarchy, RelationProfile, Schema


def _replay(schema, kg):
    state = ConstraintState(schema, {})
    for e in sorted(kg.typing):
        for c in sorted(kg.typing[e]):
            state.assert_type(e, c)
    for s, p, o in kg.order:
        state.add(p, s, o)
    return state


@pytest.mark.parametrize("seed", range(300))
def test_constraint_state_agrees_with_reasoner(seed):
    rng = random.Random(seed)
    schema = random_schema(rng)
    kg = random_kg(rng, schema)
    cl = materialize(schema, kg)
    violated = bool(find_violations(schema, cl, limit=1))
    try:
        state = _replay(schema, kg)
    except Clash:
        assert violated
        return
    assert not violated
    edges = {(x, p, y) for p, out in enumerate(state.out) for x, ys in out.items() for y in ys}
    assert edges == cl.edges()
    assert {e: t for e, t in state.types.items() if t} == {e: t for e, t in cl.typing().items() if t}


def test_failed_add_leaves_state_untouched():
    h = ClassHierarchy(parent=[-1, -1], disjoint_pairs={(0, 1)})
    schema = Schema(h, [RelationProfile(domain=0, flags=frozenset({"transitive"}))])
    state = ConstraintState(schema, {1: {1}})
    state.add(0, 2, 3)
    before = ({e: set(t) for e, t in state.types.items()}, {x: set(y) for x, y in state.out[0].items()})
    with pytest.raises(Clash) as info:
        state.add(0, 1, 2)
    assert info.value.rule == "cax-dw"
    after = ({e: set(t) for e, t in state.types.items() if t}, {x: set(y) for x, y in state.out[0].items() if y})
    assert after == ({e: t for e, t in before[0].items() if t}, {x: y for x, y in before[1].items() if y})


def test_closure_budget_refuses_large_fanout():
    schema = Schema(ClassHierarchy(parent=[]), [RelationProfile(flags=frozenset({"transitive"}))])
    state = ConstraintState(schema, {})
    for i in range(10):
        state.add(0, i, 100)
        state.add(0, 200, 300 + i)
    with pytest.raises(Clash) as info:
        state.add(0, 100, 200, budget=50)
    assert info.value.rule == "closure-budget"
    assert state.add(0, 100, 200) == 121


def test_implied_types_marks_unusable_classes():
    rels = [RelationProfile(flags=frozenset({"reflexive", "irreflexive"}), domain=1)]
    schema = Schema(ClassHierarchy(parent=[-1, 0]), rels)
    implied = implied_types(schema)
    assert implied[0] == {0}
    assert implied[1] is None


def test_relation_weights_balance():
    assert relation_weights(4, 1.0) == [1.0] * 4
    for n in (2, 5, 25):
        for balance in (0.0, 0.3, 0.9):
            w = relation_weights(n, balance)
            assert w == sorted(w, reverse=True)
            assert min(w) / max(w) == pytest.approx(balance)


@pytest.mark.parametrize("row", ["S1", "S5", "S9"])
def test_typing_targets(row):
    cfg = cell_config(row, "G2", seed=7)
    schema = build_schema(cfg, RunTimings(), [])
    typing = assign_types(cfg, schema)
    kg = KnowledgeGraph(entities=list(range(cfg.num_entities)), typing=typing)
    m = kg_metrics(kg, schema)
    assert m["prop_untyped"] == pytest.approx(0.3, abs=0.02)
    assert m["avg_multityping"] == pytest.approx(2.0, abs=0.3)
    assert m["avg_depth_specific"] == pytest.approx(2.0, abs=0.3)
    h = schema.hierarchy
    for classes in typing.values():
        for a in classes:
            # most-specific and mutually compatible
            assert not any(h.is_ancestor(a, b) for b in classes)
            assert not any(b in h.disjoint_with[a] for b in classes)


def test_functional_pigeonhole_saturates_with_warning():
    cfg = GeneratorConfig(num_entities=10, num_triples=20, prop_untyped=1.0, seed=3)
    schema = Schema(ClassHierarchy(parent=[-1]), [RelationProfile(flags=frozenset({"functional"}))])
    warnings = []
    kg, _ = generate_triples(cfg, schema, {}, warnings=warnings)
    assert len(kg.triples) <= 10
    assert any(w.startswith("saturation") for w in warnings)
    assert check_consistency(schema, kg).consistent


def test_precheck_drops_later_asymmetric_triple():
    schema = Schema(ClassHierarchy(parent=[]), [RelationProfile(flags=frozenset({"asymmetric"}))])
    order = [(0, 0, 1), (2, 0, 3), (1, 0, 0)]
    kg = KnowledgeGraph(entities=[0, 1, 2, 3], triples=set(order), order=order)
    out, removed = precheck(kg, schema)
    assert out.order == [(0, 0, 1), (2, 0, 3)]
    assert removed == {"prp-asyp": 1}


def test_precheck_attributes_domain_clash():
    h = ClassHierarchy(parent=[-1, -1], disjoint_pairs={(0, 1)})
    schema = Schema(h, [RelationProfile(domain=0)])
    kg = KnowledgeGraph(entities=[0, 1], typing={0: {1}}, triples={(0, 0, 1)}, order=[(0, 0, 1)])
    out, removed = precheck(kg, schema)
    assert not out.triples
    assert out.typing == {0: {1}}
    assert removed == {"prp-dom": 1}


def test_generation_on_contradictory_relation():
    rels = [RelationProfile(flags=frozenset({"reflexive", "irreflexive"})), RelationProfile()]
    schema = Schema(ClassHierarchy(parent=[-1]), rels)
    cfg = GeneratorConfig(num_entities=20, num_triples=30, seed=1)
    kg, _ = generate_triples(cfg, schema, assign_types(cfg, schema))
    assert len(kg.triples) == 30
    assert {p for _, p, _ in kg.triples} == {1}


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_generated_graph_is_consistent(seed):
    rng = random.Random(seed)
    schema = random_schema(rng)
    if not check_schema_consistency(schema).consistent:
        return
    cfg = GeneratorConfig(num_entities=rng.randint(2, 30), num_triples=rng.randint(1, 60), seed=seed)
    kg, report = generate_kg(cfg, schema)
    assert check_consistency(schema, kg, limit=1).consistent
    assert not report.removed  # nothing left for the precheck to remove


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_precheck_output_is_consistent(seed):
    rng = random.Random(seed)
    schema = random_schema(rng)
    if not check_schema_consistency(schema).consistent:
        return
    kg = random_kg(rng, schema)
    out, removed = precheck(kg, schema)
    assert check_consistency(schema, out, limit=1).consistent
    assert out.triples <= kg.triples
    assert sum(removed.values()) >= len(kg.triples) - len(out.triples)


def test_generation_is_deterministic():
    cfg = cell_config("S2", "G1", seed=11)
    schema = build_schema(cfg, RunTimings(), [])
    a, _ = generate_kg(cfg, schema)
    b, _ = generate_kg(cfg, schema)
    assert a == b and a.order == b.order
