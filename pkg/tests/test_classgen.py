import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kgsynth.classgen import generate_class_hierarchy, optimal_shape, shaped_forest
from kgsynth.config import GeneratorConfig
from kgsynth.schema import ClassHierarchy, check_forest, hierarchy_metrics


def _cfg(**kw):
    return GeneratorConfig().replace(**kw)


@settings(max_examples=1000, deadline=None)
@given(
    n=st.integers(1, 80),
    depth=st.integers(1, 6),
    avg=st.floats(1, 6),
    ratio=st.floats(0.5, 6),
    disjoint=st.floats(0, 1),
    seed=st.integers(0, 2**32),
)
def test_hierarchy_invariants(n, depth, avg, ratio, disjoint, seed):
    avg = min(avg, depth)
    h, trace = generate_class_hierarchy(
        _cfg(num_classes=n, max_depth=depth, avg_depth=avg, inheritance_ratio=ratio, avg_disjointness=disjoint),
        seed=seed,
    )
    assert h.num_classes == n
    check_forest(h)  # single parent, acyclic, no disjointness along a branch
    assert max(h.depths) == min(n, depth)
    assert trace.metrics == hierarchy_metrics(h)


def test_depth_chain_comes_first():
    h, trace = generate_class_hierarchy(_cfg(num_classes=30, max_depth=5, avg_depth=2.0))
    assert h.parent[:5] == [-1, 0, 1, 2, 3]


@pytest.mark.parametrize("n, depth, avg", [(25, 3, 1.5), (100, 4, 2.5), (250, 5, 3.0)])
def test_targets_met(n, depth, avg):
    for seed in range(3):
        h, trace = generate_class_hierarchy(_cfg(num_classes=n, max_depth=depth, avg_depth=avg), seed=seed)
        m = trace.metrics
        assert m["max_depth"] == depth
        assert abs(m["avg_depth"] - avg) <= 0.3
        assert abs(m["inheritance_ratio"] - 2.5) <= 0.5
        assert not trace.warnings


def test_deterministic():
    cfg = _cfg(num_classes=60, max_depth=4, avg_depth=2.2, avg_disjointness=0.3)
    a, _ = generate_class_hierarchy(cfg, seed=5)
    b, _ = generate_class_hierarchy(cfg, seed=5)
    assert a.parent == b.parent and a.disjoint_pairs == b.disjoint_pairs


def test_alpha_zero_ignores_seed_on_greedy_path():
    cfg = _cfg(num_classes=120, max_depth=4, avg_depth=2.5, alpha=0.0)
    a, ta = generate_class_hierarchy(cfg, seed=1)
    b, tb = generate_class_hierarchy(cfg, seed=2)
    assert {m for _, _, m in ta.placements} == {"depth-chain", "target-driven"}
    assert a.parent == b.parent


def test_disjointness_proportion_close_to_target():
    for target in (0.1, 0.2, 0.3):
        h, trace = generate_class_hierarchy(_cfg(num_classes=100, max_depth=4, avg_depth=2.5, avg_disjointness=target))
        assert abs(trace.metrics["disjointness_proportion"] - target) <= 0.02


@pytest.mark.parametrize("n, depth, ratio", [(5, 2, 2.5), (10, 3, 1.0), (10, 3, 2.5), (10, 4, 2.5), (25, 3, 2.5)])
def test_monotone_steering(n, depth, ratio):
    realized = []
    for i in range(41):
        avg = 1 + (depth - 1) * i / 40
        cfg = _cfg(num_classes=n, max_depth=depth, avg_depth=avg, inheritance_ratio=ratio, alpha=0.0, avg_disjointness=0)
        realized.append(generate_class_hierarchy(cfg, seed=1)[1].metrics["avg_depth"])
    assert realized == sorted(realized)


def _forest_points(n, depth):
    pts = set()
    for parents in itertools.product(*[range(-1, i) for i in range(n)]):
        m = hierarchy_metrics(ClassHierarchy(parent=list(parents)))
        if m["max_depth"] == depth:
            pts.add((round(m["avg_depth"], 9), round(m["inheritance_ratio"], 9)))
    return pts


@pytest.mark.parametrize("avg, ratio", [(1.5, 2.5), (2.0, 1.0), (2.5, 4.0), (1.2, 1.5)])
def test_optimal_shape_matches_enumeration(avg, ratio):
    pts = _forest_points(6, 3)
    best = min(abs(a - avg) + abs(r - ratio) for a, r in pts)
    got = optimal_shape(6, 3, avg, ratio)
    assert abs(got[0] - avg) + abs(got[1] - ratio) == pytest.approx(best)


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 60), st.integers(2, 5), st.data())
def test_shaped_forest_realizes_shape(n, depth, data):
    depth = min(depth, n)
    avg = data.draw(st.floats(1, depth))
    ratio = data.draw(st.floats(0.5, 5))
    if n > 30 and depth > 3:
        n = 30
    a, r, levels, parents = optimal_shape(n, depth, avg, ratio)
    parent = shaped_forest(levels, parents, random.Random(data.draw(st.integers(0, 1000))))
    h = ClassHierarchy(parent=parent)
    check_forest(h)
    m = hierarchy_metrics(h)
    assert m["max_depth"] == depth
    assert m["avg_depth"] == pytest.approx(a)
    assert m["inheritance_ratio"] == pytest.approx(r)
