"""Relation generation and the flag compatibility matrix.

Relations first receive unary flags in a fixed priority order, skipping any
flag that would produce an unusable combination. Inverse pairs, domain/range
profiles and subproperty links follow, each accepted only if a witness graph
for the affected relations stays consistent under the reasoner.
"""

from __future__ import annotations

import itertools
import random
from functools import lru_cache
from typing import Callable

from .config import GeneratorConfig
from .reasoner import ConsistencyReport, Fact, check_consistency_with, check_schema_consistency
from .schema import FLAGS, ROOT, ClassHierarchy, RelationProfile, Schema, are_disjoint

COMPATIBLE = "compatible"
INSTANCE_INCOMPATIBLE = "instance_incompatible"
SCHEMA_INCONSISTENT = "schema_inconsistent"
SEVERITY = {COMPATIBLE: 0, INSTANCE_INCOMPATIBLE: 1, SCHEMA_INCONSISTENT: 2}

PRIORITY = (
    ("reflexive", "irreflexive"),
    ("symmetric", "asymmetric"),
    ("transitive",),
    ("functional",),
    ("inverse_functional",),
)

# OWL 2 DL keeps transitive (non-simple) properties out of these axioms
SIMPLE_ONLY = frozenset({"functional", "inverse_functional", "irreflexive", "asymmetric"})

INVERTED_FLAG = {"functional": "inverse_functional", "inverse_functional": "functional"}

Checker = Callable[[Schema, list[Fact]], ConsistencyReport]


def _engine(schema: Schema, extra: list[Fact]) -> ConsistencyReport:
    return check_consistency_with(schema, extra)


def inverted(flags: frozenset[str]) -> frozenset[str]:
    """Flags an inverse relation carries: functional and inverse-functional swap, the rest carry over."""
    return frozenset(INVERTED_FLAG.get(f, f) for f in flags)


def classify_flags(flags: frozenset[str], check: Checker = _engine) -> str:
    """Verdict for one flag combination via a one-relation witness schema.

    The relation's domain and range is a single class with one instance, which
    stands for OWL's non-empty domain. Without any edge, a violation means the
    axioms alone clash. Adding one edge between two other entities, a
    violation means the relation can never connect distinct instances.
    """
    schema = Schema(ClassHierarchy(parent=[ROOT]), [RelationProfile(flags=frozenset(flags), domain=0, range=0)])
    base: list[Fact] = [("type", 0, 0)]
    if not check(schema, base).consistent:
        return SCHEMA_INCONSISTENT
    if not check(schema, base + [("edge", 0, 1, 2)]).consistent:
        return INSTANCE_INCOMPATIBLE
    if "transitive" in flags and flags & SIMPLE_ONLY:
        return INSTANCE_INCOMPATIBLE
    return COMPATIBLE


def compute_compatibility_matrix(check: Checker = _engine) -> dict[frozenset[str], str]:
    out = {}
    for k in range(len(FLAGS) + 1):
        for combo in itertools.combinations(FLAGS, k):
            fs = frozenset(combo)
            out[fs] = classify_flags(fs, check)
    return out


@lru_cache(maxsize=1)
def compatibility_matrix() -> dict[frozenset[str], str]:
    return compute_compatibility_matrix()


def render_matrix(matrix: dict[frozenset[str], str]) -> str:
    short = {
        "reflexive": "ref",
        "irreflexive": "irr",
        "symmetric": "sym",
        "asymmetric": "asy",
        "transitive": "tra",
        "functional": "fun",
        "inverse_functional": "ifu",
    }
    lines = ["  ".join(short[f] for f in FLAGS) + "  verdict"]
    for fs in sorted(matrix, key=lambda s: (len(s), [FLAGS.index(f) for f in FLAGS if f in s])):
        row = "  ".join(" x " if f in fs else " . " for f in FLAGS)
        lines.append(f"{row}  {matrix[fs]}")
    counts = {v: sum(1 for x in matrix.values() if x == v) for v in SEVERITY}
    lines.append("")
    lines.append(", ".join(f"{k}: {v}" for k, v in counts.items()))
    return "\n".join(lines) + "\n"


def _non_simple(rels: list[RelationProfile]) -> set[int]:
    """Relations that are transitive or have a transitive relation below them (or their inverse)."""
    out = {p for p, r in enumerate(rels) if "transitive" in r.flags}
    changed = True
    while changed:
        changed = False
        for p, r in enumerate(rels):
            if p in out:
                continue
            if r.inverse_of is not None and r.inverse_of in out:
                out.add(p)
                changed = True
        for p in list(out):
            q = rels[p].subproperty_of
            if q is not None and q not in out:
                out.add(q)
                changed = True
    return out


def _reaching(rels: list[RelationProfile], p: int) -> set[int]:
    """Relations whose edges entail edges of ``p`` (via subproperty and inverse links), ``p`` included."""
    subs: dict[int, list[int]] = {}
    for r, prof in enumerate(rels):
        if prof.subproperty_of is not None:
            subs.setdefault(prof.subproperty_of, []).append(r)
    seen = {p}
    stack = [p]
    while stack:
        x = stack.pop()
        nxt = list(subs.get(x, ()))
        if rels[x].inverse_of is not None:
            nxt.append(rels[x].inverse_of)
        for y in nxt:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return seen


def witness_ok(schema: Schema, relations: set[int]) -> bool:
    """Consistency of one witness edge per relation in ``relations`` (plus reflexive-domain instances)."""
    n = schema.num_classes
    extra: list[Fact] = []
    doms = set()
    for p in sorted(relations):
        extra.append(("edge", p, n + 2 * p, n + 2 * p + 1))
        r = schema.relations[p]
        if "reflexive" in r.flags and r.domain is not None:
            doms.add(r.domain)
    extra.extend(("type", c, c) for c in sorted(doms))
    return check_consistency_with(schema, extra, limit=1).consistent


class _DepthSteer:
    """Samples classes near a target depth while keeping the running mean depth on target."""

    def __init__(self, h: ClassHierarchy, target: float, rng: random.Random):
        self.h = h
        self.target = target
        self.rng = rng
        self.total = 0
        self.count = 0
        by_depth: dict[int, list[int]] = {}
        for c, d in enumerate(h.depths):
            by_depth.setdefault(d, []).append(c)
        self.by_depth = by_depth
        window = [c for c, d in enumerate(h.depths) if abs(d - target) <= 1]
        if not window:
            # nothing within one level; fall back to the closest level
            best = min(by_depth, key=lambda d: (abs(d - target), d))
            window = by_depth[best]
        self.window = window

    def pick(self, exclude_disjoint_with: int | None = None) -> int:
        depths = self.h.depths
        mean = self.total / self.count if self.count else None
        pool = self.window
        if mean is not None:
            if mean < self.target:
                side = [c for c in pool if depths[c] >= self.target]
            else:
                side = [c for c in pool if depths[c] <= self.target]
            pool = side or pool
        if exclude_disjoint_with is not None:
            ok = [c for c in pool if not are_disjoint(self.h, c, exclude_disjoint_with)]
            pool = ok or pool
        return self.rng.choice(pool)

    def record(self, *classes: int) -> None:
        for c in classes:
            self.total += self.h.depths[c]
            self.count += 1


def _assign_flags(n: int, config: GeneratorConfig, matrix, rng: random.Random, warnings: list[str]) -> list[frozenset[str]]:
    flags: list[set[str]] = [set() for _ in range(n)]
    for group in PRIORITY:
        for flag in group:
            target = round(getattr(config, "prop_" + flag.replace("_", "")) * n)
            order = list(range(n))
            rng.shuffle(order)
            order.sort(key=lambda r: len(flags[r]))
            got = 0
            for r in order:
                if got >= target:
                    break
                if matrix[frozenset(flags[r] | {flag})] == COMPATIBLE:
                    flags[r].add(flag)
                    got += 1
            if got < target:
                warnings.append(f"only {got} of {target} relations could be made {flag}")
    return [frozenset(f) for f in flags]


def _pair_inverses(rels: list[RelationProfile], config: GeneratorConfig, rng: random.Random, warnings: list[str]) -> None:
    n = len(rels)
    want_pairs = round(config.prop_inverseof * n / 2)
    order = list(range(n))
    rng.shuffle(order)
    free = set(order)
    made = 0
    for p in order:
        if made >= want_pairs:
            break
        if p not in free:
            continue
        need = inverted(rels[p].flags)
        for q in order:
            if q != p and q in free and rels[q].flags == need:
                rels[p].inverse_of = q
                rels[q].inverse_of = p
                free -= {p, q}
                made += 1
                break
    if made < want_pairs:
        warnings.append(f"only {made} of {want_pairs} inverse pairs could be formed")


def _profile(rels: list[RelationProfile], h: ClassHierarchy, config: GeneratorConfig, rng: random.Random) -> None:
    n = len(rels)
    if h.num_classes == 0:
        return
    target = round(config.prop_profiled_relations * n)
    units: list[tuple[int, ...]] = []
    seen = set()
    order = list(range(n))
    rng.shuffle(order)
    for p in order:
        if p in seen:
            continue
        q = rels[p].inverse_of
        unit = (p,) if q is None else (p, q)
        seen.update(unit)
        units.append(unit)
    steer = _DepthSteer(h, config.relation_specificity, rng)
    done = 0
    for unit in units:
        if done + len(unit) > target:
            if done + len(unit) - target > target - done:
                continue
        if done >= target:
            break
        p = unit[0]
        same = any(rels[r].flags & {"reflexive", "symmetric", "transitive"} for r in unit)
        dom = steer.pick()
        steer.record(dom)
        if same:
            rng_cls = dom
        else:
            rng_cls = steer.pick()
        steer.record(rng_cls)
        rels[p].domain, rels[p].range = dom, rng_cls
        if len(unit) == 2:
            q = unit[1]
            rels[q].domain, rels[q].range = rng_cls, dom
            steer.record(dom, rng_cls)
        done += len(unit)


def _pair_subproperties(schema: Schema, config: GeneratorConfig, rng: random.Random, warnings: list[str]) -> None:
    rels = schema.relations
    h = schema.hierarchy
    n = len(rels)
    target = round(config.prop_subproperties * n)
    order = list(range(n))
    rng.shuffle(order)
    made = 0
    added: list[int] = []
    for p in order:
        if made >= target:
            break
        supers = list(range(n))
        rng.shuffle(supers)
        for q in supers:
            if q == p or q == rels[p].inverse_of:
                continue
            if p in schema.superproperties(q):
                continue  # would close a cycle
            rp, rq = rels[p], rels[q]
            if rp.domain is not None and rq.domain is not None and are_disjoint(h, rp.domain, rq.domain):
                continue
            if rp.range is not None and rq.range is not None and are_disjoint(h, rp.range, rq.range):
                continue
            rp.subproperty_of = q
            if any(rels[r].flags & SIMPLE_ONLY for r in _non_simple(rels)) or not witness_ok(schema, _reaching(rels, q)):
                rp.subproperty_of = None
                continue
            made += 1
            added.append(p)
            break
    made -= _repair_subproperties(schema, added)
    if made < target:
        warnings.append(f"only {made} of {target} subproperty links could be added")


def _repair_subproperties(schema: Schema, added: list[int]) -> int:
    """Drop subproperty links until the whole schema passes its witness check.

    Per-link checks only cover the relations that reach the new superproperty;
    longer chains through reflexive-domain typing can still close later on.
    Each round removes the most recent link used by the violation's derivation.
    """
    dropped = 0
    rank = {p: i for i, p in enumerate(added)}
    while added:
        report = check_schema_consistency(schema)
        if report.consistent:
            break
        used = {
            prem[1]
            for _, premises, _ in report.violations[0].derivation
            for prem in premises
            if prem[0] == "spo"
        }
        culprits = [p for p in used if p in rank and schema.relations[p].subproperty_of is not None]
        if not culprits:
            break
        p = max(culprits, key=rank.__getitem__)
        schema.relations[p].subproperty_of = None
        dropped += 1
    return dropped


def generate_relations(
    config: GeneratorConfig,
    hierarchy: ClassHierarchy,
    seed: int | None = None,
    matrix: dict[frozenset[str], str] | None = None,
) -> tuple[list[RelationProfile], list[str]]:
    seed = config.seed if seed is None else seed
    rng = random.Random(f"relations:{seed}")
    matrix = matrix or compatibility_matrix()
    warnings: list[str] = []
    n = config.num_relations
    rels = [RelationProfile(flags=f) for f in _assign_flags(n, config, matrix, rng, warnings)]
    _pair_inverses(rels, config, rng, warnings)
    _profile(rels, hierarchy, config, rng)
    schema = Schema(hierarchy, rels)
    _pair_subproperties(schema, config, rng, warnings)
    return rels, warnings


def generate_schema(config: GeneratorConfig, seed: int | None = None):
    """Classes then relations; returns ``(schema, warnings)``."""
    from .classgen import generate_class_hierarchy

    h, trace = generate_class_hierarchy(config, seed)
    rels, warnings = generate_relations(config, h, seed)
    return Schema(h, rels), trace.warnings + warnings
