"""Forward-chaining OWL 2 RL engine for the schema constructs the generator emits.

Facts are tagged tuples::

    ("type", x, C)      entity x is an instance of class C
    ("edge", p, x, y)   relation p holds between x and y
    ("sco", C, D)       C rdfs:subClassOf D
    ("spo", p, q)       p rdfs:subPropertyOf q

and static axioms (never derived) are ``("dom", p, C)``, ``("rng", p, C)``,
``("flag", p, name)``, ``("inv", p, q)`` and ``("dw", A, B)`` with ``A < B``.

Materialization is semi-naive: each round only joins facts derived in the
previous round against the full store. Every derived fact remembers the first
rule instance that produced it, which is enough to replay any violation back
to asserted facts. Functional and inverse-functional clashes are violations
under the unique name assumption; there is no sameAs machinery.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable

from .schema import ROOT, Schema

ENTAILMENT_RULES = (
    "cax-sco",
    "scm-sco",
    "scm-spo",
    "prp-dom",
    "prp-rng",
    "prp-symp",
    "prp-trp",
    "prp-inv1",
    "prp-inv2",
    "prp-spo1",
    "prp-rfp",
)
VIOLATION_RULES = ("cax-dw", "prp-irp", "prp-asyp", "prp-fp", "prp-ifp")
RULES = ENTAILMENT_RULES + VIOLATION_RULES

Fact = tuple


@dataclass
class Violation:
    rule: str
    participants: list[Fact]
    derivation: list[tuple[str, tuple[Fact, ...], Fact | None]] = field(default_factory=list)

    def to_record(self) -> dict:
        return {
            "rule": self.rule,
            "participants": [list(f) for f in self.participants],
            "derivation": [
                {"rule": r, "premises": [list(p) for p in prem], "conclusion": list(c) if c else None}
                for r, prem, c in self.derivation
            ],
        }


@dataclass
class ConsistencyReport:
    consistent: bool
    violations: list[Violation] = field(default_factory=list)
    closure_size: int = 0
    iterations: int = 0

    def render_text(self, names=None) -> str:
        show = names or (lambda f: repr(f))
        out = [
            f"consistent: {'yes' if self.consistent else 'no'}",
            f"violations: {len(self.violations)}",
            f"derived facts: {self.closure_size}",
            f"rounds: {self.iterations}",
        ]
        for i, v in enumerate(self.violations, 1):
            out.append(f"[{i}] {v.rule}: " + ", ".join(show(f) for f in v.participants))
            for rule, premises, concl in v.derivation:
                lhs = ", ".join(show(f) for f in premises)
                rhs = show(concl) if concl is not None else "FALSE"
                out.append(f"    {rule}: {lhs} => {rhs}")
        return "\n".join(out) + "\n"

    def to_jsonl(self) -> str:
        return "".join(json.dumps(v.to_record(), sort_keys=True) + "\n" for v in self.violations)


def schema_axioms(schema: Schema) -> list[Fact]:
    """Static axioms plus asserted sco/spo facts of ``schema``."""
    facts: list[Fact] = []
    for c, p in enumerate(schema.hierarchy.parent):
        if p != ROOT:
            facts.append(("sco", c, p))
    for a, b in sorted(schema.hierarchy.disjoint_pairs):
        facts.append(("dw", a, b))
    for p, r in enumerate(schema.relations):
        for f in sorted(r.flags):
            facts.append(("flag", p, f))
        if r.domain is not None:
            facts.append(("dom", p, r.domain))
        if r.range is not None:
            facts.append(("rng", p, r.range))
        if r.inverse_of is not None:
            facts.append(("inv", p, r.inverse_of))
        if r.subproperty_of is not None:
            facts.append(("spo", p, r.subproperty_of))
    return facts


def kg_facts(kg) -> list[Fact]:
    facts: list[Fact] = []
    for e in sorted(kg.typing):
        for c in sorted(kg.typing[e]):
            facts.append(("type", e, c))
    for s, p, o in sorted(kg.triples):
        facts.append(("edge", p, s, o))
    return facts


def conclusions(rule: str, premises: tuple[Fact, ...]) -> set[Fact]:
    """Every conclusion one instance of ``rule`` allows from ``premises``.

    Used to replay derivations independently of the engine's join order.
    """
    try:
        if rule == "cax-sco":
            (t, x, c), (s, c2, d) = premises
            if t == "type" and s == "sco" and c == c2:
                return {("type", x, d)}
        elif rule in ("scm-sco", "scm-spo"):
            tag = "sco" if rule == "scm-sco" else "spo"
            (t1, a, b), (t2, b2, c) = premises
            if t1 == t2 == tag and b == b2:
                return {(tag, a, c)}
        elif rule in ("prp-dom", "prp-rng"):
            (t, p, x, y), (ax, p2, c) = premises
            want = "dom" if rule == "prp-dom" else "rng"
            if t == "edge" and ax == want and p == p2:
                return {("type", x if rule == "prp-dom" else y, c)}
        elif rule == "prp-symp":
            (t, p, x, y), (ax, p2, name) = premises
            if t == "edge" and ax == "flag" and name == "symmetric" and p == p2:
                return {("edge", p, y, x)}
        elif rule == "prp-trp":
            (t1, p, x, y), (t2, p2, y2, z), (ax, p3, name) = premises
            if t1 == t2 == "edge" and p == p2 == p3 and y == y2 and ax == "flag" and name == "transitive":
                return {("edge", p, x, z)}
        elif rule == "prp-inv1":
            (t, p, x, y), (ax, a, b) = premises
            if t == "edge" and ax == "inv" and p == a:
                return {("edge", b, y, x)}
        elif rule == "prp-inv2":
            (t, q, x, y), (ax, a, b) = premises
            if t == "edge" and ax == "inv" and q == b:
                return {("edge", a, y, x)}
        elif rule == "prp-spo1":
            (t, p, x, y), (s, p2, q) = premises
            if t == "edge" and s == "spo" and p == p2:
                return {("edge", q, x, y)}
        elif rule == "prp-rfp":
            if len(premises) == 2:
                (t, p, x, y), (ax, p2, name) = premises
                if t == "edge" and ax == "flag" and name == "reflexive" and p == p2:
                    return {("edge", p, x, x), ("edge", p, y, y)}
            else:
                (t, x, c), (ax, p, name), (ax2, p2, c2) = premises
                if t == "type" and ax == "flag" and name == "reflexive" and ax2 == "dom" and p == p2 and c == c2:
                    return {("edge", p, x, x)}
    except (TypeError, ValueError):
        return set()
    return set()


def violation_holds(rule: str, participants: list[Fact]) -> bool:
    try:
        if rule == "cax-dw":
            (t1, x, a), (t2, x2, b), (ax, a2, b2) = participants
            return t1 == t2 == "type" and x == x2 and ax == "dw" and {a, b} == {a2, b2} and a != b
        if rule == "prp-irp":
            (t, p, x, y), (ax, p2, name) = participants
            return t == "edge" and x == y and ax == "flag" and name == "irreflexive" and p == p2
        if rule == "prp-asyp":
            *edges, (ax, p2, name) = participants
            if ax != "flag" or name != "asymmetric":
                return False
            if len(edges) == 1:
                _, p, x, y = edges[0]
                return x == y and p == p2
            (_, p, x, y), (_, q, y2, x2) = edges
            return p == q == p2 and x == x2 and y == y2
        if rule in ("prp-fp", "prp-ifp"):
            (t1, p, x1, y1), (t2, q, x2, y2), (ax, p2, name) = participants
            if not (t1 == t2 == "edge" and p == q == p2 and ax == "flag"):
                return False
            if rule == "prp-fp":
                return name == "functional" and x1 == x2 and y1 != y2
            return name == "inverse_functional" and y1 == y2 and x1 != x2
    except (TypeError, ValueError):
        return False
    return False


class Closure:
    """Result of materialization: indexed fact store plus provenance."""

    def __init__(self) -> None:
        self.facts: set[Fact] = set()
        self.asserted: set[Fact] = set()
        self.provenance: dict[Fact, tuple[int, str, tuple[Fact, ...]]] = {}
        self.types: dict[int, set[int]] = defaultdict(set)
        self.by_class: dict[int, set[int]] = defaultdict(set)
        self.out: dict[int, dict[int, set[int]]] = defaultdict(lambda: defaultdict(set))
        self.inn: dict[int, dict[int, set[int]]] = defaultdict(lambda: defaultdict(set))
        self.sco_up: dict[int, set[int]] = defaultdict(set)
        self.sco_down: dict[int, set[int]] = defaultdict(set)
        self.spo_up: dict[int, set[int]] = defaultdict(set)
        self.spo_down: dict[int, set[int]] = defaultdict(set)
        self.iterations = 0

    def _index(self, f: Fact) -> None:
        tag = f[0]
        if tag == "edge":
            _, p, x, y = f
            self.out[p][x].add(y)
            self.inn[p][y].add(x)
        elif tag == "type":
            self.types[f[1]].add(f[2])
            self.by_class[f[2]].add(f[1])
        elif tag == "sco":
            self.sco_up[f[1]].add(f[2])
            self.sco_down[f[2]].add(f[1])
        elif tag == "spo":
            self.spo_up[f[1]].add(f[2])
            self.spo_down[f[2]].add(f[1])

    @property
    def derived_count(self) -> int:
        return len(self.provenance)

    def edges(self) -> set[tuple[int, int, int]]:
        """Closure triples as (subject, relation, object)."""
        return {(f[2], f[1], f[3]) for f in self.facts if f[0] == "edge"}

    def typing(self) -> dict[int, set[int]]:
        return {x: set(cs) for x, cs in self.types.items() if cs}

    def derivation(self, facts: Iterable[Fact]) -> list[tuple[str, tuple[Fact, ...], Fact]]:
        """Derivation steps, in derivation order, reaching ``facts`` from asserted ones."""
        needed: dict[Fact, tuple[int, str, tuple[Fact, ...]]] = {}
        stack = list(facts)
        while stack:
            f = stack.pop()
            if f in needed or f not in self.provenance:
                continue
            needed[f] = self.provenance[f]
            stack.extend(needed[f][2])
        steps = sorted(needed.items(), key=lambda kv: kv[1][0])
        return [(rule, prem, f) for f, (_, rule, prem) in steps]


class _Engine:
    def __init__(self, schema: Schema):
        self.schema = schema
        rels = schema.relations
        self.flags = [r.flags for r in rels]
        self.dom = {p: r.domain for p, r in enumerate(rels) if r.domain is not None}
        self.rng = {p: r.range for p, r in enumerate(rels) if r.range is not None}
        self.inv: dict[int, list[tuple[str, Fact, int]]] = defaultdict(list)
        for p, r in enumerate(rels):
            q = r.inverse_of
            if q is None:
                continue
            ax = ("inv", p, q)
            self.inv[p].append(("prp-inv1", ax, q))
            self.inv[q].append(("prp-inv2", ax, p))
        self.refl_by_dom: dict[int, list[int]] = defaultdict(list)
        for p, r in enumerate(rels):
            if "reflexive" in r.flags and r.domain is not None:
                self.refl_by_dom[r.domain].append(p)

    def run(self, asserted: Iterable[Fact]) -> Closure:
        cl = Closure()
        delta: list[Fact] = []
        for f in asserted:
            if f not in cl.facts:
                cl.facts.add(f)
                cl.asserted.add(f)
                delta.append(f)
        for f in delta:
            cl._index(f)
        seq = 0
        while delta:
            cl.iterations += 1
            new: dict[Fact, tuple[str, tuple[Fact, ...]]] = {}

            def emit(f: Fact, rule: str, premises: tuple[Fact, ...]) -> None:
                if f not in cl.facts and f not in new:
                    new[f] = (rule, premises)

            for f in delta:
                self._fire(cl, f, emit)
            delta = []
            for f, (rule, prem) in new.items():
                cl.facts.add(f)
                cl.provenance[f] = (seq, rule, prem)
                seq += 1
                cl._index(f)
                delta.append(f)
        cl.iterations += 1  # the final round that found nothing new
        return cl

    def _fire(self, cl: Closure, f: Fact, emit) -> None:
        tag = f[0]
        if tag == "type":
            _, x, c = f
            for d in list(cl.sco_up.get(c, ())):
                emit(("type", x, d), "cax-sco", (f, ("sco", c, d)))
            for p in self.refl_by_dom.get(c, ()):
                emit(("edge", p, x, x), "prp-rfp", (f, ("flag", p, "reflexive"), ("dom", p, c)))
        elif tag == "sco":
            _, a, b = f
            for x in list(cl.by_class.get(a, ())):
                emit(("type", x, b), "cax-sco", (("type", x, a), f))
            for c in list(cl.sco_up.get(b, ())):
                emit(("sco", a, c), "scm-sco", (f, ("sco", b, c)))
            for z in list(cl.sco_down.get(a, ())):
                emit(("sco", z, b), "scm-sco", (("sco", z, a), f))
        elif tag == "spo":
            _, p, q = f
            for x, ys in list(cl.out.get(p, {}).items()):
                for y in list(ys):
                    emit(("edge", q, x, y), "prp-spo1", (("edge", p, x, y), f))
            for r in list(cl.spo_up.get(q, ())):
                emit(("spo", p, r), "scm-spo", (f, ("spo", q, r)))
            for z in list(cl.spo_down.get(p, ())):
                emit(("spo", z, q), "scm-spo", (("spo", z, p), f))
        elif tag == "edge":
            _, p, x, y = f
            flags = self.flags[p]
            c = self.dom.get(p)
            if c is not None:
                emit(("type", x, c), "prp-dom", (f, ("dom", p, c)))
            c = self.rng.get(p)
            if c is not None:
                emit(("type", y, c), "prp-rng", (f, ("rng", p, c)))
            if flags:
                if "symmetric" in flags:
                    emit(("edge", p, y, x), "prp-symp", (f, ("flag", p, "symmetric")))
                if "reflexive" in flags:
                    ax = ("flag", p, "reflexive")
                    emit(("edge", p, x, x), "prp-rfp", (f, ax))
                    emit(("edge", p, y, y), "prp-rfp", (f, ax))
                if "transitive" in flags:
                    ax = ("flag", p, "transitive")
                    out_p = cl.out[p]
                    for z in list(out_p.get(y, ())):
                        emit(("edge", p, x, z), "prp-trp", (f, ("edge", p, y, z), ax))
                    for w in list(cl.inn[p].get(x, ())):
                        emit(("edge", p, w, y), "prp-trp", (("edge", p, w, x), f, ax))
            for rule, ax, q in self.inv.get(p, ()):
                emit(("edge", q, y, x), rule, (f, ax))
            for q in list(cl.spo_up.get(p, ())):
                emit(("edge", q, x, y), "prp-spo1", (f, ("spo", p, q)))


def materialize(schema: Schema, kg=None, extra: Iterable[Fact] = ()) -> Closure:
    facts = schema_axioms(schema)
    if kg is not None:
        facts += kg_facts(kg)
    facts += list(extra)
    return _Engine(schema).run(facts)


def find_violations(schema: Schema, cl: Closure, limit: int | None = None) -> list[Violation]:
    out: list[Violation] = []
    dw: dict[int, list[int]] = defaultdict(list)
    for a, b in schema.hierarchy.disjoint_pairs:
        dw[a].append(b)
        dw[b].append(a)

    def add(rule: str, participants: list[Fact]) -> bool:
        out.append(Violation(rule, participants, cl.derivation(participants) + [(rule, tuple(participants), None)]))
        return limit is not None and len(out) >= limit

    if dw:
        for x in sorted(cl.types):
            ts = cl.types[x]
            for a in sorted(ts):
                for b in sorted(dw.get(a, ())):
                    if a < b and b in ts:
                        if add("cax-dw", [("type", x, a), ("type", x, b), ("dw", a, b)]):
                            return out
    for p, r in enumerate(schema.relations):
        flags = r.flags
        if not flags & {"irreflexive", "asymmetric", "functional", "inverse_functional"}:
            continue
        out_p = cl.out.get(p, {})
        for x in sorted(out_p):
            ys = out_p[x]
            if not ys:
                continue
            if "irreflexive" in flags and x in ys:
                if add("prp-irp", [("edge", p, x, x), ("flag", p, "irreflexive")]):
                    return out
            if "asymmetric" in flags:
                for y in sorted(ys):
                    if y == x:
                        if add("prp-asyp", [("edge", p, x, x), ("flag", p, "asymmetric")]):
                            return out
                    elif x < y and x in out_p.get(y, ()):
                        if add("prp-asyp", [("edge", p, x, y), ("edge", p, y, x), ("flag", p, "asymmetric")]):
                            return out
            if "functional" in flags and len(ys) > 1:
                s = sorted(ys)
                for i in range(len(s)):
                    for j in range(i + 1, len(s)):
                        if add("prp-fp", [("edge", p, x, s[i]), ("edge", p, x, s[j]), ("flag", p, "functional")]):
                            return out
        if "inverse_functional" in flags:
            inn_p = cl.inn.get(p, {})
            for y in sorted(inn_p):
                xs = inn_p[y]
                if len(xs) > 1:
                    s = sorted(xs)
                    for i in range(len(s)):
                        for j in range(i + 1, len(s)):
                            if add(
                                "prp-ifp",
                                [("edge", p, s[i], y), ("edge", p, s[j], y), ("flag", p, "inverse_functional")],
                            ):
                                return out
    return out


def check_consistency(schema: Schema, kg=None, limit: int | None = None) -> ConsistencyReport:
    cl = materialize(schema, kg)
    violations = find_violations(schema, cl, limit)
    return ConsistencyReport(not violations, violations, cl.derived_count, cl.iterations)


def check_schema_consistency(schema: Schema) -> ConsistencyReport:
    """Schema-level check through witnesses.

    Every class gets one fresh instance and every relation one witness edge
    between two fresh entities; the schema is materialized together with these
    facts. A class under two disjoint classes, clashing relation flags,
    inverse/subproperty interactions and disjoint domains then surface as
    ordinary violations. Witnesses never share entities, so the single pass
    finds exactly what per-relation checks would.
    """
    return check_consistency_with(schema, witness_facts(schema))


def witness_facts(schema: Schema) -> list[Fact]:
    n = schema.num_classes
    facts: list[Fact] = [("type", c, c) for c in range(n)]
    for p in range(schema.num_relations):
        facts.append(("edge", p, n + 2 * p, n + 2 * p + 1))
    return facts


def check_consistency_with(schema: Schema, extra: list[Fact], kg=None, limit: int | None = None) -> ConsistencyReport:
    cl = materialize(schema, kg, extra)
    violations = find_violations(schema, cl, limit)
    return ConsistencyReport(not violations, violations, cl.derived_count, cl.iterations)


def replay(schema: Schema, kg, violation: Violation, extra: Iterable[Fact] = ()) -> bool:
    """Re-check a violation's derivation from asserted facts alone."""
    known = set(schema_axioms(schema))
    if kg is not None:
        known.update(kg_facts(kg))
    known.update(extra)
    return replay_from(known, violation)


def replay_from(known: set[Fact], violation: Violation) -> bool:
    known = set(known)
    steps = violation.derivation
    if not steps or steps[-1][2] is not None or steps[-1][0] != violation.rule:
        return False
    for rule, premises, concl in steps[:-1]:
        if not all(pr in known for pr in premises):
            return False
        if concl not in conclusions(rule, premises):
            return False
        known.add(concl)
    parts = list(steps[-1][1])
    return all(pr in known for pr in parts) and violation_holds(violation.rule, parts)
