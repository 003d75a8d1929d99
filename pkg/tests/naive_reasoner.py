"""Deliberately naive reference reasoner used as a test oracle.

No indexes, no deltas: every round applies every rule to every combination of
facts in the store until nothing changes. Slow, but easy to audit against the
rule definitions.
"""

from __future__ import annotations

from kgsynth.reasoner import kg_facts, schema_axioms


def _round(facts: set) -> set:
    new = set()
    for f in facts:
        for g in facts:
            if f[0] == "type" and g[0] == "sco" and f[2] == g[1]:
                new.add(("type", f[1], g[2]))  # cax-sco
            if f[0] == g[0] == "sco" and f[2] == g[1]:
                new.add(("sco", f[1], g[2]))  # scm-sco
            if f[0] == g[0] == "spo" and f[2] == g[1]:
                new.add(("spo", f[1], g[2]))  # scm-spo
            if f[0] == "edge" and g[0] == "dom" and f[1] == g[1]:
                new.add(("type", f[2], g[2]))  # prp-dom
            if f[0] == "edge" and g[0] == "rng" and f[1] == g[1]:
                new.add(("type", f[3], g[2]))  # prp-rng
            if f[0] == "edge" and g == ("flag", f[1], "symmetric"):
                new.add(("edge", f[1], f[3], f[2]))  # prp-symp
            if f[0] == "edge" and g == ("flag", f[1], "reflexive"):
                new.add(("edge", f[1], f[2], f[2]))  # prp-rfp
                new.add(("edge", f[1], f[3], f[3]))
            if f[0] == "edge" and g[0] == "inv" and g[1] == f[1]:
                new.add(("edge", g[2], f[3], f[2]))  # prp-inv1
            if f[0] == "edge" and g[0] == "inv" and g[2] == f[1]:
                new.add(("edge", g[1], f[3], f[2]))  # prp-inv2
            if f[0] == "edge" and g[0] == "spo" and g[1] == f[1]:
                new.add(("edge", g[2], f[2], f[3]))  # prp-spo1
            if f[0] == g[0] == "edge" and f[1] == g[1] and f[3] == g[2] and ("flag", f[1], "transitive") in facts:
                new.add(("edge", f[1], f[2], g[3]))  # prp-trp
            if f[0] == "type" and g[0] == "dom" and g[2] == f[2] and ("flag", g[1], "reflexive") in facts:
                new.add(("edge", g[1], f[1], f[1]))  # prp-rfp on domain members
    return new - facts


def naive_closure(schema, kg=None, extra=()) -> set:
    facts = set(schema_axioms(schema))
    if kg is not None:
        facts |= set(kg_facts(kg))
    facts |= set(extra)
    while True:
        new = _round(facts)
        if not new:
            return facts
        facts |= new


def naive_violations(facts: set) -> set:
    """Violations as ``(rule, frozenset(participants))``."""
    out = set()
    edges = [f for f in facts if f[0] == "edge"]
    types = [f for f in facts if f[0] == "type"]
    for d in (f for f in facts if f[0] == "dw"):
        for t1 in types:
            for t2 in types:
                if t1[1] == t2[1] and t1[2] == d[1] and t2[2] == d[2]:
                    out.add(("cax-dw", frozenset({t1, t2, d})))
    for e in edges:
        p, x, y = e[1], e[2], e[3]
        if x == y and ("flag", p, "irreflexive") in facts:
            out.add(("prp-irp", frozenset({e, ("flag", p, "irreflexive")})))
        if ("flag", p, "asymmetric") in facts and ("edge", p, y, x) in facts:
            out.add(("prp-asyp", frozenset({e, ("edge", p, y, x), ("flag", p, "asymmetric")})))
        for e2 in edges:
            if e2[1] != p or e2 == e:
                continue
            if e2[2] == x and ("flag", p, "functional") in facts:
                out.add(("prp-fp", frozenset({e, e2, ("flag", p, "functional")})))
            if e2[3] == y and ("flag", p, "inverse_functional") in facts:
                out.add(("prp-ifp", frozenset({e, e2, ("flag", p, "inverse_functional")})))
    return out


def naive_check(schema, kg=None, extra=()):
    facts = naive_closure(schema, kg, extra)
    return facts, naive_violations(facts)
