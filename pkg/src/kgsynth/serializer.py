"""N-Triples / Turtle writer and an N-Triples reader for generated artifacts.

Output is sorted by rendered (subject, predicate, object), so equal inputs give
equal bytes. The reader inverts the writer and skips statements outside the
supported vocabulary instead of failing on them.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple

from .kggen import KnowledgeGraph
from .schema import FLAGS, ROOT, ClassHierarchy, RelationProfile, Schema, pair

RDF = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS = "http://www.w3.org/2000/01/rdf-schema#"
OWL = "http://www.w3.org/2002/07/owl#"
DEFAULT_BASE = "http://pygraf.t/"

TYPE = RDF + "type"
SUBCLASS = RDFS + "subClassOf"
DOMAIN = RDFS + "domain"
RANGE = RDFS + "range"
SUBPROPERTY = RDFS + "subPropertyOf"
THING = OWL + "Thing"
CLASS = OWL + "Class"
DISJOINT = OWL + "disjointWith"
OBJECT_PROPERTY = OWL + "ObjectProperty"
INVERSE = OWL + "inverseOf"
INDIVIDUAL = OWL + "NamedIndividual"

FLAG_IRI = {
    "reflexive": OWL + "ReflexiveProperty",
    "irreflexive": OWL + "IrreflexiveProperty",
    "symmetric": OWL + "SymmetricProperty",
    "asymmetric": OWL + "AsymmetricProperty",
    "transitive": OWL + "TransitiveProperty",
    "functional": OWL + "FunctionalProperty",
    "inverse_functional": OWL + "InverseFunctionalProperty",
}
IRI_FLAG = {v: k for k, v in FLAG_IRI.items()}

PREFIXES = (("owl", OWL), ("rdf", RDF), ("rdfs", RDFS))

Statement = tuple[str, str, str]


class NTriplesError(ValueError):
    def __init__(self, message: str, line: int, source: str = "<text>"):
        super().__init__(f"{source}:{line}: {message}")
        self.line = line
        self.source = source


@dataclass(frozen=True)
class IriPolicy:
    base: str = DEFAULT_BASE

    def cls(self, c: int) -> str:
        return THING if c == ROOT else f"{self.base}C{c}"

    def rel(self, p: int) -> str:
        return f"{self.base}R{p}"

    def ent(self, e: int) -> str:
        return f"{self.base}E{e}"

    def parse(self, iri: str) -> tuple[str, int] | None:
        """``("C"|"R"|"E", id)`` for generated names, else ``None``."""
        if not iri.startswith(self.base):
            return None
        m = _LOCAL.fullmatch(iri[len(self.base):])
        if not m:
            return None
        return m.group(1), int(m.group(2))


_LOCAL = re.compile(r"([CRE])(0|[1-9][0-9]*)")


# ------------------------------------------------------------------ writing


def schema_statements(schema: Schema, iri: IriPolicy = IriPolicy()) -> Iterator[Statement]:
    h = schema.hierarchy
    yield (THING, TYPE, CLASS)
    for c, p in enumerate(h.parent):
        yield (iri.cls(c), TYPE, CLASS)
        yield (iri.cls(c), SUBCLASS, iri.cls(p))
    for a, b in h.disjoint_pairs:
        a, b = pair(a, b)
        yield (iri.cls(a), DISJOINT, iri.cls(b))
    for p, r in enumerate(schema.relations):
        s = iri.rel(p)
        yield (s, TYPE, OBJECT_PROPERTY)
        for f in r.flags:
            yield (s, TYPE, FLAG_IRI[f])
        if r.domain is not None:
            yield (s, DOMAIN, iri.cls(r.domain))
        if r.range is not None:
            yield (s, RANGE, iri.cls(r.range))
        if r.inverse_of is not None:
            yield (s, INVERSE, iri.rel(r.inverse_of))
        if r.subproperty_of is not None:
            yield (s, SUBPROPERTY, iri.rel(r.subproperty_of))


def kg_statements(kg: KnowledgeGraph, iri: IriPolicy = IriPolicy()) -> Iterator[Statement]:
    for e in kg.entities:
        yield (iri.ent(e), TYPE, INDIVIDUAL)
    for e, cs in kg.typing.items():
        for c in cs:
            yield (iri.ent(e), TYPE, iri.cls(c))
    for s, p, o in kg.triples:
        yield (iri.ent(s), iri.rel(p), iri.ent(o))


def _statements(schema: Schema | None, kg: KnowledgeGraph | None, iri: IriPolicy) -> list[Statement]:
    out: set[Statement] = set()
    if schema is not None:
        out.update(schema_statements(schema, iri))
    if kg is not None:
        out.update(kg_statements(kg, iri))
    return sorted(out)


def to_ntriples(statements: Iterable[Statement]) -> str:
    return "".join(f"<{s}> <{p}> <{o}> .\n" for s, p, o in statements)


def _qname(term: str, iri: IriPolicy) -> str:
    if term == TYPE:
        return "a"
    for prefix, ns in PREFIXES:
        if term.startswith(ns) and re.fullmatch(r"[A-Za-z_][\w-]*", term[len(ns):]):
            return f"{prefix}:{term[len(ns):]}"
    if term.startswith(iri.base) and _LOCAL.fullmatch(term[len(iri.base):]):
        return ":" + term[len(iri.base):]
    return f"<{term}>"


def to_turtle(statements: list[Statement], iri: IriPolicy = IriPolicy()) -> str:
    lines = [f"@prefix : <{iri.base}> ."] + [f"@prefix {p}: <{ns}> ." for p, ns in PREFIXES] + [""]
    i = 0
    while i < len(statements):
        subj = statements[i][0]
        j = i
        while j < len(statements) and statements[j][0] == subj:
            j += 1
        groups: list[tuple[str, list[str]]] = []
        for _, p, o in statements[i:j]:
            if groups and groups[-1][0] == p:
                groups[-1][1].append(o)
            else:
                groups.append((p, [o]))
        parts = [f"{_qname(p, iri)} {', '.join(_qname(o, iri) for o in objs)}" for p, objs in groups]
        lines.append(f"{_qname(subj, iri)} " + " ;\n    ".join(parts) + " .")
        i = j
    return "\n".join(lines) + "\n"


def serialize(
    schema: Schema | None,
    kg: KnowledgeGraph | None = None,
    format: str = "ntriples",
    iri: IriPolicy = IriPolicy(),
) -> str:
    statements = _statements(schema, kg, iri)
    if format == "ntriples":
        return to_ntriples(statements)
    if format == "turtle":
        return to_turtle(statements, iri)
    raise ValueError(f"unknown format {format!r}")


# ------------------------------------------------------------------ reading

_TERM = r'<([^<>"{}|^`\\\s]*)>|(_:\S+)|("(?:[^"\\]|\\.)*"(?:@[A-Za-z][A-Za-z0-9-]*|\^\^<[^<>\s]*>)?)'
_LINE = re.compile(rf"\s*(?:{_TERM})\s*(?:{_TERM})\s*(?:{_TERM})\s*\.\s*(?:#.*)?")


class ParseResult(NamedTuple):
    schema: Schema
    kg: KnowledgeGraph
    skipped: list[Statement]


def read_statements(text: str, source: str = "<text>") -> tuple[list[Statement], list[Statement]]:
    """IRI-only statements, plus well-formed statements with blank nodes or literals (skipped)."""
    out: list[Statement] = []
    other: list[Statement] = []
    for no, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        m = _LINE.fullmatch(line)
        if not m:
            raise NTriplesError(f"malformed statement: {stripped[:80]}", no, source)
        g = m.groups()
        terms = [g[k] or g[k + 1] or g[k + 2] for k in (0, 3, 6)]
        if g[3] is None:
            raise NTriplesError("predicate must be an IRI", no, source)
        if g[2] is not None:
            raise NTriplesError("subject cannot be a literal", no, source)
        if g[1] is not None or g[7] is not None or g[8] is not None:
            other.append(tuple(terms))  # type: ignore[arg-type]
            continue
        out.append((g[0], g[3], g[6]))
    return out, other


def _dense(ids: set[int], kind: str) -> int:
    n = len(ids)
    if ids and ids != set(range(n)):
        raise ValueError(f"{kind} identifiers are not contiguous from 0")
    return n


def build(statements: list[Statement], skipped: list[Statement] | None = None, iri: IriPolicy = IriPolicy()) -> ParseResult:
    skipped = list(skipped or [])
    classes: set[int] = set()
    relations: set[int] = set()
    entities: set[int] = set()
    for s, p, o in statements:
        if p == TYPE:
            ps = iri.parse(s)
            if ps and ps[0] == "C" and o == CLASS:
                classes.add(ps[1])
            elif ps and ps[0] == "R" and o == OBJECT_PROPERTY:
                relations.add(ps[1])
            elif ps and ps[0] == "E" and o == INDIVIDUAL:
                entities.add(ps[1])
    n_cls = _dense(classes, "class")
    n_rel = _dense(relations, "relation")

    def c_of(term: str) -> int | None:
        if term == THING:
            return ROOT
        t = iri.parse(term)
        return t[1] if t and t[0] == "C" and t[1] in classes else None

    def r_of(term: str) -> int | None:
        t = iri.parse(term)
        return t[1] if t and t[0] == "R" and t[1] in relations else None

    def e_of(term: str) -> int | None:
        t = iri.parse(term)
        return t[1] if t and t[0] == "E" else None

    parent = [ROOT] * n_cls
    disjoint: set[tuple[int, int]] = set()
    rels = [RelationProfile() for _ in range(n_rel)]
    flags: list[set[str]] = [set() for _ in range(n_rel)]
    typing: dict[int, set[int]] = {}
    triples: set[tuple[int, int, int]] = set()

    for st in statements:
        s, p, o = st
        if p == TYPE:
            if o in (CLASS, OBJECT_PROPERTY, INDIVIDUAL) and (c_of(s) is not None or r_of(s) is not None or e_of(s) is not None):
                continue
            r = r_of(s)
            if r is not None and o in IRI_FLAG:
                flags[r].add(IRI_FLAG[o])
                continue
            e, c = e_of(s), c_of(o)
            if e is not None and c is not None and c != ROOT:
                typing.setdefault(e, set()).add(c)
                entities.add(e)
                continue
        elif p == SUBCLASS:
            a, b = c_of(s), c_of(o)
            if a is not None and a != ROOT and b is not None:
                parent[a] = b
                continue
        elif p == DISJOINT:
            a, b = c_of(s), c_of(o)
            if a is not None and b is not None and ROOT not in (a, b):
                disjoint.add(pair(a, b))
                continue
        elif p in (DOMAIN, RANGE):
            r, c = r_of(s), c_of(o)
            if r is not None and c is not None and c != ROOT:
                if p == DOMAIN:
                    rels[r].domain = c
                else:
                    rels[r].range = c
                continue
        elif p == INVERSE:
            a, b = r_of(s), r_of(o)
            if a is not None and b is not None:
                rels[a].inverse_of = b
                rels[b].inverse_of = a
                continue
        elif p == SUBPROPERTY:
            a, b = r_of(s), r_of(o)
            if a is not None and b is not None:
                rels[a].subproperty_of = b
                continue
        else:
            r, x, y = r_of(p), e_of(s), e_of(o)
            if r is not None and x is not None and y is not None:
                triples.add((x, r, y))
                entities.update((x, y))
                continue
        if st == (THING, TYPE, CLASS):
            continue
        skipped.append(st)

    for r, f in zip(rels, flags):
        r.flags = frozenset(f)
    schema = Schema(ClassHierarchy(parent=parent, disjoint_pairs=disjoint), rels)
    kg = KnowledgeGraph(entities=sorted(entities), typing=typing, triples=triples, order=sorted(triples))
    return ParseResult(schema, kg, skipped)


def parse_ntriples(text: str, source: str = "<text>", iri: IriPolicy = IriPolicy()) -> ParseResult:
    statements, other = read_statements(text, source)
    return build(statements, other, iri)


def parse_files(*paths, iri: IriPolicy = IriPolicy()) -> ParseResult:
    """Parse several N-Triples files as one graph (e.g. a schema file and a KG file)."""
    statements: list[Statement] = []
    other: list[Statement] = []
    for path in paths:
        with open(path, encoding="utf-8") as fh:
            st, ot = read_statements(fh.read(), str(path))
        statements.extend(st)
        other.extend(ot)
    return build(statements, other, iri)


# ------------------------------------------------------------------ artifacts

EXTENSION = {"ntriples": "nt", "turtle": "ttl"}


def render_stats(values: dict[str, object]) -> str:
    return "".join(f"{k} = {_stat(v)}\n" for k, v in values.items())


def _stat(v: object) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)):
        return ",".join(str(x) for x in v)
    return str(v)


def parse_stats(text: str) -> dict[str, str]:
    out = {}
    for line in text.splitlines():
        if " = " in line:
            k, v = line.split(" = ", 1)
            out[k.strip()] = v.strip()
    return out


def graph_files(schema: Schema, kg: KnowledgeGraph | None, formats: Iterable[str], iri: IriPolicy = IriPolicy()) -> dict[str, str]:
    """``schema.*``, ``kg.*`` and ``full.*`` contents per requested format."""
    files: dict[str, str] = {}
    parts = {"schema": (schema, None)}
    if kg is not None:
        parts["kg"] = (None, kg)
        parts["full"] = (schema, kg)
    for fmt in formats:
        ext = EXTENSION[fmt]
        for name, (s, k) in parts.items():
            files[f"{name}.{ext}"] = serialize(s, k, fmt, iri)
    return files


__all__ = [
    "FLAGS",
    "IriPolicy",
    "NTriplesError",
    "ParseResult",
    "parse_ntriples",
    "parse_files",
    "serialize",
    "graph_files",
    "render_stats",
    "parse_stats",
]
