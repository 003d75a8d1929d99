"""In-memory schema: a single-inheritance class forest plus profiled relations.

Classes, relations and entities are dense integer ids. The virtual root
(the ``owl:Thing`` analogue) is ``ROOT = -1`` and is never counted as a class.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

ROOT = -1

FLAGS = (
    "reflexive",
    "irreflexive",
    "symmetric",
    "asymmetric",
    "transitive",
    "functional",
    "inverse_functional",
)


def pair(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a <= b else (b, a)


@dataclass
class ClassHierarchy:
    """``parent[c]`` is the parent of class ``c`` (``ROOT`` for top-level classes)."""

    parent: list[int] = field(default_factory=list)
    disjoint_pairs: set[tuple[int, int]] = field(default_factory=set)

    @property
    def num_classes(self) -> int:
        return len(self.parent)

    def _check(self, c: int) -> None:
        if not 0 <= c < len(self.parent):
            raise KeyError(f"unknown class id {c}")

    @cached_property
    def depths(self) -> list[int]:
        out = [0] * len(self.parent)
        done = [False] * len(self.parent)
        for c in range(len(self.parent)):
            stack = []
            x = c
            while x != ROOT and not done[x]:
                stack.append(x)
                x = self.parent[x]
                if len(stack) > len(self.parent):
                    raise ValueError("cycle in class hierarchy")
            base = 0 if x == ROOT else out[x]
            for y in reversed(stack):
                base += 1
                out[y] = base
                done[y] = True
        return out

    @cached_property
    def children(self) -> dict[int, list[int]]:
        kids: dict[int, list[int]] = {}
        for c, p in enumerate(self.parent):
            kids.setdefault(p, []).append(c)
        return kids

    @cached_property
    def ancestors(self) -> list[frozenset[int]]:
        """Strict named ancestors of each class."""
        out: list[frozenset[int]] = [frozenset()] * len(self.parent)
        for c in sorted(range(len(self.parent)), key=lambda x: self.depths[x]):
            p = self.parent[c]
            out[c] = frozenset() if p == ROOT else out[p] | {p}
        return out

    @cached_property
    def disjoint_with(self) -> list[frozenset[int]]:
        """For each class, every class it is disjoint with (declared pairs closed downward)."""
        direct: dict[int, set[int]] = {}
        for a, b in self.disjoint_pairs:
            direct.setdefault(a, set()).add(b)
            direct.setdefault(b, set()).add(a)
        up_closed: list[set[int]] = []
        for c in range(len(self.parent)):
            s: set[int] = set()
            for x in self.ancestors[c] | {c}:
                s |= direct.get(x, set())
            up_closed.append(s)
        out = []
        for c in range(len(self.parent)):
            s = set()
            for d in up_closed[c]:
                s.add(d)
                s.update(self.descendants(d))
            out.append(frozenset(s))
        return out

    def descendants(self, c: int) -> list[int]:
        out = []
        stack = list(self.children.get(c, ()))
        while stack:
            x = stack.pop()
            out.append(x)
            stack.extend(self.children.get(x, ()))
        return out

    def invalidate(self) -> None:
        for name in ("depths", "children", "ancestors", "disjoint_with"):
            self.__dict__.pop(name, None)

    def is_ancestor(self, a: int, b: int) -> bool:
        """True if ``a`` is a strict ancestor of ``b``."""
        return a in self.ancestors[b]


def class_depth(h: ClassHierarchy, c: int) -> int:
    if c == ROOT:
        return 0
    h._check(c)
    return h.depths[c]


def are_disjoint(h: ClassHierarchy, a: int, b: int) -> bool:
    h._check(a)
    h._check(b)
    if a == b:
        return False
    up_a = h.ancestors[a] | {a}
    up_b = h.ancestors[b] | {b}
    return any(pair(x, y) in h.disjoint_pairs for x in up_a for y in up_b)


def inheritance_ratio(h: ClassHierarchy) -> float:
    """Named children per named parent; 0 when no class has a named parent."""
    linked = sum(1 for p in h.parent if p != ROOT)
    parents = len({p for p in h.parent if p != ROOT})
    return linked / parents if parents else 0.0


def disjointness_proportion(h: ClassHierarchy) -> float:
    if not h.parent:
        return 0.0
    involved = {c for ab in h.disjoint_pairs for c in ab}
    return len(involved) / len(h.parent)


def hierarchy_metrics(h: ClassHierarchy) -> dict[str, float]:
    if not h.parent:
        raise ValueError("empty hierarchy")
    depths = h.depths
    return {
        "max_depth": max(depths),
        "avg_depth": sum(depths) / len(depths),
        "inheritance_ratio": inheritance_ratio(h),
        "disjointness_proportion": disjointness_proportion(h),
    }


@dataclass
class RelationProfile:
    flags: frozenset[str] = frozenset()
    inverse_of: int | None = None
    subproperty_of: int | None = None
    domain: int | None = None
    range: int | None = None

    @property
    def profiled(self) -> bool:
        return self.domain is not None and self.range is not None


@dataclass
class Schema:
    hierarchy: ClassHierarchy = field(default_factory=ClassHierarchy)
    relations: list[RelationProfile] = field(default_factory=list)

    @property
    def num_classes(self) -> int:
        return self.hierarchy.num_classes

    @property
    def num_relations(self) -> int:
        return len(self.relations)

    def superproperties(self, p: int) -> list[int]:
        """Strict superproperties of ``p`` following subPropertyOf links."""
        out = []
        seen = {p}
        q = self.relations[p].subproperty_of
        while q is not None and q not in seen:
            out.append(q)
            seen.add(q)
            q = self.relations[q].subproperty_of
        return out

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Schema):
            return NotImplemented
        return (
            self.hierarchy.parent == other.hierarchy.parent
            and self.hierarchy.disjoint_pairs == other.hierarchy.disjoint_pairs
            and self.relations == other.relations
        )


def relation_metrics(schema: Schema) -> dict[str, float]:
    """Realized relation-level proportions and the mean domain/range depth."""
    n = len(schema.relations)
    if n == 0:
        return {}
    out = {f"prop_{f.replace('_', '')}": sum(f in r.flags for r in schema.relations) / n for f in FLAGS}
    out["prop_inverseof"] = sum(r.inverse_of is not None for r in schema.relations) / n
    out["prop_subproperties"] = sum(r.subproperty_of is not None for r in schema.relations) / n
    out["prop_profiled_relations"] = sum(r.profiled for r in schema.relations) / n
    depths = [
        schema.hierarchy.depths[c]
        for r in schema.relations
        for c in (r.domain, r.range)
        if c is not None
    ]
    out["relation_specificity"] = sum(depths) / len(depths) if depths else 0.0
    return out


def check_forest(h: ClassHierarchy) -> None:
    """Raise ``ValueError`` if ``h`` breaks the forest or disjointness invariants."""
    n = len(h.parent)
    for c, p in enumerate(h.parent):
        if p != ROOT and not 0 <= p < n:
            raise ValueError(f"class {c} has unknown parent {p}")
    # DFS from the root must reach every class exactly once
    seen = set()
    stack = [ROOT]
    while stack:
        x = stack.pop()
        for k in h.children.get(x, ()):
            if k in seen:
                raise ValueError("class reached twice")
            seen.add(k)
            stack.append(k)
    if len(seen) != n:
        raise ValueError("cycle in class hierarchy")
    for a, b in h.disjoint_pairs:
        if a == b or h.is_ancestor(a, b) or h.is_ancestor(b, a):
            raise ValueError(f"illegal disjointness between {a} and {b}")
