"""Knowledge graph generation: entity typing, triple sampling and prechecks.

Triples are sampled one at a time. Each candidate is pushed through an
incremental closure (domain/range typing, symmetry, inverses, subproperties,
transitivity, reflexivity) and kept only if none of the derived facts clashes
with disjointness, irreflexivity, asymmetry or (inverse-)functionality. The
same closure replays a finished graph in ``precheck`` and drops any triple
that no longer fits.
"""

from __future__ import annotations

import math
import random
from collections import Counter, defaultdict
from dataclasses import dataclass, field

from .config import GeneratorConfig
from .schema import FLAGS, Schema

EXTRA_TYPE_ATTEMPTS = 20
# one asserted triple may add at most this many closure edges; keeps transitive
# components from collapsing into quadratic cliques on large graphs
MAX_CLOSURE_DELTA = 64
PICK_TRIES = 8


@dataclass
class KnowledgeGraph:
    entities: list[int] = field(default_factory=list)
    typing: dict[int, set[int]] = field(default_factory=dict)
    triples: set[tuple[int, int, int]] = field(default_factory=set)
    order: list[tuple[int, int, int]] = field(default_factory=list)  # generation order of ``triples``

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, KnowledgeGraph):
            return NotImplemented
        return (
            sorted(self.entities) == sorted(other.entities)
            and {e: set(c) for e, c in self.typing.items() if c} == {e: set(c) for e, c in other.typing.items() if c}
            and self.triples == other.triples
        )


@dataclass
class GenerationReport:
    requested_entities: int = 0
    requested_triples: int = 0
    realized_entities: int = 0
    realized_triples: int = 0
    observed_entities: int = 0
    prop_untyped: float = 0.0
    avg_depth_specific: float = 0.0
    avg_multityping: float = 0.0
    relation_histogram: dict[int, int] = field(default_factory=dict)
    rejections: dict[str, int] = field(default_factory=dict)
    removed: dict[str, int] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def as_stats(self) -> dict[str, object]:
        out: dict[str, object] = {
            "requested_entities": self.requested_entities,
            "requested_triples": self.requested_triples,
            "realized_entities": self.realized_entities,
            "realized_triples": self.realized_triples,
            "observed_entities": self.observed_entities,
            "prop_untyped": round(self.prop_untyped, 6),
            "avg_depth_specific": round(self.avg_depth_specific, 6),
            "avg_multityping": round(self.avg_multityping, 6),
        }
        for r in sorted(self.relation_histogram):
            out[f"relation_count.R{r}"] = self.relation_histogram[r]
        for k in sorted(self.rejections):
            out[f"rejected.{k}"] = self.rejections[k]
        for k in sorted(self.removed):
            out[f"removed.{k}"] = self.removed[k]
        return out


def kg_metrics(kg: KnowledgeGraph, schema: Schema) -> dict[str, float]:
    """Realized typing statistics; a pure function of the graph."""
    n = len(kg.entities)
    typed = [e for e in kg.entities if kg.typing.get(e)]
    depths = schema.hierarchy.depths
    assignments = [depths[c] for e in typed for c in kg.typing[e]]
    observed = {s for s, _, _ in kg.triples} | {o for _, _, o in kg.triples}
    return {
        "prop_untyped": (n - len(typed)) / n if n else 0.0,
        "avg_multityping": len(assignments) / len(typed) if typed else 0.0,
        "avg_depth_specific": sum(assignments) / len(assignments) if assignments else 0.0,
        "num_triples": len(kg.triples),
        "observed_entities": len(observed & set(kg.entities)),
    }


def build_report(kg: KnowledgeGraph, schema: Schema, config: GeneratorConfig) -> GenerationReport:
    m = kg_metrics(kg, schema)
    hist = Counter(p for _, p, _ in kg.triples)
    return GenerationReport(
        requested_entities=config.num_entities,
        requested_triples=config.num_triples,
        realized_entities=len(kg.entities),
        realized_triples=len(kg.triples),
        observed_entities=int(m["observed_entities"]),
        prop_untyped=m["prop_untyped"],
        avg_depth_specific=m["avg_depth_specific"],
        avg_multityping=m["avg_multityping"],
        relation_histogram={p: hist.get(p, 0) for p in range(schema.num_relations)},
    )


# --------------------------------------------------------------------- typing


def _steered_pick(candidates_by_depth: dict[int, list[int]], target: float, mean: float | None, rng: random.Random) -> int:
    depths = sorted(candidates_by_depth)
    if mean is not None:
        side = [d for d in depths if (d >= target if mean < target else d <= target)]
        depths = side or depths
    pool = [c for d in depths for c in candidates_by_depth[d]]
    return rng.choice(pool)


def implied_types(schema: Schema) -> list[frozenset[int] | None]:
    """Classes an instance of each class is forced into (ancestors plus reflexive-loop consequences).

    ``None`` marks a class that cannot have instances at all.
    """
    state = ConstraintState(schema, {})
    out: list[frozenset[int] | None] = []
    for c in range(schema.num_classes):
        try:
            state.assert_type(c, c)
            out.append(frozenset(state.types[c]))
        except Clash:
            out.append(None)
    return out


def _clashes(types: frozenset[int] | set[int], disjoint: list[frozenset[int]]) -> bool:
    return any(types & disjoint[c] for c in types)


def assign_types(
    config: GeneratorConfig, schema: Schema, seed: int | None = None, warnings: list[str] | None = None
) -> dict[int, set[int]]:
    seed = config.seed if seed is None else seed
    rng = random.Random(f"typing:{seed}")
    warnings = [] if warnings is None else warnings
    h = schema.hierarchy
    n = config.num_entities
    if h.num_classes == 0:
        return {}
    n_untyped = round(config.prop_untyped * n)
    untyped = set(rng.sample(range(n), n_untyped))
    typed = [e for e in range(n) if e not in untyped]
    if not typed:
        return {}

    target = config.avg_depth_specific
    implied = implied_types(schema)
    by_depth: dict[int, list[int]] = defaultdict(list)
    for c, d in enumerate(h.depths):
        if implied[c] is not None:
            by_depth[d].append(c)
    if not by_depth:
        warnings.append("no class can be instantiated; all entities left untyped")
        return {}
    window = {d: cs for d, cs in by_depth.items() if abs(d - target) <= 1}
    if not window:
        best = min(by_depth, key=lambda d: (abs(d - target), d))
        window = {best: by_depth[best]}

    typing: dict[int, set[int]] = {}
    total = 0
    for e in typed:
        mean = total / len(typing) if typing else None
        c = _steered_pick(window, target, mean, rng)
        typing[e] = {c}
        total += h.depths[c]

    if config.multityping and config.avg_multityping > 1:
        extra = round((config.avg_multityping - 1) * len(typed))
        disjoint = h.disjoint_with
        closed = {e: set(implied[next(iter(typing[e]))]) for e in typed}
        attempts = 0
        limit = extra * EXTRA_TYPE_ATTEMPTS
        added = 0
        while added < extra and attempts < limit:
            attempts += 1
            e = rng.choice(typed)
            cur = typing[e]
            d = h.depths[next(iter(cur))]
            have = closed[e]
            options = [
                c for c in by_depth.get(d, ()) if c not in cur and not _clashes(frozenset(have | implied[c]), disjoint)
            ]
            if not options:
                continue
            c = rng.choice(options)
            typing[e].add(c)
            have |= implied[c]
            added += 1
        if added < extra:
            warnings.append(f"multityping reached {added} of {extra} additional class assignments")
    return typing


# ------------------------------------------------------------ closure engine


class Clash(Exception):
    def __init__(self, rule: str, cause: str):
        super().__init__(rule)
        self.rule = rule
        self.cause = cause


class ConstraintState:
    """Incrementally maintained closure of a growing graph, with transactional adds.

    ``add`` either commits every consequence of a new triple or raises ``Clash``
    and leaves the state untouched.
    """

    def __init__(self, schema: Schema, typing: dict[int, set[int]]):
        self.schema = schema
        h = schema.hierarchy
        self.up = [h.ancestors[c] | {c} for c in range(h.num_classes)]
        self.disjoint = h.disjoint_with
        rels = schema.relations
        self.flags = [r.flags for r in rels]
        self.dom = [r.domain for r in rels]
        self.rng = [r.range for r in rels]
        self.inv = [r.inverse_of for r in rels]
        self.supers = [schema.superproperties(p) for p in range(len(rels))]
        self.refl_by_class: dict[int, list[int]] = defaultdict(list)
        for p, r in enumerate(rels):
            if "reflexive" in r.flags and r.domain is not None:
                self.refl_by_class[r.domain].append(p)
        self.types: dict[int, set[int]] = defaultdict(set)
        self.out: list[dict[int, set[int]]] = [defaultdict(set) for _ in rels]
        self.inn: list[dict[int, set[int]]] = [defaultdict(set) for _ in rels]
        self._log: list[tuple] = []
        for e in sorted(typing):
            for c in sorted(typing[e]):
                self.assert_type(e, c)

    def assert_type(self, e: int, c: int) -> None:
        """Type ``e`` with ``c`` (plus reflexive loops it triggers), or raise ``Clash`` and change nothing."""
        self._log = []
        work: list = []
        try:
            self._add_type(e, c, "asserted", work)
            self._close(work)
        except Clash:
            self._rollback()
            raise
        self._log = []

    # candidate-level questions -------------------------------------------

    def has(self, p: int, x: int, y: int) -> bool:
        s = self.out[p].get(x)
        return s is not None and y in s

    def type_ok(self, e: int, c: int | None) -> bool:
        if c is None:
            return True
        ts = self.types.get(e)
        return not ts or not (ts & self.disjoint[c])

    # transactional insert -------------------------------------------------

    def add(self, p: int, x: int, y: int, budget: int | None = None) -> int:
        """Insert p(x, y) with all consequences; returns the number of new closure edges.

        With ``budget`` set, an insert that would add more closure edges than
        that is refused with a ``closure-budget`` clash.
        """
        self._log = []
        try:
            n = self._close([(p, x, y, "asserted")], budget)
        except Clash:
            self._rollback()
            raise
        self._log = []
        return n

    def _rollback(self) -> None:
        for entry in reversed(self._log):
            if entry[0] == "e":
                _, p, x, y = entry
                self.out[p][x].discard(y)
                self.inn[p][y].discard(x)
            else:
                _, e, added = entry
                self.types[e] -= added
        self._log = []

    def _add_type(self, e: int, c: int, cause: str, work: list) -> None:
        ts = self.types[e]
        if c in ts:
            return
        if ts & self.disjoint[c]:
            raise Clash("cax-dw", cause)
        added = self.up[c] - ts
        ts |= added
        self._log.append(("t", e, added))
        for a in added:
            for p in self.refl_by_class.get(a, ()):
                work.append((p, e, e, "prp-rfp"))

    def _close(self, work: list, budget: int | None = None) -> int:
        """Drain ``work`` into the closure.

        A transitive relation stays transitively closed after every step: a new
        edge p(x, y) brings in all of pred(x) x succ(y) at once, so derived
        transitive edges never need expanding again.
        """
        count = 0
        out, inn, flags = self.out, self.inn, self.flags
        while work:
            p, x, y, cause = work.pop()
            if y in out[p][x]:
                continue
            f = flags[p]
            if "transitive" in f:
                out_p, inn_p = out[p], inn[p]
                heads = [x, *inn_p.get(x, ())]
                tails = [y, *out_p.get(y, ())]
                pairs = [(w, z) for w in heads for z in tails if z not in out_p.get(w, ())]
            else:
                pairs = [(x, y)]
            for w, z in pairs:
                self._insert(p, w, z, cause if (w, z) == (x, y) else "prp-trp", work)
                count += 1
                if budget is not None and count > budget:
                    raise Clash("closure-budget", cause)
        return count

    def _insert(self, p: int, x: int, y: int, cause: str, work: list) -> None:
        out_p, inn_p = self.out[p], self.inn[p]
        ox = out_p[x]
        f = self.flags[p]
        if f:
            if x == y and ("irreflexive" in f or "asymmetric" in f):
                raise Clash("prp-irp" if "irreflexive" in f else "prp-asyp", cause)
            if "asymmetric" in f and x in out_p.get(y, ()):
                raise Clash("prp-asyp", cause)
            if "functional" in f and ox:
                raise Clash("prp-fp", cause)
            if "inverse_functional" in f and inn_p.get(y):
                raise Clash("prp-ifp", cause)
        ox.add(y)
        inn_p[y].add(x)
        self._log.append(("e", p, x, y))
        d = self.dom[p]
        if d is not None:
            self._add_type(x, d, "prp-dom" if cause == "asserted" else cause, work)
        r = self.rng[p]
        if r is not None:
            self._add_type(y, r, "prp-rng" if cause == "asserted" else cause, work)
        if f:
            if "symmetric" in f:
                work.append((p, y, x, "prp-symp"))
            if "reflexive" in f:
                work.append((p, x, x, "prp-rfp"))
                work.append((p, y, y, "prp-rfp"))
        q = self.inv[p]
        if q is not None:
            work.append((q, y, x, "prp-inv"))
        for s in self.supers[p]:
            work.append((s, x, y, "prp-spo1"))


# ------------------------------------------------------------------ triples


def relation_weights(n: int, balance: float) -> list[float]:
    """Relative frequencies whose min/max ratio equals ``balance``.

    Linear blend of the uniform profile and a geometric skew running from 1 down to 0.
    """
    if n == 1:
        return [1.0]
    q = 0.5
    last = q ** (n - 1)
    skew = [(q**i - last) / (1 - last) for i in range(n)]
    return [balance + (1 - balance) * s for s in skew]


def _quotas(weights: list[float], total: int) -> list[int]:
    s = sum(weights)
    raw = [w / s * total for w in weights]
    base = [int(x) for x in raw]
    rest = total - sum(base)
    order = sorted(range(len(raw)), key=lambda i: (-(raw[i] - base[i]), i))
    for i in order[:rest]:
        base[i] += 1
    return base


class _Pool:
    """Entities not yet used in any triple, with O(1) removal."""

    def __init__(self, items: list[int]):
        self.items = list(items)
        self.pos = {e: i for i, e in enumerate(self.items)}

    def __len__(self) -> int:
        return len(self.items)

    def discard(self, e: int) -> None:
        i = self.pos.pop(e, None)
        if i is None:
            return
        last = self.items.pop()
        if i < len(self.items):
            self.items[i] = last
            self.pos[last] = i


def generate_triples(
    config: GeneratorConfig,
    schema: Schema,
    typing: dict[int, set[int]],
    seed: int | None = None,
    warnings: list[str] | None = None,
) -> tuple[KnowledgeGraph, dict[str, int]]:
    """Sample ``num_triples`` triples; returns the graph and rejection counts by rule."""
    seed = config.seed if seed is None else seed
    rng = random.Random(f"triples:{seed}")
    warnings = [] if warnings is None else warnings
    n_ent = config.num_entities
    entities = list(range(n_ent))
    kg = KnowledgeGraph(entities=entities, typing={e: set(c) for e, c in typing.items() if c})
    rejections: Counter[str] = Counter()
    n_rel = schema.num_relations
    if n_rel == 0 or n_ent == 0:
        return kg, dict(rejections)

    state = ConstraintState(schema, kg.typing)
    h = schema.hierarchy
    disjoint = h.disjoint_with

    # classes a p-edge forces onto its subject and object, and the classes those rule out
    probe = ConstraintState(schema, {})
    bad_subj: list[frozenset[int]] = []
    bad_obj: list[frozenset[int]] = []
    dead: list[int] = []  # relations that cannot hold between any two entities
    for p in range(n_rel):
        try:
            probe.add(p, -2 * p - 1, -2 * p - 2)
        except Clash:
            dead.append(p)
        for side, out in ((-2 * p - 1, bad_subj), (-2 * p - 2, bad_obj)):
            ruled_out: set[int] = set()
            for c in probe.types.get(side, ()):
                ruled_out |= disjoint[c]
            out.append(frozenset(ruled_out))
    transitive_chain = [
        [q for q in [p] + schema.superproperties(p) if "transitive" in state.flags[q]] for p in range(n_rel)
    ]
    # a transitive p-edge adds |pred(x)| x |succ(y)| edges (twice when symmetric); keep both factors small
    wide_subj: list[list[tuple[dict, int]]] = []
    wide_obj: list[list[tuple[dict, int]]] = []
    for p in range(n_rel):
        ws, wo = [], []
        for q in transitive_chain[p]:
            cap = math.isqrt(MAX_CLOSURE_DELTA // (2 if "symmetric" in state.flags[q] else 1))
            ws.append((state.inn[q], cap))
            wo.append((state.out[q], cap))
        wide_subj.append(ws)
        wide_obj.append(wo)

    # entities whose types at first use do not clash with a side; refreshed lazily by ``usable``
    compatible: dict[frozenset[int], list[int]] = {}

    def pool_for(bad: frozenset[int]) -> list[int]:
        if not bad:
            return entities
        if bad not in compatible:
            compatible[bad] = [e for e in entities if not (state.types.get(e, set()) & bad)]
        return compatible[bad]

    weights = relation_weights(n_rel, config.relation_balance)
    perm = list(range(n_rel))
    rng.shuffle(perm)
    quota = [0] * n_rel
    for w_idx, q in enumerate(_quotas(weights, config.num_triples)):
        quota[perm[w_idx]] = q
    # one ticket per outstanding triple, so a uniform ticket draw follows the remaining quotas
    tickets = [p for p in range(n_rel) for _ in range(quota[p])]
    fails = [0] * n_rel
    saturated: set[int] = set()
    fail_limit = 100 + n_ent // 2

    def retire(p: int, tickets: list[int]) -> list[int]:
        # saturated: spread what is left of its quota over the others
        saturated.add(p)
        left = sum(1 for t in tickets if t == p)
        tickets = [t for t in tickets if t != p]
        others = [r for r in range(n_rel) if r not in saturated]
        if others and left:
            for r, extra in zip(others, _quotas([1.0] * len(others), left)):
                tickets.extend([r] * extra)
                fails[r] = 0
        return tickets

    for p in dead:
        tickets = retire(p, tickets)

    unobserved = _Pool(entities)
    rng.shuffle(unobserved.items)
    unobserved.pos = {e: i for i, e in enumerate(unobserved.items)}

    # relations whose functionality a p-edge's subject (resp. object) must respect
    fun_out: list[list[dict]] = []
    fun_in: list[list[dict]] = []
    for p in range(n_rel):
        chain = [p] + schema.superproperties(p)
        fo = [state.out[q] for q in chain if "functional" in state.flags[q]]
        fi = [state.inn[q] for q in chain if "inverse_functional" in state.flags[q]]
        if "symmetric" in state.flags[p]:
            fo, fi = fo + fi, fi + fo
        fun_out.append(fo)
        fun_in.append(fi)

    types = state.types

    def usable(e: int, bad: frozenset[int], taken: list[dict], wide: list[tuple[dict, int]]) -> bool:
        ts = types.get(e)
        if ts and bad and not ts.isdisjoint(bad):
            return False
        if any(t.get(e) for t in taken):
            return False
        return not any(len(d.get(e, ())) >= cap for d, cap in wide)

    def pick(bad: frozenset[int], taken: list[dict], wide: list[tuple[dict, int]]) -> int:
        if len(unobserved):
            for _ in range(4):
                e = unobserved.items[rng.randrange(len(unobserved))]
                if usable(e, bad, taken, wide):
                    return e
        pool = pool_for(bad)
        if not pool:
            return -1
        for _ in range(PICK_TRIES):
            e = pool[rng.randrange(len(pool))]
            if usable(e, bad, taken, wide):
                return e
        return e

    def too_wide(p: int, x: int, y: int) -> bool:
        # lower bound on the transitive fan-out of p(x, y)
        for q in transitive_chain[p]:
            fan = (len(state.inn[q].get(x, ())) + 1) * (len(state.out[q].get(y, ())) + 1)
            if fan * (2 if "symmetric" in state.flags[q] else 1) > MAX_CLOSURE_DELTA:
                return True
        return False

    target = config.num_triples
    while len(kg.order) < target and tickets:
        i = rng.randrange(len(tickets))
        p = tickets[i]
        x = pick(bad_subj[p], fun_out[p], wide_subj[p])
        y = pick(bad_obj[p], fun_in[p], wide_obj[p])
        ok = False
        if x < 0 or y < 0:
            rejections["no-candidate"] += 1
        elif state.has(p, x, y):
            rejections["entailed"] += 1
        elif too_wide(p, x, y):
            rejections["closure-budget"] += 1
        else:
            try:
                state.add(p, x, y, MAX_CLOSURE_DELTA)
                ok = True
            except Clash as c:
                rejections[c.rule] += 1
        if ok:
            t = (x, p, y)
            kg.triples.add(t)
            kg.order.append(t)
            unobserved.discard(x)
            unobserved.discard(y)
            tickets[i] = tickets[-1]
            tickets.pop()
            fails[p] = 0
            continue
        fails[p] += 1
        if fails[p] > fail_limit:
            tickets = retire(p, tickets)
    if len(kg.order) < target:
        warnings.append(f"saturation: generated {len(kg.order)} of {target} requested triples")
    return kg, dict(rejections)


def precheck(kg: KnowledgeGraph, schema: Schema) -> tuple[KnowledgeGraph, dict[str, int]]:
    """Replay the graph through the constraint closure and drop triples that clash.

    Typing is replayed first (later clashing classes dropped), then triples in
    generation order, so an earlier triple always wins over a later one.
    """
    removed: Counter[str] = Counter()
    state = ConstraintState(schema, {})
    typing: dict[int, set[int]] = {}
    for e in sorted(kg.typing):
        for c in sorted(kg.typing[e]):
            try:
                state.assert_type(e, c)
            except Clash as clash:
                removed[clash.rule] += 1
                continue
            typing.setdefault(e, set()).add(c)
    order = list(kg.order) if set(kg.order) == kg.triples and len(kg.order) == len(kg.triples) else sorted(kg.triples)
    kept_triples: list[tuple[int, int, int]] = []
    for s, p, o in order:
        if state.has(p, s, o):
            kept_triples.append((s, p, o))
            continue
        try:
            state.add(p, s, o)
        except Clash as c:
            removed[c.cause if c.rule == "cax-dw" and c.cause in ("prp-dom", "prp-rng") else c.rule] += 1
            continue
        kept_triples.append((s, p, o))
    out = KnowledgeGraph(entities=list(kg.entities), typing=typing, triples=set(kept_triples), order=kept_triples)
    return out, dict(removed)


def generate_kg(config: GeneratorConfig, schema: Schema, seed: int | None = None):
    """Typing, triple sampling and precheck; returns ``(kg, report)``."""
    warnings: list[str] = []
    typing = assign_types(config, schema, seed, warnings)
    kg, rejections = generate_triples(config, schema, typing, seed, warnings)
    kg, removed = precheck(kg, schema)
    report = build_report(kg, schema, config)
    report.rejections = rejections
    report.removed = removed
    report.warnings = warnings
    return kg, report
