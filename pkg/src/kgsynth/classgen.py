"""Class hierarchy construction.

A chain first pins the requested depth, the remaining classes are then attached
one at a time under whichever parent moves the running average depth and
branching ratio closest to their targets (occasionally at random), and finally
disjointness axioms are sampled between unrelated classes.

When the space of level profiles is small enough to enumerate, the greedy
result is compared against the exact optimum and replaced by a random forest
with the optimal shape if it falls short. Realized metrics are then a function
of the targets alone, which keeps them monotone in the requested depth.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .config import GeneratorConfig, depth_profiles
from .schema import ROOT, ClassHierarchy, hierarchy_metrics, pair

RANDOM_CUTOFF = 0.2  # randomness stops once this share of classes is left to place
EXACT_PROFILE_LIMIT = 20_000  # level profiles enumerated for the exact shape search


@dataclass
class ClassGenTrace:
    placements: list[tuple[int, int, str]] = field(default_factory=list)
    moves: list[tuple[int, int, int]] = field(default_factory=list)  # (class, old parent, new parent)
    metrics: dict[str, float] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)


class _Builder:
    def __init__(self, n: int, max_depth: int, avg_depth: float, ratio: float):
        self.n = n
        self.max_depth = max_depth
        self.avg_target = avg_depth
        self.ratio_target = ratio
        self.parent: list[int] = []
        self.depth: list[int] = []
        self.kids = [0] * n
        self.depth_sum = 0
        self.linked = 0
        self.parents = 0

    def attach(self, c: int, p: int) -> None:
        d = 1 if p == ROOT else self.depth[p] + 1
        self.parent.append(p)
        self.depth.append(d)
        self.depth_sum += d
        if p != ROOT:
            self.linked += 1
            if self.kids[p] == 0:
                self.parents += 1
            self.kids[p] += 1

    def distance(self, depth_sum: int, count: int, linked: int, parents: int) -> float:
        ratio = linked / parents if parents else 0.0
        return abs(depth_sum / count - self.avg_target) + abs(ratio - self.ratio_target)

    def candidates(self) -> list[int]:
        return [ROOT] + [c for c, d in enumerate(self.depth) if d < self.max_depth]

    def options(self, depth, kids, depth_sum, count, linked, parents):
        """Placement outcomes as (representative parent, depth_sum, linked, parents) after one more class."""
        seen = {}
        seen[(0, True)] = (ROOT, depth_sum + 1, linked, parents)
        for c, d in enumerate(depth):
            if d >= self.max_depth:
                continue
            key = (d, kids[c] > 0)
            if key not in seen:
                seen[key] = (c, depth_sum + d + 1, linked + 1, parents + (kids[c] == 0))
        return list(seen.values())

    def best_parent(self, lookahead: bool) -> int:
        """Greedy choice with an optional second step of lookahead over outcome classes.

        Outcomes are grouped by (parent depth, parent already has children); the
        lowest class id represents each group, so ties go to the lowest id.
        """
        count = len(self.parent) + 1
        best_key, best_p = None, ROOT
        for p, ds, lk, pa in self.options(self.depth, self.kids, self.depth_sum, count, self.linked, self.parents):
            one = self.distance(ds, count, lk, pa)
            two = one
            if lookahead:
                d_new = 1 if p == ROOT else self.depth[p] + 1
                depth = self.depth + [d_new]
                kids = self.kids[:]
                if p != ROOT:
                    kids[p] += 1
                for _, ds2, lk2, pa2 in self.options(depth, kids, ds, count + 1, lk, pa):
                    two = min(two, self.distance(ds2, count + 1, lk2, pa2))
            key = (round(two, 12), round(one, 12), p)
            if best_key is None or key < best_key:
                best_key, best_p = key, p
        return best_p


def _polish(b: _Builder, trace: ClassGenTrace, max_passes: int = 50) -> None:
    """Re-attach leaves while that strictly lowers the distance to both targets combined.

    Only leaves move, the depth chain built first is left alone, and
    max depth is never exceeded, so the hierarchy stays a valid forest of the
    requested depth.
    """
    n = len(b.parent)
    chain = set(range(min(b.max_depth, n)))
    for _ in range(max_passes):
        current = b.distance(b.depth_sum, n, b.linked, b.parents)
        best = None
        for leaf in range(n):
            if b.kids[leaf] or leaf in chain:
                continue
            old = b.parent[leaf]
            d_old = b.depth[leaf]
            # metrics with the leaf detached
            ds = b.depth_sum - d_old
            lk = b.linked - (old != ROOT)
            pa = b.parents - (old != ROOT and b.kids[old] == 1)
            for new in [ROOT] + list(range(n)):
                if new == old or new == leaf:
                    continue
                if new != ROOT and b.depth[new] >= b.max_depth:
                    continue
                kids_new = b.kids[new] - (new == old) if new != ROOT else 0
                d_new = 1 if new == ROOT else b.depth[new] + 1
                score = b.distance(
                    ds + d_new, n, lk + (new != ROOT), pa + (new != ROOT and kids_new == 0)
                )
                if score < current - 1e-9 and (best is None or score < best[0] - 1e-12):
                    best = (score, leaf, old, new)
        if best is None:
            return
        _, leaf, old, new = best
        if old != ROOT:
            b.kids[old] -= 1
            if b.kids[old] == 0:
                b.parents -= 1
            b.linked -= 1
        b.depth_sum -= b.depth[leaf]
        d_new = 1 if new == ROOT else b.depth[new] + 1
        b.depth[leaf] = d_new
        b.depth_sum += d_new
        b.parent[leaf] = new
        if new != ROOT:
            b.linked += 1
            if b.kids[new] == 0:
                b.parents += 1
            b.kids[new] += 1
        trace.moves.append((leaf, old, new))


def build_tree(config: GeneratorConfig, rng: random.Random, trace: ClassGenTrace) -> list[int]:
    n, max_depth = config.num_classes, config.max_depth
    b = _Builder(n, max_depth, config.avg_depth, config.inheritance_ratio)
    chain = min(n, max_depth)
    for c in range(chain):
        p = ROOT if c == 0 else c - 1
        b.attach(c, p)
        trace.placements.append((c, p, "depth-chain"))
    for c in range(chain, n):
        remaining = n - c
        if remaining > RANDOM_CUTOFF * n and rng.random() < config.alpha:
            p = rng.choice(b.candidates())
            mode = "random"
        else:
            p = b.best_parent(lookahead=remaining > 1)
            mode = "target-driven"
        b.attach(c, p)
        trace.placements.append((c, p, mode))
    _polish(b, trace)
    if n > max_depth and math.comb(n - 1, max_depth - 1) <= EXACT_PROFILE_LIMIT:
        shape = optimal_shape(n, max_depth, config.avg_depth, config.inheritance_ratio)
        got = (b.depth_sum / n, b.linked / b.parents if b.parents else 0.0)
        if not (math.isclose(got[0], shape[0]) and math.isclose(got[1], shape[1])):
            parent = shaped_forest(shape[2], shape[3], rng)
            trace.placements = [(c, p, "exact-shape") for c, p in enumerate(parent)]
            trace.moves = []
            return parent
    return b.parent


def optimal_shape(n: int, max_depth: int, avg_depth: float, ratio: float) -> tuple[float, float, tuple[int, ...], int]:
    """Closest reachable ``(avg_depth, ratio, level sizes, parent count)`` under the L1 distance.

    Ties go to the larger average depth, then the larger ratio.
    """
    best_key, best = None, None
    for prof in depth_profiles(n, max_depth):
        avg = sum((d + 1) * k for d, k in enumerate(prof)) / n
        linked = n - prof[0]
        lo = max_depth - 1
        hi = sum(min(prof[d], prof[d + 1]) for d in range(max_depth - 1))
        ideal = linked / ratio if ratio > 0 else hi
        for p in {lo, hi, min(hi, max(lo, math.floor(ideal))), min(hi, max(lo, math.ceil(ideal)))}:
            r = linked / p if p else 0.0
            key = (round(abs(avg - avg_depth) + abs(r - ratio), 9), -avg, -r, prof, p)
            if best_key is None or key < best_key:
                best_key, best = key, (avg, r, prof, p)
    return best


def shaped_forest(levels: tuple[int, ...], parents: int, rng: random.Random) -> list[int]:
    """A random forest with ``levels[d]`` classes at depth d+1 and ``parents`` classes having children.

    Class ids are handed out level by level, so 0..depth-1 is always a chain.
    """
    depth = len(levels)
    # parents per level: at least one per non-leaf level, at most one per child or per class
    cap = [min(levels[d], levels[d + 1]) for d in range(depth - 1)]
    per = [1] * (depth - 1)
    spare = parents - sum(per)
    open_levels = [d for d in range(depth - 1) if cap[d] > 1]
    while spare > 0:
        d = rng.choice(open_levels)
        per[d] += 1
        spare -= 1
        if per[d] == cap[d]:
            open_levels.remove(d)
    start = [0]
    for k in levels:
        start.append(start[-1] + k)
    parent = [ROOT] * levels[0]
    for d in range(1, depth):
        # first class of each level continues the chain; the other parents are random
        above = list(range(start[d - 1], start[d]))
        chosen = [above[0]] + rng.sample(above[1:], per[d - 1] - 1)
        kids = list(chosen) + [rng.choice(chosen) for _ in range(levels[d] - per[d - 1])]
        parent += [kids[0]] + sorted(kids[1:])
    return parent


def add_disjointness(h: ClassHierarchy, target: float, rng: random.Random) -> None:
    """Declare disjoint pairs until the share of classes in some pair is closest to ``target``."""
    n = h.num_classes
    goal = target * n
    involved: set[int] = set()
    legal = [
        (a, b)
        for a in range(n)
        for b in range(a + 1, n)
        if not h.is_ancestor(a, b) and not h.is_ancestor(b, a)
    ]
    rng.shuffle(legal)
    while True:
        now = abs(len(involved) - goal)
        options = sorted((abs(len(involved) + k - goal), -k) for k in (2, 1))
        chosen = None
        for score, neg_k in options:
            if score >= now - 1e-9:
                continue
            k = -neg_k
            for i, (a, b) in enumerate(legal):
                fresh = (a not in involved) + (b not in involved)
                if fresh == k and not _derivable(h, a, b):
                    chosen = i
                    break
            if chosen is not None:
                break
        if chosen is None:
            return
        a, b = legal.pop(chosen)
        h.disjoint_pairs.add(pair(a, b))
        involved.update((a, b))
        h.invalidate()


def _derivable(h: ClassHierarchy, a: int, b: int) -> bool:
    up_a = h.ancestors[a] | {a}
    up_b = h.ancestors[b] | {b}
    return any(pair(x, y) in h.disjoint_pairs for x in up_a for y in up_b)


def generate_class_hierarchy(config: GeneratorConfig, seed: int | None = None) -> tuple[ClassHierarchy, ClassGenTrace]:
    seed = config.seed if seed is None else seed
    rng = random.Random(f"classes:{seed}")
    trace = ClassGenTrace()
    parent = build_tree(config, rng, trace)
    h = ClassHierarchy(parent=list(parent))
    add_disjointness(h, config.avg_disjointness, rng)
    metrics = hierarchy_metrics(h)
    trace.metrics = metrics
    if abs(metrics["avg_depth"] - config.avg_depth) > 0.3:
        trace.warnings.append(f"avg_depth reached {metrics['avg_depth']:.2f} (target {config.avg_depth})")
    if abs(metrics["inheritance_ratio"] - config.inheritance_ratio) > 0.5:
        trace.warnings.append(
            f"inheritance_ratio reached {metrics['inheritance_ratio']:.2f} (target {config.inheritance_ratio})"
        )
    if abs(metrics["disjointness_proportion"] - config.avg_disjointness) > 0.05:
        trace.warnings.append(
            f"disjointness proportion reached {metrics['disjointness_proportion']:.2f} (target {config.avg_disjointness})"
        )
    return h, trace
