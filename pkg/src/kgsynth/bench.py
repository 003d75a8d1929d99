"""The 9 x 3 schema/graph benchmark grid with per-stage timings."""

from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .config import GeneratorConfig

# name: (classes, max depth, avg depth, disjointness, relations, specificity, shared property proportion)
SCHEMA_ROWS: dict[str, tuple[int, int, float, float, int, float, float]] = {
    "S1": (25, 3, 1.5, 0.1, 25, 1.5, 0.1),
    "S2": (25, 3, 1.5, 0.2, 25, 1.5, 0.2),
    "S3": (25, 3, 1.5, 0.3, 25, 1.5, 0.3),
    "S4": (100, 4, 2.5, 0.1, 100, 2.5, 0.1),
    "S5": (100, 4, 2.5, 0.2, 100, 2.5, 0.2),
    "S6": (100, 4, 2.5, 0.3, 100, 2.5, 0.3),
    "S7": (250, 5, 3.0, 0.1, 250, 3.0, 0.1),
    "S8": (250, 5, 3.0, 0.2, 250, 3.0, 0.2),
    "S9": (250, 5, 3.0, 0.3, 250, 3.0, 0.3),
}

# name: (entities, triples, untyped, specific depth, multityping)
GRAPH_ROWS: dict[str, tuple[int, int, float, float, float]] = {
    "G1": (100, 1_000, 0.3, 2.0, 2.0),
    "G2": (1_000, 10_000, 0.3, 2.0, 2.0),
    "G3": (10_000, 100_000, 0.3, 2.0, 2.0),
}

PROPERTY_KEYS = (
    "prop_reflexive",
    "prop_irreflexive",
    "prop_asymmetric",
    "prop_symmetric",
    "prop_transitive",
    "prop_inverseof",
    # not in the schema table; they share the row value
    "prop_functional",
    "prop_inversefunctional",
    "prop_subproperties",
)


def cell_config(schema_row: str, graph_row: str, seed: int = 42, base: GeneratorConfig | None = None) -> GeneratorConfig:
    nc, md, ad, cd, nr, rs, prop = SCHEMA_ROWS[schema_row]
    ne, nt, unt, asc, mul = GRAPH_ROWS[graph_row]
    values = dict(
        num_classes=nc,
        max_depth=md,
        avg_depth=ad,
        avg_disjointness=cd,
        num_relations=nr,
        relation_specificity=rs,
        num_entities=ne,
        num_triples=nt,
        prop_untyped=unt,
        avg_depth_specific=asc,
        multityping=True,
        avg_multityping=mul,
        seed=seed,
    )
    values.update({k: prop for k in PROPERTY_KEYS})
    return (base or GeneratorConfig()).replace(**values)


@dataclass
class GridSpec:
    schema_rows: tuple[str, ...] = tuple(SCHEMA_ROWS)
    graph_rows: tuple[str, ...] = tuple(GRAPH_ROWS)
    seeds: tuple[int, ...] = (42,)

    def cells(self):
        for s in self.schema_rows:
            for g in self.graph_rows:
                for seed in self.seeds:
                    yield s, g, seed


@dataclass
class CellResult:
    schema_row: str
    graph_row: str
    seed: int
    consistent: bool = False
    schema_consistent: bool = False
    metrics: dict[str, float] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    error: str | None = None


def run_cell(schema_row: str, graph_row: str, seed: int) -> CellResult:
    from .pipeline import run_pipeline

    res = CellResult(schema_row, graph_row, seed)
    try:
        run = run_pipeline(cell_config(schema_row, graph_row, seed))
    except Exception as exc:  # recorded, the grid keeps going
        res.error = f"{type(exc).__name__}: {exc}"
        return res
    res.consistent = run.kg_report is not None and run.kg_report.consistent
    res.schema_consistent = run.schema_report.consistent
    res.metrics = run.metrics()
    res.timings = run.timings.as_dict()
    res.warnings = list(run.warnings)
    return res


def run_grid(spec: GridSpec | None = None, seeds=None, progress=None, workers: int = 1) -> list[CellResult]:
    """Run every cell; results come back in cell order whatever ``workers`` is."""
    spec = spec or GridSpec()
    if seeds is not None:
        spec = GridSpec(spec.schema_rows, spec.graph_rows, tuple(seeds))
    cells = list(spec.cells())
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_timed_cell, *cell) for cell in cells]
            out = []
            for fut in futures:
                r, elapsed = fut.result()
                out.append(r)
                if progress:
                    progress(r, elapsed)
            return out
    out = []
    for cell in cells:
        r, elapsed = _timed_cell(*cell)
        out.append(r)
        if progress:
            progress(r, elapsed)
    return out


def _timed_cell(schema_row: str, graph_row: str, seed: int) -> tuple[CellResult, float]:
    t0 = time.perf_counter()
    r = run_cell(schema_row, graph_row, seed)
    return r, time.perf_counter() - t0


COLUMNS = (
    "cell",
    "seed",
    "consistent",
    "triples",
    "avg_depth",
    "max_depth",
    "untyped",
    "multityping",
    "depth_specific",
    "class_gen",
    "relation_gen",
    "schema_check",
    "typing",
    "triple_gen",
    "precheck",
    "kg_check",
)


def _row(r: CellResult) -> list[str]:
    m, t = r.metrics, r.timings
    return [
        f"{r.schema_row}x{r.graph_row}",
        str(r.seed),
        "error" if r.error else ("yes" if r.consistent else "no"),
        str(int(m.get("num_triples", 0))),
        f"{m.get('avg_depth', 0):.2f}",
        str(int(m.get("max_depth", 0))),
        f"{m.get('prop_untyped', 0):.3f}",
        f"{m.get('avg_multityping', 0):.2f}",
        f"{m.get('avg_depth_specific', 0):.2f}",
        *(f"{t.get(k, 0):.3f}" for k in COLUMNS[9:]),
    ]


def render_table(results: list[CellResult]) -> str:
    rows = [list(COLUMNS)] + [_row(r) for r in results]
    widths = [max(len(r[i]) for r in rows) for i in range(len(COLUMNS))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in rows]
    return "\n".join(lines) + "\n"


def render_csv(results: list[CellResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in results:
        w.writerow(_row(r))
    return buf.getvalue()
