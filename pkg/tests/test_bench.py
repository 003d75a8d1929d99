import csv
import io
import subprocess
import sys
from pathlib import Path

from kgsynth.bench import (
    COLUMNS,
    GRAPH_ROWS,
    PROPERTY_KEYS,
    SCHEMA_ROWS,
    CellResult,
    GridSpec,
    cell_config,
    render_csv,
    render_table,
    run_cell,
    run_grid,
)

ROOT = Path(__file__).resolve().parents[1]


def test_grid_shape_and_values():
    assert len(list(GridSpec().cells())) == 27
    assert SCHEMA_ROWS["S5"] == (100, 4, 2.5, 0.2, 100, 2.5, 0.2)
    assert GRAPH_ROWS["G3"] == (10_000, 100_000, 0.3, 2.0, 2.0)


def test_cell_config_maps_columns():
    cfg = cell_config("S8", "G2", seed=9)
    assert (cfg.num_classes, cfg.max_depth, cfg.avg_depth, cfg.avg_disjointness) == (250, 5, 3.0, 0.2)
    assert (cfg.num_relations, cfg.relation_specificity) == (250, 3.0)
    assert all(getattr(cfg, k) == 0.2 for k in PROPERTY_KEYS)
    assert (cfg.num_entities, cfg.num_triples, cfg.prop_untyped) == (1_000, 10_000, 0.3)
    assert cfg.multityping and cfg.avg_multityping == 2.0 and cfg.avg_depth_specific == 2.0
    assert cfg.seed == 9


def test_run_cell_records_errors(monkeypatch):
    import kgsynth.pipeline

    def boom(config):
        raise RuntimeError("nope")

    monkeypatch.setattr(kgsynth.pipeline, "run_pipeline", boom)
    r = run_cell("S1", "G1", 1)
    assert r.error == "RuntimeError: nope"
    assert not r.consistent


def test_g1_column_reaches_requested_triples():
    seen = []
    results = run_grid(GridSpec(graph_rows=("G1",)), progress=lambda r, t: seen.append(r.schema_row))
    assert seen == list(SCHEMA_ROWS)
    for r in results:
        assert r.consistent and r.error is None
        assert r.metrics["num_triples"] == 1_000 or any(w.startswith("saturation") for w in r.warnings)


def test_grid_is_reproducible():
    spec = GridSpec(schema_rows=("S2",), graph_rows=("G1",), seeds=(4, 5))
    a = [(r.metrics, r.warnings) for r in run_grid(spec)]
    b = [(r.metrics, r.warnings) for r in run_grid(spec)]
    assert a == b


def test_workers_preserve_order():
    spec = GridSpec(schema_rows=("S1", "S4"), graph_rows=("G1",), seeds=(1,))
    serial = [(r.schema_row, r.metrics) for r in run_grid(spec)]
    pooled = [(r.schema_row, r.metrics) for r in run_grid(spec, workers=2)]
    assert serial == pooled


def test_rendering():
    r = CellResult("S1", "G1", 42, consistent=True, metrics={"num_triples": 1000, "avg_depth": 1.5, "max_depth": 3})
    table = render_table([r])
    assert table.splitlines()[0].split() == list(COLUMNS)
    rows = list(csv.reader(io.StringIO(render_csv([r]))))
    assert rows[0] == list(COLUMNS)
    assert rows[1][:4] == ["S1xG1", "42", "yes", "1000"]


def test_run_grid_script(tmp_path):
    out = tmp_path / "grid"
    proc = subprocess.run(
        [sys.executable, str(ROOT / "scripts" / "run_grid.py"), "--schemas", "S1", "--graphs", "G1", "--seeds", "1,2", "--out", str(out)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert "S1 G1 seed=2: consistent" in proc.stderr
    assert len(out.with_suffix(".csv").read_text().splitlines()) == 3
