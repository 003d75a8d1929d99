"""Schema -> check -> KG -> check, with per-stage wall-clock timings."""

from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import dataclass, field, fields

from .classgen import generate_class_hierarchy
from .config import GeneratorConfig
from .kggen import GenerationReport, KnowledgeGraph, assign_types, build_report, generate_triples, kg_metrics, precheck
from .reasoner import ConsistencyReport, check_consistency, check_schema_consistency
from .relgen import generate_relations
from .schema import Schema, hierarchy_metrics, relation_metrics


@dataclass
class RunTimings:
    class_gen: float = 0.0
    relation_gen: float = 0.0
    schema_check: float = 0.0
    typing: float = 0.0
    triple_gen: float = 0.0
    precheck: float = 0.0
    kg_check: float = 0.0
    serialization: float = 0.0

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @contextmanager
    def stage(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            setattr(self, name, getattr(self, name) + time.perf_counter() - t0)


@dataclass
class PipelineRun:
    config: GeneratorConfig
    schema: Schema
    schema_report: ConsistencyReport
    kg: KnowledgeGraph | None = None
    kg_report: ConsistencyReport | None = None
    generation: GenerationReport | None = None
    timings: RunTimings = field(default_factory=RunTimings)
    warnings: list[str] = field(default_factory=list)

    @property
    def consistent(self) -> bool:
        if not self.schema_report.consistent:
            return False
        return self.kg_report is None or self.kg_report.consistent

    def metrics(self) -> dict[str, float]:
        out: dict[str, float] = {}
        if self.schema.num_classes:
            out.update(hierarchy_metrics(self.schema.hierarchy))
        out.update(relation_metrics(self.schema))
        if self.kg is not None:
            out.update(kg_metrics(self.kg, self.schema))
        return out


def build_schema(config: GeneratorConfig, timings: RunTimings, warnings: list[str]) -> Schema:
    with timings.stage("class_gen"):
        h, trace = generate_class_hierarchy(config)
    warnings.extend(trace.warnings)
    with timings.stage("relation_gen"):
        rels, rw = generate_relations(config, h)
    warnings.extend(rw)
    return Schema(h, rels)


def build_kg(config: GeneratorConfig, schema: Schema, timings: RunTimings, warnings: list[str]):
    with timings.stage("typing"):
        typing = assign_types(config, schema, warnings=warnings)
    with timings.stage("triple_gen"):
        kg, rejections = generate_triples(config, schema, typing, warnings=warnings)
    with timings.stage("precheck"):
        kg, removed = precheck(kg, schema)
    report = build_report(kg, schema, config)
    report.rejections = rejections
    report.removed = removed
    report.warnings = list(warnings)
    return kg, report


def run_pipeline(
    config: GeneratorConfig,
    mode: str = "both",
    schema: Schema | None = None,
    violation_limit: int | None = 100,
) -> PipelineRun:
    """Run the stages for ``mode`` (``schema``, ``kg`` or ``both``); ``kg`` needs ``schema``."""
    timings = RunTimings()
    warnings: list[str] = []
    if schema is None:
        if mode == "kg":
            raise ValueError("mode 'kg' needs an existing schema")
        schema = build_schema(config, timings, warnings)
    with timings.stage("schema_check"):
        schema_report = check_schema_consistency(schema)
    run = PipelineRun(config, schema, schema_report, timings=timings, warnings=warnings)
    if mode == "schema":
        return run
    run.kg, run.generation = build_kg(config, schema, timings, warnings)
    with timings.stage("kg_check"):
        run.kg_report = check_consistency(schema, run.kg, limit=violation_limit)
    return run
