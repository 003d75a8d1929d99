"""Command line entry point: ``kgsynth template|generate|check|matrix``.

Exit codes: 0 consistent / success, 1 configuration, parse or I/O problem,
2 inconsistent artifacts (which are still written unless discarded).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from pathlib import Path

from .config import ConfigError, emit_template, load_config, validate_config
from .pipeline import PipelineRun, run_pipeline
from .reasoner import check_consistency
from .relgen import compatibility_matrix, render_matrix
from .serializer import NTriplesError, graph_files, parse_files, render_stats

log = logging.getLogger("kgsynth")

EXIT_OK, EXIT_ERROR, EXIT_INCONSISTENT = 0, 1, 2


def _formats(value: str) -> tuple[str, ...]:
    out = tuple(v.strip() for v in value.split(",") if v.strip())
    bad = [v for v in out if v not in ("ntriples", "turtle")]
    if bad or not out:
        raise argparse.ArgumentTypeError(f"unknown format(s): {', '.join(bad) or value!r}")
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kgsynth", description="Synthetic schema and knowledge graph generator.")
    ap.add_argument("--quiet", action="store_true", help="only print warnings and errors")
    sub = ap.add_subparsers(dest="command", required=True)

    t = sub.add_parser("template", help="write a commented configuration template")
    t.add_argument("path", nargs="?", help="output file (default template.yml / template.json)")
    t.add_argument("--format", choices=("yaml", "json"), default="yaml")
    t.add_argument("--force", action="store_true", help="overwrite an existing file")

    g = sub.add_parser("generate", help="generate a schema and/or knowledge graph")
    g.add_argument("config", help="YAML or JSON configuration file")
    g.add_argument("--mode", choices=("schema", "kg", "both"), default="both")
    g.add_argument("--schema", help="existing schema.nt (required for --mode kg)")
    g.add_argument("--seed", type=int, help="override the configured seed")
    g.add_argument("--output-dir", help="override the configured output directory")
    g.add_argument("--run-name", help="subdirectory name (default: <config stem>-seed<seed>)")
    g.add_argument("--format", type=_formats, help="comma-separated subset of ntriples,turtle")
    g.add_argument("--force", action="store_true", help="overwrite existing artifacts")
    g.add_argument("--jsonl", action="store_true", help="also write report.jsonl")
    g.add_argument("--matrix", action="store_true", help="also write compatibility_matrix.txt")
    g.add_argument("--discard-inconsistent", action="store_true", help="do not store inconsistent artifacts")
    g.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS)

    c = sub.add_parser("check", help="check an N-Triples KG against its schema")
    c.add_argument("kg")
    c.add_argument("schema")
    c.add_argument("--limit", type=int, default=100, help="stop after this many violations")
    c.add_argument("--jsonl", help="write violations as JSON lines to this file")
    c.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS)

    m = sub.add_parser("matrix", help="print the property compatibility matrix")
    m.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS)
    return ap


def cmd_template(args) -> int:
    path = Path(args.path or ("template.yml" if args.format == "yaml" else "template.json"))
    if path.exists() and not args.force:
        log.error("%s already exists (use --force to overwrite)", path)
        return EXIT_ERROR
    try:
        path.write_text(emit_template(args.format), encoding="utf-8")
    except OSError as exc:
        log.error("cannot write %s: %s", path, exc)
        return EXIT_ERROR
    log.info("wrote %s", path)
    return EXIT_OK


def _stats(run: PipelineRun) -> dict[str, object]:
    values: dict[str, object] = {f"config.{k}": v for k, v in run.config.to_dict().items()}
    for k, v in run.metrics().items():
        values[f"realized.{k}"] = v
    if run.generation is not None:
        for k, v in run.generation.as_stats().items():
            values[f"kg.{k}"] = v
    values["schema_consistent"] = run.schema_report.consistent
    if run.kg_report is not None:
        values["kg_consistent"] = run.kg_report.consistent
        values["closure_size"] = run.kg_report.closure_size
        values["iterations"] = run.kg_report.iterations
    values["warnings"] = len(run.warnings)
    for i, w in enumerate(run.warnings):
        values[f"warning.{i}"] = w
    return values


def _report_text(run: PipelineRun) -> str:
    parts = ["[schema]", run.schema_report.render_text()]
    if run.kg_report is not None:
        parts += ["[kg]", run.kg_report.render_text()]
    return "\n".join(parts)


def cmd_generate(args) -> int:
    try:
        config = load_config(args.config)
    except FileNotFoundError:
        log.error("config file not found: %s", args.config)
        return EXIT_ERROR
    except ConfigError as exc:
        log.error("%s: %s", args.config, exc)
        return EXIT_ERROR
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.output_dir is not None:
        overrides["output_dir"] = args.output_dir
    if args.format is not None:
        overrides["formats"] = args.format
    config = config.replace(**overrides)
    report = validate_config(config)
    for line in report.lines():
        (log.error if line.startswith("error") else log.warning)("%s", line)
    if not report.ok:
        return EXIT_ERROR

    schema = None
    if args.mode == "kg":
        if not args.schema:
            log.error("--mode kg needs --schema PATH")
            return EXIT_ERROR
        if not os.path.exists(args.schema):
            log.error("schema file not found: %s", args.schema)
            return EXIT_ERROR
        try:
            schema = parse_files(args.schema).schema
        except (NTriplesError, ValueError) as exc:
            log.error("cannot read schema: %s", exc)
            return EXIT_ERROR

    run_name = args.run_name or f"{Path(args.config).stem}-seed{config.seed}"
    outdir = Path(config.output_dir) / run_name
    if outdir.exists() and any(outdir.iterdir()) and not args.force:
        log.error("%s is not empty (use --force to overwrite)", outdir)
        return EXIT_ERROR

    t0 = time.perf_counter()
    run = run_pipeline(config, mode=args.mode, schema=schema)
    for w in run.warnings:
        log.warning("%s", w)

    consistent = run.consistent
    if not consistent:
        log.warning("generated artifacts are inconsistent; see report.txt")
        if args.discard_inconsistent:
            log.warning("artifacts discarded")
            return EXIT_INCONSISTENT

    with run.timings.stage("serialization"):
        files = graph_files(run.schema, run.kg, config.formats)
    if args.matrix:
        files["compatibility_matrix.txt"] = render_matrix(compatibility_matrix())
    files["report.txt"] = _report_text(run)
    if args.jsonl:
        lines = run.schema_report.to_jsonl()
        if run.kg_report is not None:
            lines += run.kg_report.to_jsonl()
        files["report.jsonl"] = lines
    stats = _stats(run)
    stats["total_runtime"] = time.perf_counter() - t0
    stats.update({f"timing.{k}": v for k, v in run.timings.as_dict().items()})
    files["stats.txt"] = render_stats(stats)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
        for name, content in files.items():
            (outdir / name).write_text(content, encoding="utf-8")
    except OSError as exc:
        log.error("cannot write artifacts: %s", exc)
        return EXIT_ERROR
    log.info("wrote %d files to %s", len(files), outdir)
    if run.kg is not None:
        log.info(
            "%d entities, %d triples, consistent: %s",
            len(run.kg.entities),
            len(run.kg.triples),
            "yes" if consistent else "no",
        )
    return EXIT_OK if consistent else EXIT_INCONSISTENT


def cmd_check(args) -> int:
    for path in (args.kg, args.schema):
        if not os.path.exists(path):
            log.error("file not found: %s", path)
            return EXIT_ERROR
    try:
        parsed = parse_files(args.schema, args.kg)
    except (NTriplesError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_ERROR
    if parsed.skipped:
        log.warning("skipped %d statements outside the supported vocabulary", len(parsed.skipped))
    report = check_consistency(parsed.schema, parsed.kg, limit=args.limit)
    sys.stdout.write(report.render_text())
    if args.jsonl:
        Path(args.jsonl).write_text(report.to_jsonl(), encoding="utf-8")
    return EXIT_OK if report.consistent else EXIT_INCONSISTENT


def cmd_matrix(args) -> int:
    sys.stdout.write(render_matrix(compatibility_matrix()))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if getattr(args, "quiet", False) else logging.INFO,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )
    handler = {"template": cmd_template, "generate": cmd_generate, "check": cmd_check, "matrix": cmd_matrix}
    return handler[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
