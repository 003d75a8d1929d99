"""Generator configuration: flat key/value files in YAML or JSON form.

Every generation parameter lives in one flat mapping. Missing keys take the
defaults below (the smallest schema/graph pairing of the benchmark grid), and
unknown keys are rejected so that typos never silently fall back to a default.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from typing import Any

import yaml

FORMATS = ("ntriples", "turtle")

# Parameter name -> (section, description). Order is the template order.
PARAMETERS: dict[str, tuple[str, str]] = {
    "num_classes": ("classes", "Number of classes"),
    "max_depth": ("classes", "Depth of the class hierarchy"),
    "avg_depth": ("classes", "Average class depth"),
    "inheritance_ratio": ("classes", "Proportion of rdfs:subClassOf (mean named children per named parent)"),
    "avg_disjointness": ("classes", "Proportion of owl:disjointWith (share of classes in a disjointness axiom)"),
    "num_relations": ("relations", "Number of relations"),
    "prop_profiled_relations": ("relations", "Proportion of rdfs:domain and rdfs:range"),
    "relation_specificity": ("relations", "Average depth of rdfs:domain and rdfs:range"),
    "prop_asymmetric": ("relations", "Proportion of owl:AsymmetricProperty"),
    "prop_symmetric": ("relations", "Proportion of owl:SymmetricProperty"),
    "prop_irreflexive": ("relations", "Proportion of owl:IrreflexiveProperty"),
    "prop_reflexive": ("relations", "Proportion of owl:ReflexiveProperty"),
    "prop_transitive": ("relations", "Proportion of owl:TransitiveProperty"),
    "prop_functional": ("relations", "Proportion of owl:FunctionalProperty"),
    "prop_inversefunctional": ("relations", "Proportion of owl:InverseFunctionalProperty"),
    "prop_inverseof": ("relations", "Proportion of owl:inverseOf"),
    "prop_subproperties": ("relations", "Proportion of rdfs:subPropertyOf"),
    "num_entities": ("individuals", "Number of entities"),
    "num_triples": ("individuals", "Number of triples"),
    "relation_balance": ("individuals", "Relation distribution across triples (1 = uniform, 0 = maximally skewed)"),
    "prop_untyped": ("individuals", "Proportion of untyped entities"),
    "avg_depth_specific": ("individuals", "Average depth of most specific class"),
    "multityping": ("individuals", "Whether entities are multi-typed"),
    "avg_multityping": ("individuals", "Average number of most-specific classes per typed entity"),
}

RUN_KEYS: dict[str, str] = {
    "seed": "Random seed; generation is a pure function of the configuration and this seed",
    "output_dir": "Directory receiving one sub-directory per run",
    "formats": "Serialization formats, any of: ntriples, turtle",
    "alpha": "Advanced: probability of placing a class at random during hierarchy construction",
}

PROPORTION_KEYS = (
    "avg_disjointness",
    "prop_profiled_relations",
    "prop_asymmetric",
    "prop_symmetric",
    "prop_irreflexive",
    "prop_reflexive",
    "prop_transitive",
    "prop_functional",
    "prop_inversefunctional",
    "prop_inverseof",
    "prop_subproperties",
    "relation_balance",
    "prop_untyped",
    "alpha",
)

COMMENTS_KEY = "_comments"  # JSON has no comment syntax; descriptions live under this key


class ConfigError(ValueError):
    """Raised for unparseable or structurally invalid configuration text."""

    def __init__(self, message: str, key: str | None = None, line: int | None = None, column: int | None = None):
        super().__init__(message)
        self.key = key
        self.line = line
        self.column = column


@dataclass(frozen=True)
class GeneratorConfig:
    num_classes: int = 25
    max_depth: int = 3
    avg_depth: float = 1.5
    inheritance_ratio: float = 2.5
    avg_disjointness: float = 0.1
    num_relations: int = 25
    prop_profiled_relations: float = 0.9
    relation_specificity: float = 1.5
    prop_asymmetric: float = 0.1
    prop_symmetric: float = 0.1
    prop_irreflexive: float = 0.1
    prop_reflexive: float = 0.1
    prop_transitive: float = 0.1
    prop_functional: float = 0.1
    prop_inversefunctional: float = 0.1
    prop_inverseof: float = 0.1
    prop_subproperties: float = 0.1
    num_entities: int = 100
    num_triples: int = 1000
    relation_balance: float = 0.9
    prop_untyped: float = 0.3
    avg_depth_specific: float = 2.0
    multityping: bool = True
    avg_multityping: float = 2.0
    seed: int = 42
    output_dir: str = "output"
    formats: tuple[str, ...] = ("ntriples",)
    alpha: float = 0.1

    @property
    def effective_multityping(self) -> float:
        return self.avg_multityping if self.multityping else 1.0

    def replace(self, **changes: Any) -> "GeneratorConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        d["formats"] = list(self.formats)
        return d


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(GeneratorConfig)}
ALL_KEYS = tuple(_FIELD_TYPES)


@dataclass
class ValidationReport:
    errors: list[tuple[str, str]] = field(default_factory=list)
    warnings: list[tuple[str, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def __bool__(self) -> bool:
        return bool(self.errors or self.warnings)

    def lines(self) -> list[str]:
        return [f"error: {k}: {m}" for k, m in self.errors] + [f"warning: {k}: {m}" for k, m in self.warnings]


def _coerce(key: str, value: Any) -> Any:
    kind = _FIELD_TYPES[key]
    if kind == "bool":
        if isinstance(value, bool):
            return value
        raise ConfigError(f"{key}: expected a boolean, got {value!r}", key=key)
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            if isinstance(value, float) and value.is_integer():
                return int(value)
            raise ConfigError(f"{key}: expected an integer, got {value!r}", key=key)
        return value
    if kind == "float":
        if isinstance(value, str):
            # YAML 1.1 reads exponent forms such as 1e-3 as strings
            try:
                return float(value)
            except ValueError:
                pass
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key}: expected a number, got {value!r}", key=key)
        return float(value)
    if kind == "str":
        if not isinstance(value, str):
            raise ConfigError(f"{key}: expected a string, got {value!r}", key=key)
        return value
    # formats
    if isinstance(value, str):
        value = [value]
    if not isinstance(value, (list, tuple)) or not all(isinstance(v, str) for v in value):
        raise ConfigError(f"{key}: expected a list of format names, got {value!r}", key=key)
    return tuple(value)


def config_from_mapping(data: dict[str, Any] | None) -> GeneratorConfig:
    if data is None:
        return GeneratorConfig()
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a mapping of keys to values")
    values = {}
    for key, value in data.items():
        if key == COMMENTS_KEY:
            continue
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown configuration key: {key}", key=key)
        values[key] = _coerce(key, value)
    return GeneratorConfig(**values)


def parse_config(text: str, format: str = "yaml") -> GeneratorConfig:
    """Parse configuration text; ``format`` is ``"yaml"`` or ``"json"``."""
    if format in ("yaml", "yml"):
        try:
            data = yaml.safe_load(text)
        except yaml.MarkedYAMLError as exc:
            mark = exc.problem_mark
            line = mark.line + 1 if mark else None
            col = mark.column + 1 if mark else None
            raise ConfigError(f"YAML syntax error at line {line}, column {col}: {exc.problem}", line=line, column=col) from exc
        except yaml.YAMLError as exc:
            raise ConfigError(f"YAML syntax error: {exc}") from exc
    elif format == "json":
        if not text.strip():
            data = None
        else:
            try:
                data = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ConfigError(
                    f"JSON syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}",
                    line=exc.lineno,
                    column=exc.colno,
                ) from exc
    else:
        raise ValueError(f"unsupported config format: {format}")
    return config_from_mapping(data)


def load_config(path) -> GeneratorConfig:
    from pathlib import Path

    path = Path(path)
    fmt = "json" if path.suffix.lower() == ".json" else "yaml"
    return parse_config(path.read_text(encoding="utf-8"), fmt)


def depth_profiles(n: int, depth: int):
    """Yield (n_1, ..., n_depth) with every level non-empty and summing to n."""
    if depth == 1:
        yield (n,)
        return
    for first in range(1, n - depth + 2):
        for rest in depth_profiles(n - first, depth - 1):
            yield (first,) + rest


_EXHAUSTIVE_LIMIT = 200_000  # max number of depth profiles to enumerate
_FEASIBILITY_TOL = 0.2


def _hierarchy_targets_feasible(n: int, max_depth: int, avg_depth: float, ratio: float) -> bool:
    """Is there a forest with the given depth whose avg depth and branching are both near target?

    Works on depth profiles: the parent count at level d-1 can be anything from 1
    to min(n_{d-1}, n_d), so the branching ratio is (n - n_1) / P for P in that range.
    """
    if max_depth == 1:
        return abs(avg_depth - 1.0) <= _FEASIBILITY_TOL and ratio <= _FEASIBILITY_TOL
    for prof in depth_profiles(n, max_depth):
        avg = sum((d + 1) * c for d, c in enumerate(prof)) / n
        if abs(avg - avg_depth) > _FEASIBILITY_TOL:
            continue
        linked = n - prof[0]
        p_min = max_depth - 1
        p_max = sum(min(prof[d - 1], prof[d]) for d in range(1, max_depth))
        for p in range(p_min, p_max + 1):
            if abs(linked / p - ratio) <= _FEASIBILITY_TOL:
                return True
    return False


def validate_config(config: GeneratorConfig) -> ValidationReport:
    report = ValidationReport()
    err = report.errors.append
    warn = report.warnings.append

    for key in ("num_classes", "max_depth", "num_relations", "num_entities", "num_triples"):
        if getattr(config, key) < 1:
            err((key, "must be a positive integer"))
    for key in PROPORTION_KEYS:
        v = getattr(config, key)
        if not (0.0 <= v <= 1.0) or math.isnan(v):
            err((key, f"must lie in [0, 1], got {v}"))
    if config.avg_depth < 1:
        err(("avg_depth", "must be at least 1"))
    if config.avg_depth > config.max_depth:
        err(("avg_depth", f"avg_depth ({config.avg_depth}) exceeds max_depth ({config.max_depth})"))
    if config.relation_specificity < 1:
        err(("relation_specificity", "must be at least 1"))
    if config.avg_depth_specific < 1:
        err(("avg_depth_specific", "must be at least 1"))
    if config.avg_depth_specific > config.max_depth:
        err(("avg_depth_specific", f"avg_depth_specific ({config.avg_depth_specific}) exceeds max_depth ({config.max_depth})"))
    if config.avg_multityping < 1:
        err(("avg_multityping", "must be at least 1"))
    if config.inheritance_ratio <= 0:
        err(("inheritance_ratio", "must be positive"))
    if not 0 <= config.seed < 2**64:
        err(("seed", "must be a 64-bit unsigned integer"))
    if not config.formats:
        err(("formats", "at least one serialization format is required"))
    for fmt in config.formats:
        if fmt not in FORMATS:
            err(("formats", f"unknown format {fmt!r}; choose from {', '.join(FORMATS)}"))
    if report.errors:
        return report

    n, depth = config.num_classes, config.max_depth
    if n < depth:
        warn(("max_depth", f"{n} classes cannot reach depth {depth}; the hierarchy will be a chain of depth {n}"))
    elif depth > 1:
        chain = depth * (depth + 1) / 2
        lo = (chain + (n - depth)) / n
        hi = (chain + (n - depth) * depth) / n
        if not lo - 1e-9 <= config.avg_depth <= hi + 1e-9:
            warn(("avg_depth", f"reachable average depth with {n} classes and depth {depth} is [{lo:.2f}, {hi:.2f}]"))
        if config.inheritance_ratio < 1:
            warn(("inheritance_ratio", "every parent has at least one child, so values below 1 are unreachable"))
        elif math.comb(n - 1, depth - 1) <= _EXHAUSTIVE_LIMIT and not _hierarchy_targets_feasible(n, depth, config.avg_depth, config.inheritance_ratio):
            warn(
                (
                    "inheritance_ratio",
                    "avg_depth and inheritance_ratio cannot be satisfied together; the hierarchy is built best-effort",
                )
            )
    if config.prop_reflexive + config.prop_irreflexive > 1:
        warn(("prop_reflexive", "reflexive and irreflexive proportions sum above 1 and compete"))
    if config.prop_symmetric + config.prop_asymmetric > 1:
        warn(("prop_symmetric", "symmetric and asymmetric proportions sum above 1 and compete"))
    if not config.multityping and config.avg_multityping != 1:
        warn(("avg_multityping", "ignored because multityping is false"))
    return report


def _yaml_scalar(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(value) + "]"
    if isinstance(value, float):
        return yaml.safe_dump(value).splitlines()[0]
    return str(value)


def emit_template(format: str = "yaml", config: GeneratorConfig | None = None) -> str:
    """Render a commented configuration file holding ``config`` (defaults when omitted)."""
    config = config or GeneratorConfig()
    values = config.to_dict()
    if format in ("yaml", "yml"):
        out = ["# kgsynth generator configuration", ""]
        section = None
        for key, (sect, desc) in PARAMETERS.items():
            if sect != section:
                if section is not None:
                    out.append("")
                out.append(f"# --- {sect} ---")
                section = sect
            out.append(f"# {desc}")
            out.append(f"{key}: {_yaml_scalar(values[key])}")
        out.append("")
        out.append("# --- run ---")
        for key, desc in RUN_KEYS.items():
            out.append(f"# {desc}")
            out.append(f"{key}: {_yaml_scalar(values[key])}")
        return "\n".join(out) + "\n"
    if format == "json":
        doc: dict[str, Any] = {COMMENTS_KEY: {k: d for k, (_, d) in PARAMETERS.items()} | RUN_KEYS}
        doc.update({k: values[k] for k in PARAMETERS})
        doc.update({k: values[k] for k in RUN_KEYS})
        return json.dumps(doc, indent=2) + "\n"
    raise ValueError(f"unsupported config format: {format}")
