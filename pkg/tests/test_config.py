import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from kgsynth.config import (
    ALL_KEYS,
    PARAMETERS,
    ConfigError,
    GeneratorConfig,
    emit_template,
    load_config,
    parse_config,
    validate_config,
)


def test_defaults_validate_cleanly():
    report = validate_config(GeneratorConfig())
    assert report.ok and not report.warnings


@pytest.mark.parametrize("fmt", ["yaml", "json"])
def test_template_round_trip(fmt):
    assert parse_config(emit_template(fmt), fmt) == GeneratorConfig()


def test_template_lists_every_parameter_with_a_comment():
    text = emit_template("yaml")
    lines = text.splitlines()
    for key in ALL_KEYS:
        i = next(i for i, line in enumerate(lines) if line.startswith(f"{key}:"))
        assert lines[i - 1].startswith("# ")
    doc = json.loads(emit_template("json"))
    assert set(doc["_comments"]) == set(ALL_KEYS)


def test_generation_parameter_count():
    assert len(PARAMETERS) == 24


def test_missing_keys_take_defaults():
    cfg = parse_config("num_classes: 40\nseed: 9\n")
    assert cfg.num_classes == 40 and cfg.seed == 9
    assert cfg.max_depth == GeneratorConfig().max_depth


def test_empty_file_is_defaults():
    assert parse_config("") == GeneratorConfig()
    assert parse_config("", "json") == GeneratorConfig()


def test_unknown_key_rejected():
    with pytest.raises(ConfigError) as info:
        parse_config("num_clases: 3\n")
    assert info.value.key == "num_clases"


@pytest.mark.parametrize(
    "text",
    ["num_classes: many\n", "multityping: 1\n", "prop_reflexive: yes please\n", "formats: 3\n"],
)
def test_type_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_integral_float_accepted_for_int():
    assert parse_config("num_entities: 1000.0\n").num_entities == 1000


def test_yaml_syntax_error_has_position():
    with pytest.raises(ConfigError) as info:
        parse_config("num_classes: 3\n  max_depth: [\n")
    assert info.value.line is not None


def test_json_syntax_error_has_position():
    with pytest.raises(ConfigError) as info:
        parse_config('{"num_classes": 3,,}', "json")
    assert (info.value.line, info.value.column) == (1, 19)


def test_non_mapping_rejected():
    with pytest.raises(ConfigError):
        parse_config("- 1\n- 2\n")


def test_load_config_by_extension(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"num_relations": 7}))
    assert load_config(p).num_relations == 7
    q = tmp_path / "c.yml"
    q.write_text("num_relations: 8\n")
    assert load_config(q).num_relations == 8


@pytest.mark.parametrize(
    "changes, key",
    [
        ({"num_classes": 0}, "num_classes"),
        ({"prop_symmetric": 1.5}, "prop_symmetric"),
        ({"prop_untyped": float("nan")}, "prop_untyped"),
        ({"avg_depth": 5.0}, "avg_depth"),
        ({"avg_depth_specific": 4.0}, "avg_depth_specific"),
        ({"avg_multityping": 0.5}, "avg_multityping"),
        ({"seed": -1}, "seed"),
        ({"formats": ("rdfxml",)}, "formats"),
        ({"alpha": 2.0}, "alpha"),
    ],
)
def test_validation_errors(changes, key):
    report = validate_config(GeneratorConfig().replace(**changes))
    assert not report.ok
    assert key in {k for k, _ in report.errors}


def test_conflicting_hierarchy_targets_warn():
    cfg = GeneratorConfig(num_classes=6, max_depth=3, avg_depth=1.5, inheritance_ratio=2.5)
    report = validate_config(cfg)
    assert report.ok
    assert [k for k, _ in report.warnings] == ["inheritance_ratio"]


def test_unreachable_depth_warns():
    report = validate_config(GeneratorConfig(num_classes=2, max_depth=3, avg_depth=1.5))
    assert "max_depth" in {k for k, _ in report.warnings}


def test_competing_flag_proportions_warn():
    report = validate_config(GeneratorConfig(prop_reflexive=0.6, prop_irreflexive=0.6))
    assert "prop_reflexive" in {k for k, _ in report.warnings}


@given(
    st.integers(1, 500),
    st.integers(1, 8),
    st.floats(0, 1),
    st.booleans(),
    st.integers(0, 2**64 - 1),
)
def test_yaml_round_trip_property(n, depth, prop, multi, seed):
    cfg = GeneratorConfig(num_classes=n, max_depth=depth, prop_transitive=prop, multityping=multi, seed=seed)
    assert parse_config(emit_template("yaml", cfg)) == cfg
    assert parse_config(emit_template("json", cfg), "json") == cfg


def test_exponent_floats_from_yaml():
    assert parse_config("prop_transitive: 1e-3\n").prop_transitive == 0.001
