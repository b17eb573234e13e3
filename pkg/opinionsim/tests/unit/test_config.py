import json

import pytest

from opinionsim.agents.spec import Archetype
from opinionsim.config import (
    U64_MAX,
    expand_controllers,
    parse_config,
    serialize_config,
    to_experiment,
    to_task,
)
from opinionsim.errors import ConfigRangeError, ConfigSchemaError, ConfigSyntaxError


def _parse(doc):
    return parse_config(json.dumps(doc))


def test_minimal_config_fills_defaults(minimal_config):
    cfg = _parse(minimal_config)
    assert cfg.eps_edge == 0.001
    assert cfg.eps_norm == 1e-12
    assert cfg.stability is None
    assert cfg.output.dir == "runs"
    assert cfg.output.formats == ["csv", "dot", "json"]
    assert cfg.goal is None


def test_bytes_input_accepted(minimal_config):
    assert parse_config(json.dumps(minimal_config).encode()).n_standard == 50


def test_not_json_is_syntax_error():
    with pytest.raises(ConfigSyntaxError) as exc:
        parse_config('{"n_standard": 50,')
    assert exc.value.paths == ["<root>"]
    assert "line 1" in str(exc.value)


@pytest.mark.parametrize("key,value", [
    ("theta", 0),
    ("n_standard", 0),
    ("eps_edge", 1.0),
    ("eps_edge", -0.1),
    ("eps_norm", 1e-3),
    ("steps", 0),
    ("seed", -1),
    ("seed", U64_MAX + 1),
])
def test_out_of_range_values(minimal_config, key, value):
    with pytest.raises(ConfigRangeError) as exc:
        _parse({**minimal_config, key: value})
    assert key in exc.value.paths


def test_unit_interval_vectors(minimal_config):
    doc = {**minimal_config, "controllers": [{"type": "stubborn", "count": 1, "opinion": [0, 1.5, 0]}]}
    with pytest.raises(ConfigRangeError) as exc:
        _parse(doc)
    assert exc.value.paths == ["controllers.0.opinion"]


def test_strategic_without_goal_is_schema_error(minimal_config):
    doc = {**minimal_config, "controllers": [{"type": "strategic", "count": 1, "rho": 2}]}
    with pytest.raises(ConfigSchemaError) as exc:
        _parse(doc)
    assert exc.value.paths == ["controllers.0"]
    assert "goal" in str(exc.value)


def test_field_not_taken_by_archetype(minimal_config):
    doc = {**minimal_config, "controllers": [{"type": "popular", "count": 1, "rho": 1, "goal": [0, 0, 0]}]}
    with pytest.raises(ConfigSchemaError):
        _parse(doc)


def test_unknown_key_and_missing_key(minimal_config):
    with pytest.raises(ConfigSchemaError) as exc:
        _parse({**minimal_config, "temperature": 3})
    assert "temperature" in exc.value.paths

    doc = dict(minimal_config)
    del doc["controllers"]
    with pytest.raises(ConfigSchemaError) as exc:
        _parse(doc)
    assert "controllers" in exc.value.paths


def test_wrong_vector_length_names_the_path(minimal_config):
    doc = {**minimal_config, "controllers": [
        {"type": "popular", "count": 2, "rho": -10},
        {"type": "strategic", "count": 1, "rho": 2, "goal": [0, 0]},
    ]}
    with pytest.raises(ConfigSchemaError) as exc:
        _parse(doc)
    assert exc.value.paths == ["controllers.1.goal"]
    assert "expected m=3" in str(exc.value)


def test_schema_error_reports_range_problems_too(minimal_config):
    with pytest.raises(ConfigSchemaError) as exc:
        _parse({**minimal_config, "theta": 0, "m": "three"})
    assert set(exc.value.paths) == {"theta", "m"}


def test_serialize_round_trip(small_config):
    cfg = parse_config(small_config.read_text())
    assert parse_config(serialize_config(cfg)) == cfg


def test_expand_controllers_in_order(small_config):
    specs = expand_controllers(parse_config(small_config.read_text()))
    assert [s.archetype for s in specs] == [
        Archetype.stubborn, Archetype.popular, Archetype.popular, Archetype.strategic,
    ]
    assert specs[1].rho == -10


def test_goal_prefers_strategic(small_config):
    cfg = parse_config(small_config.read_text())
    assert cfg.goal == (0.0, 0.0, 0.0)


def test_to_task_overrides(small_config):
    cfg = parse_config(small_config.read_text())
    task = to_task(cfg)
    assert (task.seed, task.steps) == (7, 15)
    assert task.params.eps_edge == 0.01
    assert task.criterion.window == 5
    assert not task.shared_base
    assert (to_task(cfg, seed=3, steps=4).seed, to_task(cfg, seed=3, steps=4).steps) == (3, 4)


def test_to_experiment(small_config):
    cfg = parse_config(small_config.read_text())
    experiment = to_experiment(cfg, [0, 1, 2])
    assert experiment.seeds == (0, 1, 2)
    assert experiment.horizon == 15
    assert len(experiment.variations) == 1
    assert len(experiment.variations[0].controllers) == 4
    assert experiment.base.eps_edge == 0.01
