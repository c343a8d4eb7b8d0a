import json

import numpy as np
import pytest

from conftest import random_problem
from philap.action import action_value
from philap.config import (
    BUILTINS,
    builtin,
    dump_config,
    load_config,
    parse_config,
    problem_from_dict,
    problem_to_dict,
)
from philap.exceptions import ConfigError


@pytest.mark.parametrize("name", sorted(BUILTINS))
def test_builtin_roundtrip(name, tmp_path):
    cfg = builtin(name)
    path = tmp_path / "c.json"
    dump_config(cfg, path)
    again = load_config(str(path))
    assert again.to_dict() == cfg.to_dict()


def test_random_problem_roundtrip(rng):
    for _ in range(30):
        p = random_problem(rng)
        doc = json.loads(json.dumps(problem_to_dict(p)))
        q = problem_from_dict(doc)
        assert problem_to_dict(q) == problem_to_dict(p)
        x = rng.normal(size=p.size)
        assert action_value(q, x) == action_value(p, x)


def test_zero_weight_names_field():
    doc = problem_to_dict(builtin("example51").problem)
    doc["weights"][2][1] = 0.0
    with pytest.raises(ConfigError) as exc:
        parse_config(doc)
    assert exc.value.field == "weights[2][1]"
    assert "weights[2][1]" in str(exc.value)


def test_bad_json_reports_line(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "system": "T11",\n  "T": 2,,\n}\n')
    with pytest.raises(ConfigError) as exc:
        load_config(str(path))
    assert exc.value.line == 3


@pytest.mark.parametrize(
    "mutate, field",
    [
        (lambda d: d.pop("T"), "T"),
        (lambda d: d.update(T=1), "T"),
        (lambda d: d.update(T=2.0), "T"),
        (lambda d: d.update(system="T13"), "system"),
        (lambda d: d["weights"].pop(), "weights"),
        (lambda d: d["weights"][0].append(1.0), "weights[0]"),
        (lambda d: d["potentials"].__setitem__(1, [{"c": 1.0, "p": 0.5}]), "potentials[1]"),
        (lambda d: d["nonlinearity"].__setitem__("G", {"kind": "nope"}), "nonlinearity.G"),
    ],
)
def test_malformed_fields(mutate, field):
    doc = problem_to_dict(builtin("example51").problem)
    mutate(doc)
    with pytest.raises(ConfigError) as exc:
        parse_config(doc)
    assert exc.value.field == field


def test_missing_file_and_unknown_builtin():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/x.json")
    with pytest.raises(ConfigError):
        builtin("example99")


def test_example52_desk_is_one_dimensional():
    p = builtin("example52_desk").problem
    assert (p.T, p.N, p.size) == (4, 1, 8)
    assert np.allclose(p.weights[0].w, builtin("example52").problem.weights[0].w)
