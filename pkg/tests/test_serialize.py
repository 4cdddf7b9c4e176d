import json
import math

import numpy as np
import pytest

from microgrid_planner.core import Portfolio, StorageSpec
from microgrid_planner.datasets import default_spec
from microgrid_planner.dispatch import SolverConfig
from microgrid_planner.instances import make_rng, random_instance
from microgrid_planner.scenarios import Scenario, ScenarioSet
from microgrid_planner.serialize import (
    SCHEMA_VERSION,
    SchemaError,
    dumps,
    load_model_config,
    model_config_to_dict,
    portfolio_from_dict,
    read_json,
    read_scenarios,
    spec_from_dict,
    spec_to_dict,
    storage_from_dict,
    write_json,
    write_scenarios,
)


def test_spec_round_trip(rng):
    spec, _, _ = random_instance(rng)
    back = spec_from_dict(json.loads(json.dumps(spec_to_dict(spec))))
    assert np.array_equal(back.inelastic, spec.inelastic)
    assert back.storage == spec.storage
    for a, b in zip(spec.users, back.users):
        assert np.array_equal(a.preferred, b.preferred) and a.beta == b.beta and a.total == b.total


def test_defaults_fill_missing_keys():
    p = portfolio_from_dict({})
    assert (p.c_s, p.c_w, p.c_e) == (12480.0, 7800.0, 1950.0)
    assert math.isinf(p.budget)
    spec = spec_from_dict({"inelastic": [1.0, 2.0]})
    assert spec.beta_o == 0.005 and spec.days == 3650


def test_dod_key():
    assert storage_from_dict({"dod_max": 0.8}).soc_min == pytest.approx(0.2)
    with pytest.raises(ValueError):
        storage_from_dict({"dod_max": 0.8, "soc_min": 0.1})


def test_model_config_file(tmp_path):
    spec = default_spec()
    port = Portfolio(1.0, 2.0, 3.0, budget=1e6)
    write_json(model_config_to_dict(spec, port, SolverConfig(tol=1e-6)), tmp_path / "m.json")
    s2, p2, c2 = load_model_config(tmp_path / "m.json")
    assert p2 == port and c2.tol == 1e-6
    assert np.array_equal(s2.preferred_matrix(), spec.preferred_matrix())


def test_version_checked(tmp_path):
    p = tmp_path / "x.json"
    p.write_text(json.dumps({"schema_version": SCHEMA_VERSION + 1, "scenarios": []}))
    with pytest.raises(SchemaError, match="schema_version"):
        read_json(p)
    p.write_text(json.dumps({"scenarios": []}))
    with pytest.raises(SchemaError):
        read_scenarios(p)
    p.write_text("{not json")
    with pytest.raises(SchemaError):
        read_json(p)


def test_scenarios_file(tmp_path):
    s = ScenarioSet((Scenario([0.1, 0.2], [0.3, 0.4], 0.25), Scenario([0.5, 0.6], [0.7, 0.8], 0.75)))
    write_scenarios(s, tmp_path / "s.json")
    data = json.loads((tmp_path / "s.json").read_text())
    assert set(data) == {"schema_version", "scenarios"}
    assert set(data["scenarios"][0]) == {"pi", "solar", "wind"}
    back = read_scenarios(tmp_path / "s.json")
    assert np.array_equal(back.matrix(), s.matrix())


def test_dumps_deterministic():
    a = dumps({"b": 1.0, "a": [0.1, 1 / 3]})
    b = dumps({"a": [0.1, 1 / 3], "b": 1.0})
    assert a == b
    with pytest.raises(ValueError):
        dumps({"x": float("nan")})
