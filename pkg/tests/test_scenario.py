import numpy as np
import pytest

from maskopt.errors import ScenarioError
from maskopt.scenario import (
    full_to_upper,
    load_scenario,
    random_scenario,
    scenario_from_dict,
    shipped_scenario,
    upper_to_full,
)

BASE = """
m = 1
sigma = 1.0
seed = 3

[graph]
n = 2
edges = [[1, 2]]

[[costs]]
Q = [2.0]
alpha = [-2.0]

[[costs]]
Q = [2.0]
alpha = [-4.0]
"""


def write(tmp_path, text, name="case.toml"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_shipped_scenarios_load():
    for name in ("illustration", "path3_cut", "wheel5_2d"):
        s = load_scenario(shipped_scenario(name))
        assert s.name == name
        assert s.costs.n == s.graph.n


def test_illustration_contents():
    s = load_scenario(shipped_scenario("illustration"))
    assert s.graph.edges == ((1, 2), (1, 3), (2, 3))
    assert sorted(s.adversary.corrupted) == [3]
    assert s.noise[(1, 2)] == [0.1] and s.noise[(3, 1)] == [0.3]
    np.testing.assert_array_equal(s.costs.alpha[:, 0], [-2, -4, -6])


def test_name_defaults_to_file_stem(tmp_path):
    s = load_scenario(write(tmp_path, BASE, "my_case.toml"))
    assert s.name == "my_case"
    assert s.optimizer.method == "dgd"
    assert s.noise is None and s.alpha_prime is None


def test_upper_triangle_round_trip():
    q = upper_to_full([1.0, 2.0, 3.0], 2)
    np.testing.assert_array_equal(q, [[1, 2], [2, 3]])
    assert full_to_upper(q) == [1.0, 2.0, 3.0]


def codes(exc):
    return {code for _, code, _ in exc.value.violations}


def test_singular_aggregate(tmp_path):
    text = BASE.replace("Q = [2.0]", "Q = [0.0]")
    with pytest.raises(ScenarioError) as exc:
        load_scenario(write(tmp_path, text))
    assert "NoUniqueMinimizer" in codes(exc)


def test_negative_sigma(tmp_path):
    with pytest.raises(ScenarioError) as exc:
        load_scenario(write(tmp_path, BASE.replace("sigma = 1.0", "sigma = -1.0")))
    assert codes(exc) == {"InvalidSigma"}


def test_every_violation_is_reported(tmp_path):
    text = BASE.replace("sigma = 1.0", "sigma = -1.0").replace("edges = [[1, 2]]", "edges = [[1, 3]]")
    text += "\n[adversary]\ncorrupted = [9]\n"
    with pytest.raises(ScenarioError) as exc:
        load_scenario(write(tmp_path, text))
    assert {"InvalidSigma", "InvalidNode"} <= codes(exc)
    assert len(exc.value.violations) >= 2


def test_disconnected_graph(tmp_path):
    text = BASE.replace("n = 2\nedges = [[1, 2]]", "n = 2\nedges = []")
    with pytest.raises(ScenarioError) as exc:
        load_scenario(write(tmp_path, text))
    assert "NotConnected" in codes(exc)


def test_cost_count_mismatch(tmp_path):
    text = BASE.replace("n = 2\nedges = [[1, 2]]", "n = 3\nedges = [[1, 2], [2, 3]]")
    with pytest.raises(ScenarioError) as exc:
        load_scenario(write(tmp_path, text))
    assert "ShapeError" in codes(exc)


def test_incomplete_noise_table(tmp_path):
    text = BASE + '\n[noise]\n"1->2" = [0.5]\n'
    with pytest.raises(ScenarioError) as exc:
        load_scenario(write(tmp_path, text))
    assert "InvalidTable" in codes(exc)


def test_parse_and_io_errors(tmp_path):
    with pytest.raises(ScenarioError) as exc:
        load_scenario(write(tmp_path, "m = = 1"))
    assert codes(exc) == {"ParseError"}
    with pytest.raises(ScenarioError) as exc:
        load_scenario(tmp_path / "missing.toml")
    assert codes(exc) == {"IOError"}


def test_unknown_optimizer_key(tmp_path):
    with pytest.raises(ScenarioError) as exc:
        load_scenario(write(tmp_path, BASE + "\n[optimizer]\nlearning_rate = 0.1\n"))
    assert codes(exc) == {"InvalidArgument"}


def test_from_dict_requires_graph():
    with pytest.raises(ScenarioError) as exc:
        scenario_from_dict({"m": 1, "sigma": 1.0})
    assert ("graph", "InvalidArgument") in {(p, c) for p, c, _ in exc.value.violations}


def test_random_scenarios_are_valid_and_reproducible():
    for seed in range(20):
        a, b = random_scenario(seed), random_scenario(seed)
        assert a.graph == b.graph
        np.testing.assert_array_equal(a.costs.alpha, b.costs.alpha)
        assert 2 <= a.graph.n <= 10 and 1 <= a.m <= 3
        assert np.linalg.eigvalsh(a.costs.aggregate().Q).min() > 0


def test_with_sigma_drops_injected_noise():
    s = load_scenario(shipped_scenario("illustration"))
    t = s.with_sigma(2.0)
    assert t.sigma == 2.0 and t.noise is None and s.noise is not None
