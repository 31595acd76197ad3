import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import QUASI_EDGES, QUASI_TREE, STRONG_EDGES
from edgecons import (ControllerConfig, DynamicsSpec, InitialSpec, IntegratorSpec, NoiseSpec,
                      OutputSpec, Scenario, ScenarioError, dump_scenario, integrate, load_scenario,
                      load_scenario_file, parse_digraph, parse_scenario, scale_noise, with_overrides)
from edgecons.results import csv_header, result_csv, result_json, summarize_csv
from edgecons.scenario import bundled_path


def bundled_text(name):
    return bundled_path(name + ".ini").read_text()


def test_bundled_strong_scenario():
    sc = load_scenario("strong_6agent")
    assert sc.graph.edges == tuple(STRONG_EDGES)
    assert sc.mode == "strong" and sc.tree is None
    assert sc.controller.eta == 4.3871 and sc.controller.gain == 0.9487 and sc.controller.sigma == 1.0
    assert sc.controller.xi == pytest.approx(0.25 * math.sqrt(3))
    assert sc.dynamics.kind == "chua" and sc.noise.bound == 0.25
    assert sc.controller.epsilon == 1e-6


def test_bundled_quasi_scenario():
    sc = load_scenario("quasi_6agent")
    assert sc.graph.edges == tuple(QUASI_EDGES)
    assert sc.tree == QUASI_TREE and sc.controller.cotree_gain == 0.175 and sc.mode == "quasi"


def test_cotree_gain_above_bound_rejected():
    text = bundled_text("quasi_6agent").replace("cotree_gain = 0.175", "cotree_gain = 0.25")
    with pytest.raises(ScenarioError, match="0.2"):
        parse_scenario(text)


def test_small_gain_violation_names_cycle():
    text = bundled_text("strong_6agent").replace("gain = 0.9487", "gain = 1.2")
    with pytest.raises(ScenarioError, match=r"cycle \d+->\d+"):
        parse_scenario(text)


@pytest.mark.parametrize("old, new, pattern", [
    ("seed = 0", "seed = 0\ncolour = red", r"line 30: noise.colour: unknown key"),
    ("dt = 0.001", "dt = fast", r"line \d+: integrator.dt: expected a number"),
    ("dt = 0.001", "dt = inf", r"integrator.dt: must be finite"),
    ("edges = 2 1, 1 3", "edges = 2 1, 1 9", r"graph.edges: .*e2"),
    ("format = csv", "format = xml", r"output.format"),
    ("[noise]", "[nois]", r"unknown section \[nois\]"),
    ("mode = strong", "mode = fast", r"controller.mode"),
])
def test_errors_name_field_and_line(old, new, pattern):
    text = bundled_text("strong_6agent")
    assert old in text
    with pytest.raises(ScenarioError, match=pattern):
        parse_scenario(text.replace(old, new, 1))


def test_missing_controller_section():
    text = "[graph]\nnodes = 2\nedges = 1 2, 2 1\n"
    with pytest.raises(ScenarioError, match=r"missing section \[controller\]"):
        parse_scenario(text)


def test_invalid_tree_reported_on_tree_line():
    text = bundled_text("quasi_6agent").replace("edges = 1, 2, 3, 4, 7", "edges = 1, 2, 3, 4, 5")
    with pytest.raises(ScenarioError, match="tree.edges"):
        parse_scenario(text)


def test_graph_file_reference(tmp_path):
    (tmp_path / "ring.graph").write_text("# ring\n3 3\n1 2\n2 3\n3 1\n")
    (tmp_path / "ring.ini").write_text("[graph]\nfile = ring.graph\n[controller]\nmode = strong\n")
    sc = load_scenario(tmp_path / "ring.ini")
    assert sc.graph.edges == ((1, 2), (2, 3), (3, 1))
    assert sc.name == "ring"
    (tmp_path / "ring.graph").write_text("3 3\n1 2\n2 3\n3 4\n")
    with pytest.raises(ScenarioError, match=r"graph.file: .*line 4: edge e3"):
        load_scenario(tmp_path / "ring.ini")


def test_missing_file_raises():
    with pytest.raises(FileNotFoundError):
        load_scenario("no_such_scenario")


def test_round_trip_bundled():
    for name in ("strong_6agent", "quasi_6agent"):
        sf = load_scenario_file(name)
        again = parse_scenario(dump_scenario(sf.scenario, sf.output))
        assert again.scenario == sf.scenario and again.output == sf.output


@settings(max_examples=25, deadline=None)
@given(st.floats(0.01, 0.99), st.floats(0.0, 1.0, allow_subnormal=False), st.integers(0, 2**31),
       st.floats(1e-4, 0.1), st.lists(st.floats(0.1, 3.0), min_size=4, max_size=4), st.booleans())
def test_round_trip_random(gain, bound, seed, dt, sigma, explicit):
    g = parse_digraph(3, [(1, 2), (2, 3), (3, 1), (1, 3)])
    states = ((0.1, 1 / 3), (-2.5, 7.0), (1e-9, 0.0)) if explicit else None
    sc = Scenario(g, ControllerConfig(mode="strong", eta=0.3, xi=bound * math.sqrt(2), sigma=tuple(sigma),
                                      gain=gain, edge_gains={(2, 1): gain / 2}),
                  DynamicsSpec("linear", 2, ((0.0, 1.0), (-1.0, 0.1))), NoiseSpec(bound, seed),
                  IntegratorSpec(dt, 1.0), InitialSpec(states=states, seed=None if explicit else 4), name="rand")
    assert parse_scenario(dump_scenario(sc)).scenario == sc


def test_overrides_and_noise_scaling():
    sc = load_scenario("strong_6agent")
    o = with_overrides(sc, seed=9, dt=0.0005, t_final=2.0)
    assert (o.noise.seed, o.integrator.dt, o.integrator.t_final) == (9, 0.0005, 2.0)
    half = scale_noise(sc, 0.5)
    assert half.noise.bound == 0.125 and half.controller.xi == pytest.approx(sc.controller.xi / 2)


def test_csv_layout_and_report(tmp_path):
    sc = with_overrides(load_scenario("strong_6agent"), t_final=0.05)
    res = integrate(sc)
    text = result_csv(res)
    rows = text.strip().splitlines()
    widths = {len(r.split(",")) for r in rows}
    assert widths == {1 + 6 * 3 + 8 + 1}
    assert rows[0].split(",") == csv_header(6, 3, 8)
    path = tmp_path / "run.csv"
    path.write_text(text)
    s = summarize_csv(path)
    assert (s.node_count, s.state_dim, s.edge_count, s.rows) == (6, 3, 8, len(res.times))
    np.testing.assert_allclose(np.loadtxt(path, delimiter=",", skiprows=1)[:, 1:19],
                               res.node_states.reshape(len(res.times), -1), rtol=0, atol=0)


def test_json_summary_echoes_config():
    import json
    sc = with_overrides(load_scenario("quasi_6agent"), t_final=0.05)
    doc = json.loads(result_json(integrate(sc), dump_scenario(sc, OutputSpec(None, "json")), 0))
    assert doc["aborted"] is False and doc["seed"] == 0
    assert doc["config"]["tree"]["edges"] == "1, 2, 3, 4, 7"
    assert doc["metrics"]["samples"] == 51


def test_report_rejects_foreign_csv(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError, match="not a simulation CSV"):
        summarize_csv(p)
