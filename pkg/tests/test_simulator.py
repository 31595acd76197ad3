import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from conftest import QUASI_EDGES, QUASI_TREE, STRONG_EDGES
from edgecons import (ConfigError, ControllerConfig, DynamicsSpec, InitialSpec, IntegratorSpec,
                      NoiseSpec, Scenario, build_edge_algebra, chua_vector_field, consensus_metrics,
                      incidence_decomposition, integrate, load_scenario, parse_digraph, prepare,
                      sample_disturbance, with_overrides)
from edgecons.simulator import CHUA_LIPSCHITZ, SimResult, pairwise_disparity


def linear_scenario(t_final=1.0, dt=1e-3, mode="off", **kw):
    g = parse_digraph(6, STRONG_EDGES)
    return Scenario(g, ControllerConfig(mode=mode, **kw), DynamicsSpec("zero", 3), NoiseSpec(0.0, 1),
                    IntegratorSpec(dt, t_final), InitialSpec(seed=3))


def test_chua_values():
    assert np.array_equal(chua_vector_field([0.0, 0.0, 0.0]), np.zeros(3))
    assert np.allclose(chua_vector_field([1.0, 0.0, 0.0]), [10 / 3, 1.0, 0.0], atol=1e-14)
    assert np.allclose(chua_vector_field([0.0, 1.0, 0.0]), [10.0, -1.0, -18.0], atol=1e-14)


def test_chua_batches_and_is_odd():
    x = np.random.default_rng(0).normal(size=(4, 5, 3)) * 3
    out = chua_vector_field(x)
    assert out.shape == x.shape
    assert np.allclose(chua_vector_field(-x), -out)
    assert np.allclose(out[1, 2], chua_vector_field(x[1, 2]))


def test_chua_increment_ratio_bounded_by_jacobian_norms():
    # the field is piecewise linear; its Euclidean Lipschitz constant is the
    # larger spectral norm of the two Jacobians, well above the configured eta
    jac = [np.array([[-10 - 10 * s, 10, 0], [1, -1, 1], [0, -18, 0]]) for s in (-4 / 3, -3 / 4)]
    bound = max(np.linalg.norm(j, 2) for j in jac)
    rng = np.random.default_rng(1)
    a, b = rng.normal(size=(2, 20000, 3)) * 4
    ratio = np.linalg.norm(chua_vector_field(a) - chua_vector_field(b), axis=1) / np.linalg.norm(a - b, axis=1)
    assert ratio.max() <= bound * (1 + 1e-12)
    assert bound > CHUA_LIPSCHITZ


def test_disturbance_bounds_and_determinism():
    assert np.array_equal(sample_disturbance(np.random.default_rng(0), 0.0, 3), np.zeros(3))
    w = sample_disturbance(np.random.default_rng(5), 0.25, (100_000, 3))
    assert np.abs(w).max() <= 0.25
    assert np.linalg.norm(w, axis=1).max() <= 0.4331
    again = sample_disturbance(np.random.default_rng(5), 0.25, (100_000, 3))
    assert np.array_equal(w, again)


def test_consensus_is_an_equilibrium_of_the_field():
    loop = prepare(load_scenario("strong_6agent"))
    x = np.tile([0.3, -1.2, 2.0], (6, 1))
    rhs = loop.field(0.0, x, np.zeros_like(x))
    # every agent follows the same drift
    assert np.allclose(rhs - rhs[0], 0.0, atol=1e-12)
    assert np.allclose(rhs[0], chua_vector_field(x[0]), atol=1e-12)


def test_field_without_control_is_laplacian_flow():
    loop = prepare(linear_scenario())
    x = np.random.default_rng(2).normal(size=(6, 3))
    assert np.allclose(loop.field(0.0, x, np.zeros_like(x)), -loop.algebra.L_G @ x)


def reference_edge_control(x_e, bracket, xi, sigma=1.0, eps=1e-6):
    norm = np.linalg.norm(x_e, axis=1, keepdims=True)
    return -x_e / np.maximum(norm, eps) * (bracket * norm + np.sqrt(2) * xi) + (1 - sigma / 2) * x_e


def test_strong_field_edge_image_matches_law():
    sc = load_scenario("strong_6agent")
    loop = prepare(sc)
    x = np.random.default_rng(3).normal(size=(6, 3)) * 2
    x_e = loop.incidence.E.T @ x
    u_e = reference_edge_control(x_e, sc.controller.eta + 2 / 0.9487, sc.controller.xi)
    u = loop.node_control(x)
    E_T = loop.incidence.E.T.astype(float)
    projector = E_T @ np.linalg.pinv(E_T)
    assert np.allclose(E_T @ u, projector @ u_e, atol=1e-8)


def test_quasi_field_realises_tree_controls_exactly():
    loop = prepare(load_scenario("quasi_6agent"))
    x = np.random.default_rng(4).normal(size=(6, 3))
    u_T = loop.edge_controls(x)
    assert np.allclose(loop.partition.E_T.T @ loop.node_control(x), u_T, atol=1e-8)


def test_linear_edge_flow_matches_matrix_exponential():
    res = integrate(linear_scenario())
    L_e = build_edge_algebra(incidence_decomposition(parse_digraph(6, STRONG_EDGES))).L_e
    expected = scipy.linalg.expm(-L_e) @ res.edge_states[0]
    assert res.times[-1] == pytest.approx(1.0)
    assert np.abs(res.edge_states[-1] - expected).max() < 1e-6


def test_rk4_step_halving():
    L_e = build_edge_algebra(incidence_decomposition(parse_digraph(6, STRONG_EDGES))).L_e

    def error(dt):
        res = integrate(linear_scenario(dt=dt))
        return np.abs(res.edge_states[-1] - scipy.linalg.expm(-L_e) @ res.edge_states[0]).max()

    assert error(0.1) / error(0.05) >= 15


def test_edge_states_are_incidence_image():
    sc = with_overrides(load_scenario("strong_6agent"), t_final=1.0)
    res = integrate(sc)
    E = prepare(sc).incidence.E
    assert np.abs(np.einsum("kj,tjd->tkd", E.T, res.node_states) - res.edge_states).max() <= 1e-10
    assert np.allclose(res.V_edges, 0.5 * (res.edge_states ** 2).sum(-1))


def test_tree_cotree_identity_along_trajectory():
    sc = with_overrides(load_scenario("quasi_6agent"), t_final=1.0)
    res = integrate(sc)
    tp = prepare(sc).partition
    x_T = res.edge_states[:, tp.tree_index]
    x_C = res.edge_states[:, tp.cotree_index]
    assert np.abs(np.einsum("tc,ktd->kcd", tp.T, x_T).transpose(0, 1, 2) - x_C).max() <= 1e-8
    assert np.allclose(res.V_tree + res.V_cotree, res.V_edges.sum(1))


def test_consensus_preserved_without_noise():
    c = (0.5, -0.25, 1.0)
    g = parse_digraph(6, STRONG_EDGES)
    base = dict(graph=g, noise=NoiseSpec(0.0, 0), initial=InitialSpec(states=(c,) * 6))
    zero = integrate(Scenario(controller=ControllerConfig(mode="off"), dynamics=DynamicsSpec("zero", 3),
                              integrator=IntegratorSpec(1e-2, 10.0), **base))
    assert np.abs(zero.node_states - np.array(c)).max() < 1e-9
    chua = integrate(Scenario(controller=ControllerConfig(eta=CHUA_LIPSCHITZ),
                              dynamics=DynamicsSpec("chua", 3), integrator=IntegratorSpec(1e-3, 5.0),
                              **base))
    assert consensus_metrics(chua).disparity.max() < 1e-9


def test_zero_final_time_returns_initial_sample():
    res = integrate(linear_scenario(t_final=0.0))
    assert res.times.tolist() == [0.0]
    assert res.node_states.shape == (1, 6, 3)


def test_runs_are_bitwise_deterministic():
    sc = with_overrides(load_scenario("strong_6agent"), t_final=0.5, seed=11)
    a, b = integrate(sc), integrate(sc)
    assert a.node_states.tobytes() == b.node_states.tobytes()
    c = integrate(with_overrides(sc, seed=12))
    assert a.node_states.tobytes() != c.node_states.tobytes()


def test_blow_up_aborts_with_partial_result():
    g = parse_digraph(2, [(1, 2), (2, 1)])
    sc = Scenario(g, ControllerConfig(mode="off"), DynamicsSpec("linear", 1, ((50.0,),)),
                  NoiseSpec(0.0, 0), IntegratorSpec(0.01, 5.0), InitialSpec(states=((1.0,), (2.0,))))
    res = integrate(sc)
    assert res.aborted and "diverged" in res.message
    assert res.final_time < 5.0
    assert np.all(np.isfinite(res.node_states))


def test_record_every_thins_samples():
    sc = linear_scenario(t_final=1.0, dt=0.01)
    sc = Scenario(sc.graph, sc.controller, sc.dynamics, sc.noise, IntegratorSpec(0.01, 1.0, record_every=10),
                  sc.initial)
    assert np.allclose(integrate(sc).times, np.linspace(0, 1, 11))


def test_metrics_simple_cases():
    times = np.linspace(0, 1, 11)
    same = np.zeros((11, 3, 2))
    res = SimResult(times, same, np.zeros((11, 1, 2)), np.zeros((11, 1)), None, None)
    m = consensus_metrics(res)
    assert np.all(m.disparity == 0) and m.convergence_time_to(0.1) == 0.0
    two = np.zeros((11, 2, 1))
    two[:, 1, 0] = np.linspace(3.0, 0.0, 11)
    m = consensus_metrics(SimResult(times, two, np.zeros((11, 1, 1)), np.zeros((11, 1)), None, None))
    assert m.disparity[0] == pytest.approx(3.0)
    assert m.convergence_time_to(1.0) == pytest.approx(0.7)
    assert m.steady_state_disparity == pytest.approx(0.3)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 6), st.integers(0, 10**6))
def test_pairwise_disparity_matches_loop(n, seed):
    x = np.random.default_rng(seed).normal(size=(3, n, 2))
    expected = [max(np.linalg.norm(s[i] - s[j]) for i in range(n) for j in range(n)) for s in x]
    assert np.allclose(pairwise_disparity(x), expected)


def test_invalid_specs_rejected():
    with pytest.raises(ConfigError):
        DynamicsSpec("chua", 2)
    with pytest.raises(ConfigError):
        DynamicsSpec("linear", 2, ((1.0,),))
    with pytest.raises(ConfigError):
        IntegratorSpec(0.0, 1.0)
    with pytest.raises(ConfigError):
        NoiseSpec(-1.0)
    g = parse_digraph(6, QUASI_EDGES)
    with pytest.raises(ConfigError, match="tree"):
        prepare(Scenario(g, ControllerConfig(mode="quasi", cotree_gain=0.175)))
    with pytest.raises(ConfigError, match="strongly connected"):
        prepare(Scenario(g, ControllerConfig(mode="strong"), tree=QUASI_TREE))
