"""Closed-loop simulation of the consensus protocol with nonlinear agents.

Each agent follows ``dx_i/dt = f(x_i) + w_i + mu_i`` with the protocol
``mu = -L_G x + u``.  The auxiliary input ``u`` is the edge control law lifted
to the nodes.  Integration is classical RK4 with a fixed step; the
disturbance is drawn once per step and held over the step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .algebra import EdgeAlgebra, TreePartition, build_edge_algebra, tree_partition
from .controller import ConfigError, ControllerConfig, Synthesis, edge_lyapunov, synthesize
from .graph import (Digraph, IncidenceSet, TreeSelection, find_directed_spanning_tree,
                    incidence_decomposition, is_strongly_connected)
from .interconnection import EdgeInterconnectionGraph, build_edge_interconnection

BLOWUP = 1e12
NOISE_BLOCK = 4096

# parameters giving the double-scroll attractor
CHUA_DEFAULTS = {"zeta": 10.0, "chi": 18.0, "a": -4.0 / 3.0, "b": -3.0 / 4.0}
CHUA_LIPSCHITZ = 4.3871


def chua_vector_field(x, zeta=10.0, chi=18.0, a=-4.0 / 3.0, b=-3.0 / 4.0):
    """Chua's circuit; ``x`` may carry leading batch axes, the last axis has length 3."""
    x = np.asarray(x, dtype=float)
    x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2]
    l = b * x1 + 0.5 * (a - b) * (np.abs(x1 + 1.0) - np.abs(x1 - 1.0))
    out = np.empty_like(x)
    out[..., 0] = zeta * (x2 - x1 - l)
    out[..., 1] = x1 - x2 + x3
    out[..., 2] = -chi * x2
    return out


@dataclass(frozen=True)
class DynamicsSpec:
    """Agent drift ``f``: ``zero``, ``linear`` (``x -> M x``) or ``chua``."""

    kind: str = "zero"
    state_dim: int = 3
    matrix: Optional[tuple[tuple[float, ...], ...]] = None
    zeta: float = CHUA_DEFAULTS["zeta"]
    chi: float = CHUA_DEFAULTS["chi"]
    a: float = CHUA_DEFAULTS["a"]
    b: float = CHUA_DEFAULTS["b"]

    def __post_init__(self):
        if self.kind not in ("zero", "linear", "chua"):
            raise ConfigError(f"dynamics.kind must be zero, linear or chua, got {self.kind!r}")
        if self.state_dim < 1:
            raise ConfigError("dynamics.state_dim must be positive")
        if self.kind == "chua" and self.state_dim != 3:
            raise ConfigError("chua dynamics need state_dim = 3")
        if self.kind == "linear":
            m = np.asarray(self.matrix, dtype=float)
            if m.shape != (self.state_dim, self.state_dim):
                raise ConfigError(f"dynamics.matrix must be {self.state_dim}x{self.state_dim}")

    def __call__(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "zero":
            return np.zeros_like(x)
        if self.kind == "chua":
            return chua_vector_field(x, self.zeta, self.chi, self.a, self.b)
        return x @ np.asarray(self.matrix, dtype=float).T


@dataclass(frozen=True)
class NoiseSpec:
    """Uniform disturbance in ``[-bound, bound]`` per component."""

    bound: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.bound) and self.bound >= 0):
            raise ConfigError(f"noise.bound must be finite and >= 0, got {self.bound}")


@dataclass(frozen=True)
class IntegratorSpec:
    dt: float = 1e-3
    t_final: float = 20.0
    method: str = "rk4"
    record_every: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ConfigError(f"integrator.dt must be positive, got {self.dt}")
        if not (math.isfinite(self.t_final) and self.t_final >= 0):
            raise ConfigError(f"integrator.t_final must be >= 0, got {self.t_final}")
        if self.method != "rk4":
            raise ConfigError(f"integrator.method must be rk4, got {self.method!r}")
        if self.record_every < 1:
            raise ConfigError("integrator.record_every must be >= 1")

    @property
    def steps(self) -> int:
        return int(round(self.t_final / self.dt))


@dataclass(frozen=True)
class InitialSpec:
    """Explicit initial states, or a seeded uniform box ``[low, high]^n`` per agent.

    Without its own ``seed`` the box is drawn from the scenario noise seed.
    """

    states: Optional[tuple[tuple[float, ...], ...]] = None
    low: float = -5.0
    high: float = 5.0
    seed: Optional[int] = None

    def __post_init__(self):
        if not self.low <= self.high:
            raise ConfigError("initial.low must not exceed initial.high")


@dataclass(frozen=True)
class Scenario:
    graph: Digraph
    controller: ControllerConfig
    dynamics: DynamicsSpec = field(default_factory=DynamicsSpec)
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    integrator: IntegratorSpec = field(default_factory=IntegratorSpec)
    initial: InitialSpec = field(default_factory=InitialSpec)
    tree: Optional[tuple[int, ...]] = None
    name: str = ""

    @property
    def mode(self) -> str:
        return self.controller.mode


@dataclass(frozen=True)
class ClosedLoop:
    """A validated scenario with every matrix the right-hand side needs."""

    scenario: Scenario
    incidence: IncidenceSet
    algebra: EdgeAlgebra
    partition: Optional[TreePartition]
    interconnection: EdgeInterconnectionGraph
    synthesis: Synthesis
    Et: np.ndarray = field(repr=False)
    LG: np.ndarray = field(repr=False)

    def edge_controls(self, x: np.ndarray) -> Optional[np.ndarray]:
        """Designed edge controls (u_e or u_T) at node state ``x`` (N x n)."""
        syn = self.synthesis
        if syn.law is None:
            return None
        xe = self.Et @ x
        if syn.mode == "quasi":
            xe = xe[self.partition.tree_index]
        return syn.law(xe)

    def node_control(self, x: np.ndarray) -> np.ndarray:
        ue = self.edge_controls(x)
        if ue is None:
            return np.zeros_like(x)
        return self.synthesis.lift @ ue

    def field(self, t: float, x: np.ndarray, w: np.ndarray) -> np.ndarray:
        """Right-hand side ``F(x) - L_G x + w + u`` for node states ``x`` (N x n)."""
        return self.scenario.dynamics(x) - self.LG @ x + w + self.node_control(x)


def prepare(scenario: Scenario) -> ClosedLoop:
    """Validate ``scenario`` and assemble its closed loop."""
    g = scenario.graph
    cfg = scenario.controller
    if scenario.dynamics.kind == "chua" and scenario.dynamics.state_dim != 3:
        raise ConfigError("chua dynamics need state_dim = 3")
    inc = incidence_decomposition(g)
    alg = build_edge_algebra(inc)
    if cfg.mode == "quasi" and scenario.tree is None:
        raise ConfigError("mode 'quasi' requires an explicit tree")
    sel: Optional[TreeSelection] = find_directed_spanning_tree(
        g, forced_tree=scenario.tree) if scenario.tree is not None else find_directed_spanning_tree(g)
    if sel is None and cfg.mode != "off":
        raise ConfigError("the graph has no directed spanning tree")
    tp = tree_partition(inc, sel) if sel is not None else None
    ig = build_edge_interconnection(g, alg)
    if isinstance(cfg.sigma, tuple) and len(cfg.sigma) != g.edge_count:
        raise ConfigError(f"controller.sigma lists {len(cfg.sigma)} values for {g.edge_count} edges")
    for l, k in cfg.edge_gains:
        if (l, k) not in set(ig.edges):
            raise ConfigError(f"controller.edge_gains names {l}->{k}, which is not an interconnection arc")
    syn = synthesize(cfg, g.node_count, alg, tp, ig, is_strongly_connected(g))
    Et = inc.E.T.astype(float)
    LG = alg.L_G.astype(float)
    return ClosedLoop(scenario, inc, alg, tp, ig, syn, Et, LG)


def sample_disturbance(rng: np.random.Generator, bound: float, n, ) -> np.ndarray:
    """Uniform draw in ``[-bound, bound]`` per component; ``n`` is an int or shape.

    The uniform variates are drawn first and scaled last, so two runs that
    differ only in ``bound`` see proportional disturbances.
    """
    u = rng.random(n)
    return bound * (2.0 * u - 1.0)


def _seeds(scenario: Scenario) -> tuple[np.random.Generator, np.random.Generator]:
    init_ss, noise_ss = np.random.SeedSequence(scenario.noise.seed).spawn(2)
    if scenario.initial.seed is not None:
        init_ss = np.random.SeedSequence(scenario.initial.seed)
    return np.random.default_rng(init_ss), np.random.default_rng(noise_ss)


def initial_states(scenario: Scenario) -> np.ndarray:
    n_agents, dim = scenario.graph.node_count, scenario.dynamics.state_dim
    init = scenario.initial
    if init.states is not None:
        x0 = np.asarray(init.states, dtype=float)
        if x0.shape != (n_agents, dim):
            raise ConfigError(f"initial.states must be {n_agents} vectors of length {dim}")
        return x0.copy()
    rng, _ = _seeds(scenario)
    return rng.uniform(init.low, init.high, size=(n_agents, dim))


@dataclass
class SimResult:
    """Sampled trajectory.  ``node_states[i]`` is N x n at ``times[i]``."""

    times: np.ndarray
    node_states: np.ndarray
    edge_states: np.ndarray
    V_edges: np.ndarray
    V_tree: Optional[np.ndarray]
    V_cotree: Optional[np.ndarray]
    aborted: bool = False
    message: str = ""
    tree_edges: Optional[tuple[int, ...]] = None
    cotree_edges: Optional[tuple[int, ...]] = None

    @property
    def edge_norms(self) -> np.ndarray:
        return np.sqrt(np.sum(self.edge_states ** 2, axis=-1))

    @property
    def final_time(self) -> float:
        return float(self.times[-1])


def integrate(scenario: Scenario, loop: Optional[ClosedLoop] = None) -> SimResult:
    """Fixed-step RK4 run of ``scenario``.

    The run stops early when the state leaves ``|x| <= 1e12`` or turns
    non-finite; the partial trajectory comes back with ``aborted`` set.
    """
    loop = loop or prepare(scenario)
    spec = scenario.integrator
    x = initial_states(scenario)
    _, noise_rng = _seeds(scenario)
    bound = scenario.noise.bound
    dt = spec.dt
    steps = spec.steps
    every = spec.record_every
    n_rec = steps // every + 1
    times = np.empty(n_rec)
    states = np.empty((n_rec,) + x.shape)
    times[0], states[0] = 0.0, x
    rec = 1
    aborted, message = False, ""
    f = loop.field
    block = np.empty((0,) + x.shape)
    for step in range(steps):
        t = step * dt
        # drawing a block consumes the stream exactly as per-step draws would
        if step % NOISE_BLOCK == 0:
            block = sample_disturbance(noise_rng, bound, (min(NOISE_BLOCK, steps - step),) + x.shape)
        w = block[step % NOISE_BLOCK]
        k1 = f(t, x, w)
        k2 = f(t + 0.5 * dt, x + 0.5 * dt * k1, w)
        k3 = f(t + 0.5 * dt, x + 0.5 * dt * k2, w)
        k4 = f(t + dt, x + dt * k3, w)
        x_new = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(x_new)) or np.max(np.abs(x_new)) > BLOWUP:
            aborted = True
            message = f"state diverged at t = {(step + 1) * dt:.6g}; last valid time {t:.6g}"
            break
        x = x_new
        if (step + 1) % every == 0:
            times[rec] = (step + 1) * dt
            states[rec] = x
            rec += 1
    times, states = times[:rec], states[:rec]
    edges = np.einsum("kj,tjd->tkd", loop.Et, states)
    V = edge_lyapunov(edges)
    tp = loop.partition
    V_T = V_C = None
    tree = cotree = None
    if tp is not None:
        V_T = V[:, tp.tree_index].sum(axis=1)
        V_C = V[:, tp.cotree_index].sum(axis=1)
        tree, cotree = tp.selection.tree_edges, tp.selection.cotree_edges
    return SimResult(times, states, edges, V, V_T, V_C, aborted, message, tree, cotree)


@dataclass(frozen=True)
class ConsensusMetrics:
    times: np.ndarray
    disparity: np.ndarray
    steady_state_disparity: float
    max_edge_norm: np.ndarray
    steady_state_edge_norm: float

    def convergence_time_to(self, threshold: float) -> Optional[float]:
        """First time after which the disparity stays below ``threshold``."""
        above = np.flatnonzero(self.disparity >= threshold)
        if above.size == 0:
            return float(self.times[0])
        last = above[-1]
        if last + 1 >= len(self.times):
            return None
        return float(self.times[last + 1])


def pairwise_disparity(node_states: np.ndarray) -> np.ndarray:
    """max_{i,j} |x_i - x_j| for each sample of a (T, N, n) array."""
    diff = node_states[:, :, None, :] - node_states[:, None, :, :]
    return np.sqrt(np.sum(diff ** 2, axis=-1)).max(axis=(1, 2))


def tail_max(values: np.ndarray) -> float:
    start = int(math.floor(0.9 * len(values)))
    start = min(start, len(values) - 1)
    return float(values[start:].max())


def consensus_metrics(res: SimResult) -> ConsensusMetrics:
    """Disparity series and steady-state values over the last 10% of samples."""
    if len(res.times) == 0:
        raise ValueError("empty simulation result")
    disp = pairwise_disparity(res.node_states)
    norms = res.edge_norms
    emax = norms.max(axis=1) if norms.shape[1] else np.zeros(len(res.times))
    return ConsensusMetrics(res.times, disp, tail_max(disp), emax, tail_max(emax))
