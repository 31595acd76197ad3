"""ISS edge-level control laws and their lift to node inputs.

Both laws have the form

    u_k = -x_k / max(|x_k|, eps) * ((eta + c_k) |x_k| + sqrt(2) xi) + (1 - sigma_k / 2) x_k

where ``c_k`` collects the neighbour terms.  For the strongly connected
design ``c_k = sum_l |A_e[k, l]| rho_kl``; for the spanning-tree design the
sum runs over tree neighbours only and gains an extra
``|row k of L_e2| * rho_C`` term for the cotree coupling.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .algebra import EdgeAlgebra, TreePartition
from .interconnection import (EdgeInterconnectionGraph, GainAssignment, SmallGainResult,
                              check_cyclic_small_gain)

MODES = ("strong", "quasi", "off")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ControllerConfig:
    """Controller settings.

    ``gain`` is the uniform neighbour gain coefficient, ``edge_gains``
    overrides it on individual interconnection arcs ``(l, k)``.
    ``cotree_gain`` is the tree-to-cotree gain used by the ``quasi`` design.
    ``sigma`` is either one value or one value per edge (edge ``k`` at
    position ``k - 1``).
    """

    mode: str = "strong"
    eta: float = 0.0
    xi: float = 0.0
    sigma: Union[float, tuple[float, ...]] = 1.0
    gain: float = 0.9487
    edge_gains: Mapping[tuple[int, int], float] = field(default_factory=dict)
    cotree_gain: Optional[float] = None
    alpha_lower: float = 1.0
    alpha_upper: float = 1.0
    epsilon: float = 1e-6

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"controller.mode must be one of {MODES}, got {self.mode!r}")
        for name in ("eta", "xi"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ConfigError(f"controller.{name} must be finite and >= 0, got {v}")
        for name in ("gain", "alpha_lower", "alpha_upper", "epsilon"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ConfigError(f"controller.{name} must be finite and > 0, got {v}")
        if self.cotree_gain is not None and not (math.isfinite(self.cotree_gain) and self.cotree_gain > 0):
            raise ConfigError(f"controller.cotree_gain must be finite and > 0, got {self.cotree_gain}")
        sig = self.sigma if isinstance(self.sigma, tuple) else (self.sigma,)
        for v in sig:
            if not (math.isfinite(v) and v > 0):
                raise ConfigError(f"controller.sigma entries must be finite and > 0, got {v}")
        for arc, v in self.edge_gains.items():
            if not (math.isfinite(v) and v > 0):
                raise ConfigError(f"controller.edge_gains {arc[0]}->{arc[1]} must be > 0, got {v}")

    def sigma_for(self, k: int) -> float:
        if isinstance(self.sigma, tuple):
            return float(self.sigma[k - 1])
        return float(self.sigma)

    def gain_for(self, l: int, k: int) -> float:
        return float(self.edge_gains.get((l, k), self.gain))

    def gains(self, ig: EdgeInterconnectionGraph) -> GainAssignment:
        return GainAssignment.uniform(ig, self.gain, self.edge_gains)


def rho_from_gain(gamma_coeff: float, alpha_lower: float = 1.0, alpha_upper: float = 1.0) -> float:
    """Coefficient of rho = alpha_lower^-1 o gamma^-1 o alpha_upper for linear maps."""
    for name, v in (("gamma_coeff", gamma_coeff), ("alpha_lower", alpha_lower),
                    ("alpha_upper", alpha_upper)):
        if not v > 0:
            raise ConfigError(f"{name} must be positive, got {v}")
    return alpha_upper / (gamma_coeff * alpha_lower)


def quasi_gain_bound(lambda_bar_1: float, n: int) -> float:
    """Upper bound 1 / (lambda_bar_1 (N - 1)) on the tree-to-cotree gain."""
    if n < 2:
        raise ConfigError(f"node count must be at least 2, got {n}")
    if not lambda_bar_1 > 0:
        raise ConfigError(f"lambda_bar_1 must be positive, got {lambda_bar_1}")
    return 1.0 / (lambda_bar_1 * (n - 1))


@dataclass(frozen=True)
class EdgeLaw:
    """Vectorised edge control law for the edges in ``edges`` (in that order)."""

    edges: tuple[int, ...]
    coefficients: np.ndarray
    eta: float
    xi: float
    sigma: np.ndarray
    epsilon: float

    @property
    def bracket(self) -> np.ndarray:
        """Total coefficient on |x_k| inside the bracket, eta included."""
        return self.eta + self.coefficients

    def __call__(self, x: np.ndarray) -> np.ndarray:
        """Controls for stacked edge states ``x`` of shape (len(edges), n)."""
        norm = np.sqrt((x * x).sum(axis=1))
        scale = (self.bracket * norm + math.sqrt(2.0) * self.xi) / np.maximum(norm, self.epsilon)
        return x * ((1.0 - 0.5 * self.sigma) - scale)[:, None]


def _neighbor_coefficient(A_e: np.ndarray, k: int, cfg: ControllerConfig,
                          allowed: Optional[set[int]] = None) -> float:
    total = 0.0
    for l in np.flatnonzero(A_e[k - 1]) + 1:
        l = int(l)
        if l == k or (allowed is not None and l not in allowed):
            continue
        total += abs(int(A_e[k - 1, l - 1])) * rho_from_gain(cfg.gain_for(l, k), cfg.alpha_lower,
                                                               cfg.alpha_upper)
    return total


def strong_law(alg: EdgeAlgebra, cfg: ControllerConfig) -> EdgeLaw:
    m = alg.edge_count
    edges = tuple(range(1, m + 1))
    coeffs = np.array([_neighbor_coefficient(alg.A_e, k, cfg) for k in edges])
    sigma = np.array([cfg.sigma_for(k) for k in edges])
    return EdgeLaw(edges, coeffs, cfg.eta, cfg.xi, sigma, cfg.epsilon)


def tree_law(alg: EdgeAlgebra, tp: TreePartition, cfg: ControllerConfig) -> EdgeLaw:
    if tp.selection.cotree_edges and cfg.cotree_gain is None:
        raise ConfigError("controller.cotree_gain is required for the quasi design")
    tree = tp.selection.tree_edges
    allowed = set(tree)
    rho_c = (rho_from_gain(cfg.cotree_gain, cfg.alpha_lower, cfg.alpha_upper)
             if cfg.cotree_gain is not None else 0.0)
    row_norms = np.linalg.norm(tp.blocks.L_e2, axis=1) if tp.blocks.L_e2.size else np.zeros(len(tree))
    coeffs = np.array([_neighbor_coefficient(alg.A_e, k, cfg, allowed) + row_norms[i] * rho_c
                       for i, k in enumerate(tree)])
    sigma = np.array([cfg.sigma_for(k) for k in tree])
    return EdgeLaw(tuple(tree), coeffs, cfg.eta, cfg.xi, sigma, cfg.epsilon)


def edge_control_strong(k: int, xt: np.ndarray, cfg: ControllerConfig, alg: EdgeAlgebra) -> np.ndarray:
    """Control for edge ``k`` given all stacked edge states ``xt`` (L x n)."""
    law = strong_law(alg, cfg)
    xt = np.asarray(xt, dtype=float).reshape(alg.edge_count, -1)
    return law(xt[k - 1:k])[0]


def edge_control_tree(k: int, xT: np.ndarray, cfg: ControllerConfig, alg: EdgeAlgebra,
                      tp: TreePartition) -> np.ndarray:
    """Control for tree edge ``k`` given stacked tree-edge states ``xT`` ((N-1) x n)."""
    law = tree_law(alg, tp, cfg)
    if k not in law.edges:
        raise ConfigError(f"edge e{k} is not a tree edge")
    i = law.edges.index(k)
    xT =np.asarray(xT, dtype=float).reshape(len(law.edges), -1)
    return law(xT[i:i + 1])[0]


def lift_matrix(tp: TreePartition, mode: str) -> np.ndarray:
    """N x m matrix mapping edge controls to node controls.

    ``strong`` uses the pseudoinverse of ``E^T`` (all edges, original order);
    ``quasi`` uses the pseudoinverse of ``E_T^T`` (tree edges, tree order).
    """
    if mode == "strong":
        return tp.E_pinv.T
    if mode == "quasi":
        return tp.E_T_left_inv.T
    raise ConfigError(f"no lift for mode {mode!r}")


def lift_node_control(pinv_T: np.ndarray, u_edge: np.ndarray) -> np.ndarray:
    """Node controls ``pinv_T @ u_edge`` (blockwise per state dimension)."""
    u_edge = np.asarray(u_edge, dtype=float)
    if u_edge.ndim == 1:
        u_edge = u_edge[:, None]
    if pinv_T.shape[1] != u_edge.shape[0]:
        raise ValueError(f"lift matrix has {pinv_T.shape[1]} columns but {u_edge.shape[0]} edge controls given")
    return pinv_T @ u_edge


def lift_residual(E: np.ndarray, u_node: np.ndarray, u_edge: np.ndarray) -> float:
    """|E^T u - u_e| for incidence matrix ``E`` (or ``E_T``): the part of the
    edge control that no node control can realise."""
    u_edge = np.asarray(u_edge, dtype=float).reshape(E.shape[1], -1)
    return float(np.linalg.norm(E.T @ u_node - u_edge))


@dataclass(frozen=True)
class Synthesis:
    """Validated control design ready for simulation."""

    mode: str
    law: Optional[EdgeLaw]
    lift: Optional[np.ndarray]
    small_gain: Optional[SmallGainResult]
    cotree_bound: Optional[float] = None


def synthesize(cfg: ControllerConfig, node_count: int, alg: EdgeAlgebra, tp: Optional[TreePartition],
               ig: EdgeInterconnectionGraph, strongly_connected: bool) -> Synthesis:
    """Check the gain conditions for ``cfg.mode`` and build the control law.

    Raises :class:`ConfigError` when the graph does not suit the mode, when
    the cyclic small-gain condition fails, or when the tree-to-cotree gain
    violates its bound.
    """
    if cfg.mode == "off":
        return Synthesis("off", None, None, None)
    if tp is None:
        raise ConfigError("the graph has no directed spanning tree")
    gains = cfg.gains(ig)
    if cfg.mode == "strong":
        if not strongly_connected:
            raise ConfigError("mode 'strong' requires a strongly connected graph")
        sg = check_cyclic_small_gain(ig, gains)
        if not sg.satisfied:
            raise ConfigError(f"cyclic small-gain condition fails on cycle "
                              f"{'->'.join(map(str, sg.worst_cycle))} (gain product {sg.worst_product:.6g})")
        return Synthesis("strong", strong_law(alg, cfg), lift_matrix(tp, "strong"), sg)
    sg = check_cyclic_small_gain(ig, gains, nodes=tp.selection.tree_edges)
    if not sg.satisfied:
        raise ConfigError(f"cyclic small-gain condition fails on tree cycle "
                          f"{'->'.join(map(str, sg.worst_cycle))} (gain product {sg.worst_product:.6g})")
    bound = None
    if tp.lambda_bar_1 is not None:
        bound = quasi_gain_bound(tp.lambda_bar_1, node_count)
        if cfg.cotree_gain is None or not cfg.cotree_gain < bound:
            raise ConfigError(f"controller.cotree_gain {cfg.cotree_gain} must be below "
                              f"1/(lambda_bar_1 (N-1)) = {bound:.6g}")
    return Synthesis("quasi", tree_law(alg, tp, cfg), lift_matrix(tp, "quasi"), sg, bound)


def edge_lyapunov(x_edges: np.ndarray) -> np.ndarray:
    """V_k = |x_k|^2 / 2 for stacked edge states (last axis is the state)."""
    return 0.5 * np.sum(np.asarray(x_edges) ** 2, axis=-1)


def worst_case_edge_derivative(law: EdgeLaw, A_e: np.ndarray, k: int, x_k: np.ndarray,
                               neighbors: Mapping[int, np.ndarray], lipschitz: float) -> float:
    """Upper estimate of dV_k/dt for edge ``k`` under ``law``.

    The drift difference and the disturbance difference are taken at their
    largest admissible size (``lipschitz * |x_k|`` and ``sqrt(2) * xi``) and
    aligned with ``x_k``; the coupling terms use the given neighbour states.
    ``neighbors`` maps edge numbers to their states; edges not listed count
    as zero.
    """
    x_k = np.asarray(x_k, dtype=float)
    norm = float(np.linalg.norm(x_k))
    u = law(x_k[None, :])[0]
    coupling = sum(float(A_e[k - 1, l - 1]) * float(x_k @ np.asarray(x_l, dtype=float))
                   for l, x_l in neighbors.items() if l != k)
    return (lipschitz * norm ** 2 - norm ** 2 - coupling + math.sqrt(2.0) * law.xi * norm
            + float(x_k @ u))
