"""Edge-interconnection digraph, its SCCs and simple cycles, and the cyclic small-gain test.

The interconnection graph has one node per edge of the original digraph
(labelled by the edge number).  An arc ``l -> k`` means that the dynamics of
edge state ``k`` is driven by edge state ``l``.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

import numpy as np

from .algebra import EdgeAlgebra
from .graph import Digraph


class CycleLimitExceeded(RuntimeError):
    def __init__(self, count: int, cap: int):
        super().__init__(f"simple-cycle enumeration stopped after {count} cycles (cap {cap})")
        self.count = count
        self.cap = cap


class GainError(ValueError):
    pass


@dataclass(frozen=True)
class EdgeInterconnectionGraph:
    node_count: int
    edges: tuple[tuple[int, int], ...]
    origin: Optional[Digraph] = field(default=None, compare=False, repr=False)

    def successors(self, nodes: Optional[Iterable[int]] = None) -> dict[int, list[int]]:
        """Adjacency lists restricted to ``nodes`` (all nodes by default), sorted."""
        keep = set(range(1, self.node_count + 1)) if nodes is None else set(nodes)
        succ: dict[int, list[int]] = {v: [] for v in sorted(keep)}
        for l, k in self.edges:
            if l in keep and k in keep:
                succ[l].append(k)
        for v in succ:
            succ[v].sort()
        return succ

    def in_neighbors(self, k: int) -> list[int]:
        return sorted(l for l, kk in self.edges if kk == k)


def build_edge_interconnection(g: Digraph, alg: EdgeAlgebra) -> EdgeInterconnectionGraph:
    """Arc ``l -> k`` for every off-diagonal nonzero ``A_e[k, l]``."""
    if g.edge_count != alg.edge_count:
        raise ValueError("graph and edge algebra have different edge counts")
    arcs = []
    for k in range(alg.edge_count):
        for l in np.flatnonzero(alg.A_e[k]):
            if l != k:
                arcs.append((int(l) + 1, k + 1))
    arcs.sort()
    return EdgeInterconnectionGraph(g.edge_count, tuple(arcs), g)


def _tarjan(succ: Mapping[int, list[int]]) -> list[tuple[int, ...]]:
    # iterative Tarjan; components come out sinks-first
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    out: list[tuple[int, ...]] = []
    counter = 0
    for root in sorted(succ):
        if root in index:
            continue
        work = [(root, iter(succ[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ[w])))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(tuple(sorted(comp)))
    return out


def strongly_connected_components(ig: EdgeInterconnectionGraph,
                                  nodes: Optional[Iterable[int]] = None) -> list[tuple[int, ...]]:
    """SCCs listed in a topological order of the condensation (sources first)."""
    return list(reversed(_tarjan(ig.successors(nodes))))


def condensation_edges(ig: EdgeInterconnectionGraph,
                       sccs: list[tuple[int, ...]]) -> set[tuple[int, int]]:
    """Arcs between SCCs, as pairs of positions in ``sccs``."""
    where = {v: i for i, comp in enumerate(sccs) for v in comp}
    return {(where[l], where[k]) for l, k in ig.edges
            if l in where and k in where and where[l] != where[k]}


def interconnection_strongly_connected(ig: EdgeInterconnectionGraph) -> bool:
    return ig.node_count > 0 and len(strongly_connected_components(ig)) == 1


def _johnson(succ: dict[int, list[int]], cap: int):
    """Elementary circuits (Johnson 1975) of the graph ``succ``."""
    graph = {v: set(ws) for v, ws in succ.items()}
    found = 0

    def nontrivial(sub):
        return [c for c in _tarjan({v: sorted(graph[v] & set(sub)) for v in sub}) if len(c) > 1]

    pending = nontrivial(sorted(graph))
    while pending:
        comp = pending.pop()
        start = min(comp)
        members = set(comp)
        nbrs = {v: sorted(graph[v] & members) for v in comp}
        path = [start]
        blocked = {start}
        closed: set[int] = set()
        B: dict[int, set[int]] = defaultdict(set)
        stack = [(start, list(reversed(nbrs[start])))]
        while stack:
            node, todo = stack[-1]
            if todo:
                nxt = todo.pop()
                if nxt == start:
                    found += 1
                    if found > cap:
                        raise CycleLimitExceeded(found, cap)
                    yield tuple(path)
                    closed.update(path)
                elif nxt not in blocked:
                    path.append(nxt)
                    stack.append((nxt, list(reversed(nbrs[nxt]))))
                    closed.discard(nxt)
                    blocked.add(nxt)
                    continue
            if not todo:
                if node in closed:
                    release = {node}
                    while release:
                        u = release.pop()
                        if u in blocked:
                            blocked.discard(u)
                            release.update(B[u])
                            B[u].clear()
                else:
                    for w in nbrs[node]:
                        B[w].add(node)
                stack.pop()
                path.pop()
        # drop the start node and recurse into what remains of the component
        for v in graph:
            graph[v].discard(start)
        graph[start] = set()
        pending.extend(nontrivial(sorted(members - {start})))


def canonical_cycle(cycle) -> tuple[int, ...]:
    """Rotate a cycle so that it starts at its smallest node."""
    i = cycle.index(min(cycle))
    return tuple(cycle[i:]) + tuple(cycle[:i])


def enumerate_simple_cycles(ig: EdgeInterconnectionGraph, max_len: Optional[int] = None,
                            nodes: Optional[Iterable[int]] = None,
                            cap: int = 10**6) -> list[tuple[int, ...]]:
    """All elementary cycles, each once, ordered by (length, nodes).

    A cycle ``(v0, v1, ..., vr)`` follows arcs ``v0 -> v1 -> ... -> vr -> v0``
    and starts at its smallest node.
    """
    if max_len is not None and max_len < 2:
        raise ValueError("max_len must be at least 2")
    cycles = [canonical_cycle(c) for c in _johnson(ig.successors(nodes), cap)]
    if max_len is not None:
        cycles = [c for c in cycles if len(c) <= max_len]
    return sorted(cycles, key=lambda c: (len(c), c))


@dataclass(frozen=True)
class GainAssignment:
    """Linear gain coefficient ``c`` for each interconnection arc ``(l, k)``."""

    coefficients: Mapping[tuple[int, int], float]

    def __post_init__(self):
        for arc, c in self.coefficients.items():
            if not (math.isfinite(c) and c > 0):
                raise GainError(f"gain on arc {arc[0]}->{arc[1]} must be positive and finite, got {c}")

    @classmethod
    def uniform(cls, ig: EdgeInterconnectionGraph, c: float,
                overrides: Optional[Mapping[tuple[int, int], float]] = None) -> "GainAssignment":
        coeffs = {arc: float(c) for arc in ig.edges}
        for arc, v in (overrides or {}).items():
            if arc not in coeffs:
                raise GainError(f"arc {arc[0]}->{arc[1]} is not an interconnection arc")
            coeffs[arc] = float(v)
        return cls(coeffs)

    def __getitem__(self, arc: tuple[int, int]) -> float:
        return self.coefficients[arc]


@dataclass(frozen=True)
class SmallGainResult:
    satisfied: bool
    worst_cycle: Optional[tuple[int, ...]]
    worst_product: float
    cycle_count: int


def cycle_gain(cycle: tuple[int, ...], gains: GainAssignment) -> float:
    prod = 1.0
    for i, v in enumerate(cycle):
        prod *= gains[(v, cycle[(i + 1) % len(cycle)])]
    return prod


def check_cyclic_small_gain(ig: EdgeInterconnectionGraph, gains: GainAssignment,
                            margin: float = 0.0, nodes: Optional[Iterable[int]] = None,
                            max_len: Optional[int] = None, cap: int = 10**6) -> SmallGainResult:
    """Check that every simple cycle has gain product below ``1 - margin``.

    ``nodes`` restricts the check to the induced subgraph (e.g. the tree
    edges only).
    """
    keep = None if nodes is None else set(nodes)
    for l, k in ig.edges:
        if keep is not None and (l not in keep or k not in keep):
            continue
        if (l, k) not in gains.coefficients:
            raise GainError(f"no gain assigned to interconnection arc {l}->{k}")
    cycles = enumerate_simple_cycles(ig, max_len=max_len, nodes=nodes, cap=cap)
    worst, worst_p = None, 0.0
    for c in cycles:
        p = cycle_gain(c, gains)
        if p > worst_p:
            worst, worst_p = c, p
    return SmallGainResult(worst_p < 1.0 - margin, worst, worst_p, len(cycles))
