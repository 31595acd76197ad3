"""Digraph representation, incidence matrices and edge-neighbourhood queries.

Node and edge labels are 1-based everywhere in the public API, so that edge
``k`` of a graph is the ``k``-th pair it was built from.  Matrices are plain
numpy arrays indexed from zero; column ``k - 1`` belongs to edge ``k``.
"""
from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np


class GraphError(ValueError):
    """Raised for malformed digraphs or invalid tree selections."""


@dataclass(frozen=True)
class Digraph:
    """Directed graph with ``node_count`` nodes and an ordered edge list.

    ``edges[k - 1] == (initial, terminal)`` for edge ``k``.
    """

    node_count: int
    edges: tuple[tuple[int, int], ...]
    tails: np.ndarray = field(init=False, repr=False, compare=False)
    heads: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.node_count) != self.node_count or self.node_count < 1:
            raise GraphError(f"node count must be a positive integer, got {self.node_count!r}")
        edges = tuple((int(a), int(b)) for a, b in self.edges)
        seen = {}
        for k, (a, b) in enumerate(edges, start=1):
            for v in (a, b):
                if not 1 <= v <= self.node_count:
                    raise GraphError(
                        f"edge e{k} = ({a}, {b}) references node {v} outside 1..{self.node_count}")
            if a == b:
                raise GraphError(f"edge e{k} = ({a}, {b}) is a self-loop")
            if (a, b) in seen:
                raise GraphError(f"edge e{k} = ({a}, {b}) duplicates edge e{seen[(a, b)]}")
            seen[(a, b)] = k
        object.__setattr__(self, "node_count", int(self.node_count))
        object.__setattr__(self, "edges", edges)
        tails = np.array([a - 1 for a, _ in edges], dtype=int)
        heads = np.array([b - 1 for _, b in edges], dtype=int)
        tails.flags.writeable = False
        heads.flags.writeable = False
        object.__setattr__(self, "tails", tails)
        object.__setattr__(self, "heads", heads)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def out_edges(self, node: int) -> list[int]:
        """Edge labels leaving ``node``, ascending."""
        return [k for k, (a, _) in enumerate(self.edges, start=1) if a == node]

    def out_degree(self, node: int) -> int:
        return len(self.out_edges(node))


def parse_digraph(node_count: int, edge_pairs: Iterable[Sequence[int]]) -> Digraph:
    """Build a :class:`Digraph`; edge numbering follows the input order."""
    return Digraph(node_count, tuple(tuple(p) for p in edge_pairs))


def read_graph_text(text: str) -> Digraph:
    """Parse the plain-text graph format.

    The first non-comment line holds ``N L``; the next ``L`` lines hold
    ``initial terminal`` pairs (1-based).  ``#`` starts a comment.
    """
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphError(f"line {lineno}: expected two integers, got {raw.strip()!r}")
        try:
            rows.append((lineno, int(parts[0]), int(parts[1])))
        except ValueError:
            raise GraphError(f"line {lineno}: expected two integers, got {raw.strip()!r}") from None
    if not rows:
        raise GraphError("empty graph file")
    _, n, count = rows[0]
    body = rows[1:]
    if len(body) != count:
        raise GraphError(f"header declares {count} edges but {len(body)} edge lines follow")
    try:
        return parse_digraph(n, [(a, b) for _, a, b in body])
    except GraphError as exc:
        m = re.search(r"edge e(\d+)", str(exc))
        if m is None:
            raise GraphError(f"line {rows[0][0]}: {exc}") from None
        raise GraphError(f"line {body[int(m.group(1)) - 1][0]}: {exc}") from None


def load_graph(path) -> Digraph:
    return read_graph_text(Path(path).read_text())


def format_graph(g: Digraph) -> str:
    lines = [f"{g.node_count} {g.edge_count}"]
    lines += [f"{a} {b}" for a, b in g.edges]
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class IncidenceSet:
    """Incidence matrix ``E`` with its in/out split and node-level views.

    ``E_in`` carries the -1 entries (terminal nodes) and ``E_out`` the +1
    entries (initial nodes), so ``E == E_in + E_out``.
    """

    E: np.ndarray
    E_in: np.ndarray
    E_out: np.ndarray
    degree: np.ndarray
    adjacency: np.ndarray


def incidence_decomposition(g: Digraph) -> IncidenceSet:
    n, m = g.node_count, g.edge_count
    cols = np.arange(m)
    E_out = np.zeros((n, m), dtype=int)
    E_in = np.zeros((n, m), dtype=int)
    E_out[g.tails, cols] = 1
    E_in[g.heads, cols] = -1
    adjacency = np.zeros((n, n), dtype=int)
    adjacency[g.tails, g.heads] = 1
    degree = np.diag(E_out.sum(axis=1))
    mats = (E_in + E_out, E_in, E_out, degree, adjacency)
    for a in mats:
        a.flags.writeable = False
    return IncidenceSet(*mats)


def reachable_from(g: Digraph, start: int, edges: Optional[Iterable[int]] = None) -> set[int]:
    """Nodes reachable from ``start`` along the given edges (all edges by default)."""
    use = range(1, g.edge_count + 1) if edges is None else edges
    succ: dict[int, list[int]] = {}
    for k in use:
        a, b = g.edges[k - 1]
        succ.setdefault(a, []).append(b)
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for v in succ.get(u, ()):
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def _reversed(g: Digraph) -> Digraph:
    return Digraph(g.node_count, tuple((b, a) for a, b in g.edges))


def is_strongly_connected(g: Digraph) -> bool:
    # forward and backward reachability from node 1
    full = g.node_count
    return (len(reachable_from(g, 1)) == full
            and len(reachable_from(_reversed(g), 1)) == full)


@dataclass(frozen=True)
class TreeSelection:
    """Directed spanning tree (``tree_edges``) and its complement."""

    root: int
    tree_edges: tuple[int, ...]
    cotree_edges: tuple[int, ...]

    @property
    def order(self) -> tuple[int, ...]:
        """Edge labels tree-first, the column order of ``[E_T E_C]``."""
        return self.tree_edges + self.cotree_edges


def _bfs_tree(g: Digraph, root: int) -> Optional[list[int]]:
    visited = {root}
    taken = []
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for k in g.out_edges(u):
            v = g.edges[k - 1][1]
            if v not in visited:
                visited.add(v)
                taken.append(k)
                queue.append(v)
    if len(visited) != g.node_count:
        return None
    return taken


def _selection(g: Digraph, root: int, tree: Iterable[int]) -> TreeSelection:
    tree = tuple(sorted(tree))
    cotree = tuple(k for k in range(1, g.edge_count + 1) if k not in set(tree))
    return TreeSelection(root, tree, cotree)


def validate_tree(g: Digraph, tree_edges: Sequence[int], root: Optional[int] = None) -> TreeSelection:
    """Check that ``tree_edges`` form a directed spanning tree of ``g``."""
    tree = [int(k) for k in tree_edges]
    for k in tree:
        if not 1 <= k <= g.edge_count:
            raise GraphError(f"tree edge e{k} does not exist (graph has {g.edge_count} edges)")
    if len(set(tree)) != len(tree):
        raise GraphError(f"tree edge list {tree} contains repeats")
    if len(tree) != g.node_count - 1:
        raise GraphError(f"a spanning tree needs {g.node_count - 1} edges, got {len(tree)}")
    if root is None:
        entered = {g.edges[k - 1][1] for k in tree}
        # N-1 edges cannot enter all N nodes, so a source always exists
        root = min(v for v in range(1, g.node_count + 1) if v not in entered)
    reach = reachable_from(g, root, tree)
    missing = [v for v in range(1, g.node_count + 1) if v not in reach]
    if missing:
        raise GraphError(f"tree edges {tree} do not reach node {missing[0]} from root {root}")
    return _selection(g, root, tree)


def find_directed_spanning_tree(g: Digraph, root: Optional[int] = None,
                                forced_tree: Optional[Sequence[int]] = None) -> Optional[TreeSelection]:
    """Return a directed spanning tree of ``g`` or ``None`` if none exists.

    With ``forced_tree`` the given edges are validated and returned.
    Otherwise roots are tried in ascending order (or only ``root``) and the
    tree is grown breadth-first, always taking the lowest-numbered edge.
    """
    if forced_tree is not None:
        return validate_tree(g, forced_tree, root)
    roots = [root] if root is not None else range(1, g.node_count + 1)
    for r in roots:
        taken = _bfs_tree(g, r)
        if taken is not None:
            return _selection(g, r, taken)
    return None


def is_quasi_strongly_connected(g: Digraph) -> bool:
    return find_directed_spanning_tree(g) is not None


def outgoing_edge_neighbors(g: Digraph, k: int) -> frozenset[int]:
    """Outgoing neighbours of edge ``k``.

    These are the edges leaving the terminal node of ``e_k`` (``e_k`` is their
    parent edge) together with the siblings of ``e_k`` (other edges leaving
    its initial node).
    """
    if not 1 <= k <= g.edge_count:
        raise GraphError(f"edge e{k} does not exist")
    a, b = g.edges[k - 1]
    return frozenset(l for l, (c, _) in enumerate(g.edges, start=1)
                     if l != k and c in (a, b))


def sibling_groups(g: Digraph) -> dict[int, tuple[int, ...]]:
    """Map each node with outgoing edges to the edges it emits."""
    groups: dict[int, list[int]] = {}
    for k, (a, _) in enumerate(g.edges, start=1):
        groups.setdefault(a, []).append(k)
    return {v: tuple(ks) for v, ks in sorted(groups.items())}
