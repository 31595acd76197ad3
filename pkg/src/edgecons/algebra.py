"""Graph and edge Laplacians, edge adjacency, spectra and tree-partition blocks."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .graph import Digraph, GraphError, IncidenceSet, TreeSelection


class ConsistencyError(RuntimeError):
    """Two independent constructions of the same matrix disagree."""


@dataclass(frozen=True)
class EdgeAlgebra:
    """``L_G = E_out E^T``, ``L_e = E^T E_out`` and the edge adjacency ``A_e``."""

    L_G: np.ndarray
    L_e: np.ndarray
    A_e: np.ndarray
    tails: np.ndarray
    heads: np.ndarray

    @property
    def edge_count(self) -> int:
        return self.L_e.shape[0]


def _endpoints(inc: IncidenceSet) -> tuple[np.ndarray, np.ndarray]:
    return np.argmax(inc.E_out, axis=0), np.argmin(inc.E_in, axis=0)


def edge_adjacency(tails: np.ndarray, heads: np.ndarray) -> np.ndarray:
    """Edge adjacency from edge endpoints.

    ``A[k, l] = +1`` when ``e_k`` and ``e_l`` leave the same node and ``-1``
    when ``e_l`` leaves the node that ``e_k`` enters.
    """
    m = len(tails)
    A = np.zeros((m, m), dtype=int)
    for k in range(m):
        for l in range(m):
            if l == k:
                continue
            if tails[l] == tails[k]:
                A[k, l] = 1
            elif tails[l] == heads[k]:
                A[k, l] = -1
    return A


def build_edge_algebra(inc: IncidenceSet) -> EdgeAlgebra:
    E, E_out = inc.E, inc.E_out
    L_G = E_out @ E.T
    if not np.array_equal(L_G, inc.degree - inc.adjacency):
        raise ConsistencyError("E_out E^T differs from degree - adjacency")
    L_e = E.T @ E_out
    tails, heads = _endpoints(inc)
    A_e = edge_adjacency(tails, heads)
    if not np.array_equal(A_e, L_e - np.eye(len(tails), dtype=int)):
        raise ConsistencyError("combinatorial edge adjacency differs from E^T E_out - I")
    for a in (L_G, L_e, A_e):
        a.flags.writeable = False
    return EdgeAlgebra(L_G, L_e, A_e, tails, heads)


def integer_charpoly(m: np.ndarray) -> list[int]:
    """Characteristic polynomial of an integer matrix, highest degree first.

    Faddeev-LeVerrier in exact integer arithmetic; every division is exact
    for integer input.
    """
    a = [[int(v) for v in row] for row in np.asarray(m)]
    n = len(a)
    coeffs = [1]
    prev = [[0] * n for _ in range(n)]
    c = 1
    for k in range(1, n + 1):
        mk = [[sum(a[i][t] * prev[t][j] for t in range(n)) + (c if i == j else 0)
               for j in range(n)] for i in range(n)]
        trace = sum(a[i][t] * mk[t][i] for i in range(n) for t in range(n))
        c = -trace // k
        coeffs.append(c)
        prev = mk
    return coeffs


# Rational polynomials are lists of Fractions, highest degree first.

def _trim(p):
    i = 0
    while i < len(p) - 1 and p[i] == 0:
        i += 1
    return p[i:]


def _sub(p, q):
    n = max(len(p), len(q))
    p = [Fraction(0)] * (n - len(p)) + list(p)
    q = [Fraction(0)] * (n - len(q)) + list(q)
    return _trim([x - y for x, y in zip(p, q)])


def _divmod(num, den):
    num = list(num)
    quot = []
    while len(num) >= len(den):
        f = num[0] / den[0]
        quot.append(f)
        for i in range(len(den)):
            num[i] -= f * den[i]
        num.pop(0)
    return _trim(quot or [Fraction(0)]), _trim(num or [Fraction(0)])


def _monic_gcd(a, b):
    while any(b):
        a, b = b, _divmod(a, b)[1]
    return [x / a[0] for x in a]


def _derivative(p):
    n = len(p) - 1
    return _trim([c * (n - i) for i, c in enumerate(p[:-1])] or [Fraction(0)])


def squarefree_factors(coeffs) -> list[tuple[list[Fraction], int]]:
    """Yun's decomposition ``p = lead * prod f_i ** i`` over the rationals.

    Returns the nonconstant ``(f_i, i)`` pairs with each ``f_i`` monic.
    """
    p = [Fraction(c) for c in _trim(list(coeffs))]
    if len(p) < 2:
        return []
    dp = _derivative(p)
    a = _monic_gcd(p, dp)
    b = _divmod(p, a)[0]
    d = _sub(_divmod(dp, a)[0], _derivative(b))
    out = []
    mult = 1
    while len(b) > 1:
        a = _monic_gcd(b, d)
        b = _divmod(b, a)[0]
        if len(a) > 1:
            out.append((a, mult))
        d = _sub(_divmod(d, a)[0], _derivative(b))
        mult += 1
    return out


def _is_integer_matrix(m: np.ndarray) -> bool:
    return bool(np.all(np.isfinite(m)) and np.all(m == np.round(m))
                and np.max(np.abs(m), initial=0) < 2**20)


def _exact_multiplicity_means(m: np.ndarray, ev: np.ndarray) -> np.ndarray:
    # Each nonzero root of exact multiplicity k takes the mean of the k
    # nearest LAPACK values; zero eigenvalues are dropped by exact count.
    targets = []
    for f, mult in squarefree_factors(integer_charpoly(m)):
        if f[-1] == 0:
            f = f[:-1]
        if len(f) > 1:
            targets += [(complex(r), mult) for r in np.roots([float(x) for x in f])]
    free = list(range(len(ev)))
    out = []
    for root, mult in sorted(targets, key=lambda t: -t[1]):
        free.sort(key=lambda i: abs(ev[i] - root))
        take, free = free[:mult], free[mult:]
        out += [ev[take].mean()] * mult
    return np.array(out, dtype=complex)


def nonzero_spectrum(m: np.ndarray, tol: float = 1e-8, cluster: bool = True) -> np.ndarray:
    """Eigenvalues of ``m`` with modulus above ``tol``, sorted by (real, imag).

    For integer matrices with ``cluster`` set, multiplicities come from the
    exact characteristic polynomial.  Zero eigenvalues are dropped by count
    and the values LAPACK returns for a multiple eigenvalue are replaced by
    their mean, which undoes the splitting of defective eigenvalues.
    Otherwise the raw LAPACK values are filtered by ``tol``.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if m.size == 0:
        return np.zeros(0, dtype=complex)
    try:
        ev = np.linalg.eigvals(m).astype(complex)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(f"eigenvalues of {m.shape[0]}x{m.shape[1]} matrix: {exc}") from exc
    if cluster and _is_integer_matrix(m):
        ev = _exact_multiplicity_means(m, ev)
    ev = ev[np.abs(ev) > tol]
    return ev[np.lexsort((ev.imag, ev.real))]


def spectra_match(a, b, tol: float = 1e-8) -> bool:
    """Multiset equality of two eigenvalue lists up to ``tol``.

    Pairs are formed greedily, closest first; the lists match when every
    value is paired within ``tol``.
    """
    a, b = list(np.asarray(a, dtype=complex)), list(np.asarray(b, dtype=complex))
    if len(a) != len(b):
        return False
    if not a:
        return True
    d = np.abs(np.subtract.outer(np.array(a), np.array(b)))
    free_a, free_b = set(range(len(a))), set(range(len(b)))
    for flat in np.argsort(d, axis=None, kind="stable"):
        i, j = divmod(int(flat), len(b))
        if i in free_a and j in free_b:
            if d[i, j] > tol:
                return False
            free_a.discard(i)
            free_b.discard(j)
    return True


def matrix_rank(m: np.ndarray, tol: float = 1e-9) -> int:
    """Rank by Gaussian elimination with partial pivoting."""
    a = np.array(m, dtype=float)
    if a.size == 0:
        return 0
    rows, cols = a.shape
    rank = 0
    for c in range(cols):
        if rank == rows:
            break
        p = rank + int(np.argmax(np.abs(a[rank:, c])))
        if abs(a[p, c]) <= tol:
            continue
        a[[rank, p]] = a[[p, rank]]
        a[rank + 1:] -= np.outer(a[rank + 1:, c] / a[rank, c], a[rank])
        rank += 1
    return rank


@dataclass(frozen=True)
class ZeroEigenStructure:
    rank_Le: int
    nullity: int
    semisimple: bool


def zero_eigen_structure(alg: EdgeAlgebra, g: Optional[Digraph] = None,
                         tol: float = 1e-9) -> ZeroEigenStructure:
    """Rank, nullity and semisimplicity of the zero eigenvalue of ``L_e``.

    Zero is a simple root of the minimal polynomial exactly when
    ``rank(L_e) == rank(L_e @ L_e)``.
    """
    if g is not None and g.edge_count != alg.edge_count:
        raise ValueError("graph and edge algebra have different edge counts")
    L_e = alg.L_e
    r1 = matrix_rank(L_e, tol)
    r2 = matrix_rank(L_e @ L_e, tol)
    return ZeroEigenStructure(r1, L_e.shape[0] - r1, r1 == r2)


@dataclass(frozen=True)
class EdgeBlocks:
    """Edge Laplacian and edge adjacency split tree-first."""

    order: tuple[int, ...]
    L_e1: np.ndarray
    L_e2: np.ndarray
    L_e3: np.ndarray
    L_e4: np.ndarray
    A_e1: np.ndarray
    A_e2: np.ndarray
    A_e3: np.ndarray
    A_e4: np.ndarray


def _split(m: np.ndarray, order, t: int):
    idx = np.asarray(order, dtype=int) - 1
    p = m[np.ix_(idx, idx)]
    return p[:t, :t], p[:t, t:], p[t:, :t], p[t:, t:]


def edge_laplacian_blocks(alg: EdgeAlgebra, sel: TreeSelection) -> EdgeBlocks:
    t = len(sel.tree_edges)
    Lb = _split(alg.L_e, sel.order, t)
    Ab = _split(alg.A_e, sel.order, t)
    # L_e1 = I + A_e1, L_e2 = A_e2, L_e3 = A_e3, L_e4 = I + A_e4
    expected = (np.eye(t, dtype=int) + Ab[0], Ab[1], Ab[2],
                np.eye(alg.edge_count - t, dtype=int) + Ab[3])
    if not all(np.array_equal(x, y) for x, y in zip(Lb, expected)):
        raise ConsistencyError("edge Laplacian blocks disagree with I + A_e blocks")
    return EdgeBlocks(tuple(sel.order), *Lb, *Ab)


@dataclass(frozen=True)
class TreePartition:
    """Spanning-tree factorisation ``E P = E_T R`` with ``R = [I T]``.

    ``P`` is the tree-first column permutation ``selection.order``.  ``R``,
    ``E_T`` and ``E_C`` live in that permuted order, while ``E_pinv`` is
    returned in the original edge order (rows indexed by edge ``k - 1``).
    """

    selection: TreeSelection
    E_T: np.ndarray
    E_C: np.ndarray
    E_out_T: np.ndarray
    E_out_C: np.ndarray
    T: np.ndarray
    R: np.ndarray
    E_T_left_inv: np.ndarray
    R_right_inv: np.ndarray
    E_pinv: np.ndarray
    blocks: EdgeBlocks
    lambda_bar_1: Optional[float]

    @property
    def tree_index(self) -> np.ndarray:
        return np.asarray(self.selection.tree_edges, dtype=int) - 1

    @property
    def cotree_index(self) -> np.ndarray:
        return np.asarray(self.selection.cotree_edges, dtype=int) - 1


def smallest_nonzero_eigenvalue(sym: np.ndarray, tol: float = 1e-8) -> Optional[float]:
    if sym.size == 0:
        return None
    ev = np.linalg.eigvalsh(sym)
    ev = ev[ev > tol]
    if not ev.size:
        return None
    lam = float(ev.min())
    # integer matrix with an exact integer eigenvalue: return it exactly
    j = round(lam)
    if _is_integer_matrix(sym) and abs(lam - j) < 1e-6:
        value = 0
        for c in integer_charpoly(sym):
            value = value * j + c
        if value == 0:
            return float(j)
    return lam


def tree_partition(inc: IncidenceSet, sel: TreeSelection, tol: float = 1e-8) -> TreePartition:
    """Tree/cotree split, ``T``, ``R`` and the pseudoinverse of ``E``.

    ``lambda_bar_1`` is the smallest nonzero eigenvalue of ``T T^T``; it is
    ``None`` when there are no cotree edges.
    """
    ti = np.asarray(sel.tree_edges, dtype=int) - 1
    ci = np.asarray(sel.cotree_edges, dtype=int) - 1
    E = inc.E.astype(float)
    E_T, E_C = E[:, ti], E[:, ci]
    gram = E_T.T @ E_T
    if matrix_rank(gram) != len(ti):
        raise GraphError(f"tree edges {list(sel.tree_edges)} do not give a full-column-rank E_T")
    E_T_left_inv = np.linalg.solve(gram, E_T.T)
    T = E_T_left_inv @ E_C
    # each cotree column is a signed path sum of tree columns, so T is integer
    T_int = np.round(T)
    if np.array_equal(E_T @ T_int, E_C):
        T = T_int + 0.0
    R = np.hstack([np.eye(len(ti)), T])
    R_right_inv = R.T @ np.linalg.inv(R @ R.T)
    pinv_perm = R_right_inv @ E_T_left_inv
    E_pinv = np.empty_like(pinv_perm)
    E_pinv[np.concatenate([ti, ci])] = pinv_perm

    E_out = inc.E_out
    E_out_T, E_out_C = E_out[:, ti], E_out[:, ci]
    # blocks straight from the partitioned incidence matrices
    L_blocks = (inc.E[:, ti].T @ E_out_T, inc.E[:, ti].T @ E_out_C,
                inc.E[:, ci].T @ E_out_T, inc.E[:, ci].T @ E_out_C)
    blocks = EdgeBlocks(tuple(sel.order), *L_blocks,
                        L_blocks[0] - np.eye(len(ti), dtype=int), L_blocks[1], L_blocks[2],
                        L_blocks[3] - np.eye(len(ci), dtype=int))
    lam = smallest_nonzero_eigenvalue(T @ T.T, tol) if T.size else None
    return TreePartition(sel, E_T, E_C, E_out_T, E_out_C, T, R, E_T_left_inv, R_right_inv,
                         E_pinv, blocks, lam)


def penrose_residuals(a: np.ndarray, a_pinv: np.ndarray) -> tuple[float, float, float, float]:
    """Max-abs residuals of the four Moore-Penrose conditions."""
    ax = a @ a_pinv
    xa = a_pinv @ a

    def mx(m):
        return float(np.max(np.abs(m))) if m.size else 0.0

    return (mx(ax @ a - a), mx(xa @ a_pinv - a_pinv), mx(ax - ax.T), mx(xa - xa.T))


def format_matrix(m: np.ndarray, precision: int = 6) -> str:
    """Row-major, space-separated text; integers print without decimals."""
    m = np.atleast_2d(np.asarray(m))
    out = []
    for row in m:
        cells = []
        for v in row:
            v = float(v)
            if v == int(v):
                cells.append(str(int(v)))
            else:
                cells.append(f"{v:.{precision}g}")
        out.append(" ".join(cells))
    return "\n".join(out)
