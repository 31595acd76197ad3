"""Executable graph-algebra checks behind the ``verify`` command."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .algebra import (ConsistencyError, build_edge_algebra, format_matrix, matrix_rank,
                      nonzero_spectrum, penrose_residuals, spectra_match, tree_partition,
                      zero_eigen_structure)
from .graph import (Digraph, GraphError, find_directed_spanning_tree, incidence_decomposition,
                    is_quasi_strongly_connected, is_strongly_connected, sibling_groups)
from .interconnection import (CycleLimitExceeded, GainAssignment, build_edge_interconnection,
                              check_cyclic_small_gain, condensation_edges,
                              interconnection_strongly_connected, strongly_connected_components)

TOL = 1e-8


@dataclass(frozen=True)
class Check:
    name: str
    status: str  # "pass", "fail" or "skip"
    detail: str = ""

    @property
    def failed(self) -> bool:
        return self.status == "fail"


@dataclass
class VerifyReport:
    checks: list[Check] = field(default_factory=list)
    sections: list[tuple[str, str]] = field(default_factory=list)

    def add(self, name: str, ok: bool, detail: str = "") -> None:
        self.checks.append(Check(name, "pass" if ok else "fail", detail))

    def skip(self, name: str, reason: str) -> None:
        self.checks.append(Check(name, "skip", reason))

    @property
    def ok(self) -> bool:
        return not any(c.failed for c in self.checks)

    def render(self, matrices: bool = True) -> str:
        out = []
        if matrices:
            for title, body in self.sections:
                out.append(f"{title}:")
                out.extend("  " + line for line in body.splitlines())
            out.append("")
        for c in self.checks:
            line = f"[{c.status.upper():4}] {c.name}"
            if c.detail:
                line += f"  ({c.detail})"
            out.append(line)
        n_fail = sum(c.failed for c in self.checks)
        out.append(f"{'OK' if n_fail == 0 else 'FAILED'}: {len(self.checks)} checks, {n_fail} failed")
        return "\n".join(out)


def _rooted_tree(g: Digraph) -> bool:
    return (g.edge_count == g.node_count - 1 and find_directed_spanning_tree(g) is not None)


def verify_graph(g: Digraph, tree: Optional[Sequence[int]] = None, gain: float = 0.9487,
                 cycle_cap: int = 10**5) -> VerifyReport:
    """Run every algebraic check on ``g`` and collect the outcomes.

    ``gain`` is the uniform coefficient used for the small-gain summary.
    Failures are report content; only an invalid ``tree`` raises.
    """
    rep = VerifyReport()
    inc = incidence_decomposition(g)
    rep.sections.append(("E", format_matrix(inc.E)))
    rep.add("E = E_in + E_out", np.array_equal(inc.E, inc.E_in + inc.E_out))
    try:
        alg = build_edge_algebra(inc)
    except ConsistencyError as exc:
        rep.add("L_G = E_out E^T = degree - adjacency, L_e = I + A_e", False, str(exc))
        return rep
    rep.sections += [("L_G", format_matrix(alg.L_G)), ("A_e", format_matrix(alg.A_e))]
    rep.add("L_G = E_out E^T = degree - adjacency",
            np.array_equal(inc.E_out @ inc.E.T, inc.degree - inc.adjacency)
            and np.array_equal(alg.L_G, inc.degree - inc.adjacency))
    rep.add("L_e = I + A_e", np.array_equal(alg.L_e, np.eye(g.edge_count, dtype=int) + alg.A_e))

    qsc = is_quasi_strongly_connected(g)
    rep.add("quasi-strongly connected", qsc)
    if qsc:
        sg, se = nonzero_spectrum(alg.L_G), nonzero_spectrum(alg.L_e)
        rep.add("nonzero spectra of L_G and L_e agree", spectra_match(sg, se, TOL),
                " ".join(f"{v.real:.6g}{v.imag:+.6g}j" if abs(v.imag) > TOL else f"{v.real:.6g}"
                         for v in sg))
        zs = zero_eigen_structure(alg, g)
        rank_lg = matrix_rank(alg.L_G)
        rep.add("rank(L_e) = rank(L_G)", zs.rank_Le == rank_lg,
                f"rank {zs.rank_Le}, nullity {zs.nullity}, rank(L_G) {rank_lg}, N - 1 = {g.node_count - 1}")
        rep.add("zero eigenvalue of L_e is semisimple", zs.semisimple)
        rep.add("rank(E) = N - 1", matrix_rank(inc.E) == g.node_count - 1)
    else:
        reason = "graph has no directed spanning tree"
        for name in ("nonzero spectra of L_G and L_e agree", "rank(L_e) = rank(L_G)",
                     "zero eigenvalue of L_e is semisimple"):
            rep.skip(name, reason)

    sel = find_directed_spanning_tree(g, forced_tree=tree) if tree is not None else (
        find_directed_spanning_tree(g) if qsc else None)
    if sel is not None:
        tp = tree_partition(inc, sel)
        rep.sections += [("tree edges", " ".join(map(str, sel.tree_edges))),
                         ("T", format_matrix(tp.T)), ("E_pinv", format_matrix(tp.E_pinv))]
        rep.add("E_T T = E_C", np.allclose(tp.E_T @ tp.T, tp.E_C, atol=TOL, rtol=0))
        res = penrose_residuals(inc.E.astype(float), tp.E_pinv)
        rep.add("Penrose conditions on E_pinv", max(res) <= TOL, f"max residual {max(res):.2e}")
        if tp.lambda_bar_1 is None:
            rep.skip("lambda_bar_1", "no cotree edges")
        else:
            rep.add("lambda_bar_1 > 0", tp.lambda_bar_1 > 0, f"lambda_bar_1 = {tp.lambda_bar_1:.10g}")

    ig = build_edge_interconnection(g, alg)
    sccs = strongly_connected_components(ig)
    rep.sections.append(("interconnection SCCs", " ".join("{" + ",".join(map(str, c)) + "}" for c in sccs)))
    try:
        sgr = check_cyclic_small_gain(ig, GainAssignment.uniform(ig, gain), cap=cycle_cap) if ig.edges else None
    except CycleLimitExceeded as exc:
        rep.skip("cyclic small-gain condition", str(exc))
    else:
        if sgr is None or sgr.worst_cycle is None:
            rep.add("cyclic small-gain condition", True, f"no cycles; gain {gain}")
        else:
            rep.add("cyclic small-gain condition", sgr.satisfied,
                    f"{sgr.cycle_count} cycles, worst {'->'.join(map(str, sgr.worst_cycle))} "
                    f"product {sgr.worst_product:.6g} at gain {gain}")

    # classification of the interconnection graph
    strong = is_strongly_connected(g)
    ig_strong = interconnection_strongly_connected(ig)
    if strong:
        rep.add("strongly connected graph has strongly connected interconnection", ig_strong,
                f"{len(sccs)} SCC(s) over {ig.node_count} edges")
    elif g.edge_count:
        rep.add("not strongly connected, and neither is the interconnection",
                not ig_strong, f"{len(sccs)} SCC(s)")
    if _rooted_tree(g):
        groups = sorted(tuple(sorted(v)) for v in sibling_groups(g).values() if v)
        acyclic = all(a < b for a, b in condensation_edges(ig, sccs))
        rep.add("rooted tree: SCCs are sibling groups, condensation acyclic",
                sorted(sccs) == groups and acyclic)
    return rep


__all__ = ["Check", "VerifyReport", "verify_graph", "GraphError"]
