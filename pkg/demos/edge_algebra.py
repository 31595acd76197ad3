"""Incidence splits, Laplacians and the spanning-tree factorisation for the two
bundled six-agent graphs.

    python demos/edge_algebra.py
"""
import numpy as np

from edgecons import (build_edge_algebra, find_directed_spanning_tree, format_matrix,
                      incidence_decomposition, load_graph, nonzero_spectrum, tree_partition,
                      zero_eigen_structure)
from edgecons.scenario import bundled_path


def show(title, m):
    print(f"{title}:")
    print("  " + format_matrix(m).replace("\n", "\n  "))


g = load_graph(bundled_path("strong_6agent.graph"))
inc = incidence_decomposition(g)
alg = build_edge_algebra(inc)
show("incidence E", inc.E)
show("edge adjacency A_e", alg.A_e)
show("graph Laplacian L_G", alg.L_G)

# the two Laplacians share their nonzero eigenvalues
print("nonzero eigenvalues of L_G:", np.round(nonzero_spectrum(alg.L_G), 6))
print("nonzero eigenvalues of L_e:", np.round(nonzero_spectrum(alg.L_e), 6))
zs = zero_eigen_structure(alg, g)
print(f"rank(L_e) = {zs.rank_Le}, nullity {zs.nullity}, zero eigenvalue semisimple: {zs.semisimple}")

print()
g = load_graph(bundled_path("quasi_6agent.graph"))
inc = incidence_decomposition(g)
alg = build_edge_algebra(inc)
tp = tree_partition(inc, find_directed_spanning_tree(g, forced_tree=(1, 2, 3, 4, 7)))
print("tree edges", tp.selection.tree_edges, "cotree edges", tp.selection.cotree_edges)
show("cotree edges as tree-edge combinations, T", tp.T)
print("smallest nonzero eigenvalue of T T^T:", tp.lambda_bar_1)
# this graph has two terminal components ({4} and {6}), so the zero eigenvalue
# of L_e has multiplicity L - N + 2 rather than L - N + 1
zs = zero_eigen_structure(alg, g)
print(f"rank(L_e) = {zs.rank_Le}, nullity {zs.nullity}")
