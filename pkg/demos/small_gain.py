"""Edge-interconnection graphs, their cycles and the cyclic small-gain test.

    python demos/small_gain.py
"""
from edgecons import (GainAssignment, build_edge_algebra, build_edge_interconnection,
                      check_cyclic_small_gain, enumerate_simple_cycles, incidence_decomposition,
                      interconnection_strongly_connected, is_strongly_connected, parse_digraph,
                      strongly_connected_components)


def interconnection(n, edges):
    g = parse_digraph(n, edges)
    return g, build_edge_interconnection(g, build_edge_algebra(incidence_decomposition(g)))


g, ig = interconnection(6, [(2, 1), (1, 3), (4, 2), (2, 4), (5, 2), (3, 5), (6, 3), (3, 6)])
print("arcs l->k:", ig.edges)
print("SCCs:", strongly_connected_components(ig))
cycles = enumerate_simple_cycles(ig)
print(f"{len(cycles)} simple cycles, longest {max(cycles, key=len)}")
for c in (0.9487, 1.05):
    res = check_cyclic_small_gain(ig, GainAssignment.uniform(ig, c))
    print(f"uniform gain {c}: satisfied={res.satisfied}, worst cycle {res.worst_cycle} "
          f"product {res.worst_product:.4f}")

# a rooted tree: siblings form the only cycles, the rest is a cascade
g, ig = interconnection(7, [(1, 2), (1, 3), (2, 4), (2, 5), (2, 6), (3, 7)])
print("\ntree SCCs in cascade order:", strongly_connected_components(ig))

# two edges leaving one node: not strongly connected, yet the siblings
# drive each other, so the interconnection is strongly connected
g, ig = interconnection(3, [(3, 1), (3, 2)])
print("\nout-star strongly connected:", is_strongly_connected(g),
      "| interconnection strongly connected:", interconnection_strongly_connected(ig))
