"""Exact and approximate similarity oracles: MCS, GED, and the normalizers.

Run: python demos/02_similarity_oracles.py
"""

from graphmatch import (
    Graph,
    ged_astar,
    ged_beam,
    ged_hungarian,
    label_ged,
    mcs_exact,
    nged,
    nmcs,
)

triangle = Graph(3, [(0, 1), (1, 2), (0, 2)], graph_id="triangle")
path = Graph(3, [(0, 1), (1, 2)], graph_id="path")
square = Graph(4, [(0, 1), (1, 2), (2, 3), (0, 3)], graph_id="square")

# Maximum common induced subgraph (branch and bound over label classes).
res = mcs_exact(triangle, path)
print(f"MCS(triangle, path): size={res.value}, mapping={res.mapping}, "
      f"provenance={res.provenance}")
print(f"normalized: nMCS = {nmcs(triangle, path, res.value):.4f}")

# Graph edit distance: exact A*, then the two upper bounds.
exact = ged_astar(triangle, square)
beam = ged_beam(triangle, square, width=8)
hung = ged_hungarian(triangle, square)
print(f"GED(triangle, square): exact={exact.value}, "
      f"beam={beam.value}, hungarian={hung.value}")
print(f"normalized similarity: nGED = {nged(triangle, square, exact.value):.4f}")

# label_ged is the production labeler: exact inside the budget, otherwise the
# minimum of the two upper bounds (provenance records which path was taken).
labeled = label_ged(triangle, square, time_budget=5.0)
print(f"label_ged -> value={labeled.value}, provenance={labeled.provenance}")

# Node labels restrict what may map to what.
red = Graph(1, [], node_labels=[0], graph_id="red")
blue = Graph(1, [], node_labels=[1], graph_id="blue")
print(f"MCS(red, blue) with incompatible labels: {mcs_exact(red, blue).value}")
print(f"GED(red, blue): {ged_astar(red, blue).value} (one substitution)")
