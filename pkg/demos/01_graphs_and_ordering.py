"""Graphs, closeness centrality, and the rank ordering used for positional
encoding.

Run: python demos/01_graphs_and_ordering.py
"""

from graphmatch import (
    Graph,
    bfs_distances,
    closeness_centrality,
    node_ordering,
    rank_values,
    relabel_nodes,
)

# A small labeled graph: a path with a pendant triangle.
g = Graph(
    node_count=6,
    edges=[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (3, 5)],
    node_labels=[0, 0, 1, 1, 0, 2],
    graph_id="demo",
)
print(f"graph: {g}")
print(f"degrees: {[g.degree(v) for v in range(g.node_count)]}")
print(f"BFS distances from node 0: {bfs_distances(g, 0)}")

cent = closeness_centrality(g)
print("closeness centrality:", [round(c, 4) for c in cent])

# Ranks are positions under descending centrality. The most central node
# gets rank 0 and will share its positional-encoding row with the most
# central node of any other graph.
ordering = node_ordering(g)
print("centrality ranks:", ordering.ranks)

# The rank operator on a plain vector, with the worked example:
print("rank_values([0.4, 0.6, 0.1, 0.9]) =", rank_values([0.4, 0.6, 0.1, 0.9]))

# Renaming nodes does not change which node gets which rank (centralities
# here are pairwise distinct, so ties play no role).
perm = [3, 5, 1, 0, 4, 2]
h = relabel_nodes(g, perm)
print("ranks after relabeling:", node_ordering(h).ranks)
print("rank of old node v == rank of new node perm[v]:",
      all(node_ordering(h).ranks[perm[v]] == ordering.ranks[v] for v in range(6)))
