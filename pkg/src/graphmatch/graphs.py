"""Undirected labeled graphs plus the traversal/ordering primitives built on them.

A :class:`Graph` is immutable after construction and stores its edges under
canonical ``(min, max)`` keys, so it can be shared freely across threads for
read-only traversal.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

INF = math.inf


class Graph:
    """Simple undirected graph with categorical node labels.

    Nodes are the integers ``0 .. node_count-1``. Edges are unordered pairs of
    distinct node indices; self-loops and duplicates are rejected. ``node_labels``
    must have one integer id per node (use a single shared id for unlabeled data).
    """

    __slots__ = ("node_count", "edges", "node_labels", "graph_id", "_adj", "_degrees")

    def __init__(
        self,
        node_count: int,
        edges: Iterable[tuple[int, int]],
        node_labels: Sequence[int] | None = None,
        graph_id: str = "",
    ):
        if node_count < 0:
            raise ValueError(f"node_count must be non-negative, got {node_count}")
        canon = set()
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            if not (0 <= u < node_count and 0 <= v < node_count):
                raise ValueError(f"edge ({u},{v}) out of range for {node_count} nodes")
            canon.add((u, v) if u < v else (v, u))
        if node_labels is None:
            node_labels = [0] * node_count
        if len(node_labels) != node_count:
            raise ValueError(
                f"node_labels has length {len(node_labels)}, expected {node_count}"
            )
        self.node_count = node_count
        self.edges = frozenset(canon)
        self.node_labels = tuple(int(x) for x in node_labels)
        self.graph_id = graph_id
        adj: list[list[int]] = [[] for _ in range(node_count)]
        for u, v in canon:
            adj[u].append(v)
            adj[v].append(u)
        self._adj = tuple(tuple(sorted(ns)) for ns in adj)
        self._degrees = tuple(len(ns) for ns in self._adj)

    # -- accessors -----------------------------------------------------------

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self._adj[v]

    def degree(self, v: int) -> int:
        return self._degrees[v]

    def has_edge(self, u: int, v: int) -> bool:
        return ((u, v) if u < v else (v, u)) in self.edges

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def structure_key(self) -> tuple:
        """Content identity: equal keys means equal graphs up to graph_id."""
        return (self.node_count, self.node_labels, tuple(self.sorted_edges()))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Graph)
            and self.structure_key() == other.structure_key()
            and self.graph_id == other.graph_id
        )

    def __hash__(self) -> int:
        return hash((self.structure_key(), self.graph_id))

    def __repr__(self) -> str:
        return (
            f"Graph(id={self.graph_id!r}, n={self.node_count}, "
            f"m={self.edge_count})"
        )


@dataclass(frozen=True)
class NodeOrdering:
    """Per-node rank under descending closeness centrality.

    ``ranks`` is always a permutation of ``0 .. node_count-1``; rank 0 is the
    most central node.
    """

    ranks: tuple[int, ...]


def bfs_distances(g: Graph, source: int) -> list[float]:
    """Hop distances from ``source``; unreachable nodes get ``math.inf``."""
    if not (0 <= source < g.node_count):
        raise IndexError(f"source {source} out of range for {g.node_count} nodes")
    dist: list[float] = [INF] * g.node_count
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for w in g.neighbors(u):
            if dist[w] == INF:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def connected_components(g: Graph) -> list[list[int]]:
    """Components as sorted node lists, ordered by smallest member."""
    seen = [False] * g.node_count
    comps: list[list[int]] = []
    for s in range(g.node_count):
        if seen[s]:
            continue
        comp = []
        seen[s] = True
        queue = deque([s])
        while queue:
            u = queue.popleft()
            comp.append(u)
            for w in g.neighbors(u):
                if not seen[w]:
                    seen[w] = True
                    queue.append(w)
        comps.append(sorted(comp))
    return comps


def closeness_centrality(g: Graph) -> list[float]:
    """Component-scaled closeness: ((n-1)/(|V|-1)) * ((n-1)/sum of distances).

    ``n`` is the size of the node's connected component. Nodes in singleton
    components (including the single-node graph) get centrality 0, the limit
    of the component-scaling factor.
    """
    if g.node_count < 1:
        raise ValueError("closeness_centrality needs at least one node")
    total = g.node_count
    out = [0.0] * total
    for comp in connected_components(g):
        n = len(comp)
        if n == 1:
            continue
        for v in comp:
            dist = bfs_distances(g, v)
            s = sum(dist[u] for u in comp)
            out[v] = ((n - 1) / (total - 1)) * ((n - 1) / s)
    return out


def node_ordering(g: Graph) -> NodeOrdering:
    """Rank nodes by descending centrality.

    Ties break by higher degree, then smaller label id, then smaller node
    index, which makes the ordering deterministic (at the cost of strict
    permutation invariance for tied centralities).
    """
    cent = closeness_centrality(g)
    order = sorted(
        range(g.node_count),
        key=lambda v: (-cent[v], -g.degree(v), g.node_labels[v], v),
    )
    ranks = [0] * g.node_count
    for pos, v in enumerate(order):
        ranks[v] = pos
    return NodeOrdering(ranks=tuple(ranks))


def rank_values(values: Sequence[float]) -> list[int]:
    """Descending rank of each value, ties by smaller index first.

    ``rank_values([0.4, 0.6, 0.1, 0.9]) == [2, 1, 3, 0]``.
    """
    order = sorted(range(len(values)), key=lambda i: (-values[i], i))
    ranks = [0] * len(values)
    for pos, i in enumerate(order):
        ranks[i] = pos
    return ranks


def induced_subgraph(g: Graph, nodes: Iterable[int], graph_id: str = "") -> Graph:
    """Subgraph induced by ``nodes``, relabeled to 0..k-1 in ascending order."""
    keep = sorted(set(nodes))
    for v in keep:
        if not (0 <= v < g.node_count):
            raise IndexError(f"node {v} out of range")
    index = {v: i for i, v in enumerate(keep)}
    edges = [
        (index[u], index[v]) for u, v in g.edges if u in index and v in index
    ]
    labels = [g.node_labels[v] for v in keep]
    return Graph(len(keep), edges, labels, graph_id=graph_id)


def relabel_nodes(g: Graph, perm: Sequence[int], graph_id: str | None = None) -> Graph:
    """Rename node ``i`` to ``perm[i]``; ``perm`` must be a permutation."""
    if sorted(perm) != list(range(g.node_count)):
        raise ValueError("perm is not a permutation of the node indices")
    labels = [0] * g.node_count
    for old, new in enumerate(perm):
        labels[new] = g.node_labels[old]
    edges = [(perm[u], perm[v]) for u, v in g.edges]
    return Graph(
        g.node_count,
        edges,
        labels,
        graph_id=g.graph_id if graph_id is None else graph_id,
    )
