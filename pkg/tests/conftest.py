"""Shared fixtures and independent brute-force oracles for the test suite.

The brute-force functions here deliberately share no code with the package's
search implementations: MCS enumerates injective label-compatible mappings
directly, and GED enumerates complete node assignments and prices each edit
path from scratch with set arithmetic.
"""

from __future__ import annotations

import random

import pytest

from graphmatch.graphs import Graph


def random_graph(
    rng: random.Random,
    max_nodes: int,
    n_labels: int = 1,
    edge_prob: float = 0.45,
    graph_id: str = "",
    min_nodes: int = 1,
) -> Graph:
    n = rng.randint(min_nodes, max_nodes)
    edges = [
        (u, v)
        for u in range(n)
        for v in range(u + 1, n)
        if rng.random() < edge_prob
    ]
    labels = [rng.randrange(n_labels) for _ in range(n)]
    return Graph(n, edges, labels, graph_id=graph_id)


def brute_force_mcs(g1: Graph, g2: Graph, label_aware: bool = True) -> int:
    """Largest injective adjacency- and label-consistent mapping, by enumeration."""
    best = 0

    def consistent(u: int, w: int, mapping: list[tuple[int, int]]) -> bool:
        if label_aware and g1.node_labels[u] != g2.node_labels[w]:
            return False
        for (u2, w2) in mapping:
            if g1.has_edge(u, u2) != g2.has_edge(w, w2):
                return False
        return True

    def rec(next_u: int, mapping: list[tuple[int, int]], used: set[int]) -> None:
        nonlocal best
        best = max(best, len(mapping))
        if next_u == g1.node_count:
            return
        rec(next_u + 1, mapping, used)  # leave next_u unmatched
        for w in range(g2.node_count):
            if w not in used and consistent(next_u, w, mapping):
                mapping.append((next_u, w))
                used.add(w)
                rec(next_u + 1, mapping, used)
                mapping.pop()
                used.remove(w)

    rec(0, [], set())
    return best


def assignment_cost(g1: Graph, g2: Graph, phi: dict[int, int]) -> int:
    """Price a complete assignment (unmapped = delete/insert) from scratch."""
    images = set(phi.values())
    cost = (g1.node_count - len(phi)) + (g2.node_count - len(images))
    cost += sum(1 for u, w in phi.items() if g1.node_labels[u] != g2.node_labels[w])
    mapped_edges = {
        tuple(sorted((phi[u], phi[v])))
        for u, v in g1.edges
        if u in phi and v in phi
    }
    kept = len(mapped_edges & g1_edges_as_g2(g2))
    cost += (g1.edge_count - kept) + (g2.edge_count - kept)
    return cost


def g1_edges_as_g2(g2: Graph) -> set[tuple[int, int]]:
    return {tuple(sorted(e)) for e in g2.edges}


def brute_force_ged(g1: Graph, g2: Graph) -> int:
    """Exhaustive minimum over all injective partial assignments V1 -> V2."""
    best = [g1.node_count + g2.node_count + g1.edge_count + g2.edge_count]

    def rec(u: int, phi: dict[int, int], used: set[int]) -> None:
        if u == g1.node_count:
            best[0] = min(best[0], assignment_cost(g1, g2, phi))
            return
        rec(u + 1, phi, used)  # delete u
        for w in range(g2.node_count):
            if w not in used:
                phi[u] = w
                used.add(w)
                rec(u + 1, phi, used)
                del phi[u]
                used.remove(w)

    rec(0, {}, set())
    return best[0]


@pytest.fixture
def path3() -> Graph:
    return Graph(3, [(0, 1), (1, 2)], graph_id="path3")


@pytest.fixture
def triangle() -> Graph:
    return Graph(3, [(0, 1), (1, 2), (0, 2)], graph_id="triangle")
