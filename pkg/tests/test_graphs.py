from __future__ import annotations

import math
import random

import networkx as nx
import pytest

from graphmatch.graphs import (
    Graph,
    bfs_distances,
    closeness_centrality,
    connected_components,
    induced_subgraph,
    node_ordering,
    rank_values,
    relabel_nodes,
)

from conftest import random_graph


class TestGraphConstruction:
    def test_rejects_self_loop(self):
        with pytest.raises(ValueError, match="self-loop"):
            Graph(2, [(0, 0)])

    def test_rejects_out_of_range_edge(self):
        with pytest.raises(ValueError, match="out of range"):
            Graph(2, [(0, 2)])

    def test_rejects_bad_label_length(self):
        with pytest.raises(ValueError, match="node_labels"):
            Graph(2, [(0, 1)], node_labels=[1])

    def test_duplicate_edges_collapse(self):
        g = Graph(3, [(0, 1), (1, 0), (0, 1)])
        assert g.edge_count == 1

    def test_adjacency(self, path3):
        assert path3.neighbors(1) == (0, 2)
        assert path3.degree(0) == 1
        assert path3.has_edge(2, 1) and not path3.has_edge(0, 2)


class TestBfs:
    def test_path(self, path3):
        assert bfs_distances(path3, 0) == [0, 1, 2]

    def test_single_node(self):
        assert bfs_distances(Graph(1, []), 0) == [0]

    def test_disconnected_sentinel(self):
        g = Graph(2, [])
        assert bfs_distances(g, 0) == [0, math.inf]

    def test_source_out_of_range(self, path3):
        with pytest.raises(IndexError):
            bfs_distances(path3, 3)


class TestCloseness:
    def test_path(self, path3):
        assert closeness_centrality(path3) == pytest.approx([2 / 3, 1.0, 2 / 3])

    def test_single_node(self):
        assert closeness_centrality(Graph(1, [])) == [0.0]

    def test_triangle(self, triangle):
        assert closeness_centrality(triangle) == pytest.approx([1.0, 1.0, 1.0])

    def test_isolated_node_is_zero(self):
        g = Graph(4, [(0, 1), (1, 2)])
        assert closeness_centrality(g)[3] == 0.0

    def test_matches_networkx_on_random_graphs(self):
        rng = random.Random(7)
        for _ in range(50):
            g = random_graph(rng, max_nodes=9, edge_prob=0.3)
            nxg = nx.Graph()
            nxg.add_nodes_from(range(g.node_count))
            nxg.add_edges_from(g.edges)
            want = nx.closeness_centrality(nxg, wf_improved=True)
            got = closeness_centrality(g)
            for v in range(g.node_count):
                assert got[v] == pytest.approx(want[v], abs=1e-12)

    def test_values_in_unit_interval(self):
        rng = random.Random(3)
        for _ in range(100):
            g = random_graph(rng, max_nodes=12, edge_prob=0.25)
            for c in closeness_centrality(g):
                assert 0.0 <= c <= 1.0 + 1e-12

    def test_value_one_iff_adjacent_to_all_in_connected_graph(self):
        rng = random.Random(11)
        for _ in range(100):
            g = random_graph(rng, max_nodes=8, edge_prob=0.5)
            cent = closeness_centrality(g)
            comps = connected_components(g)
            for v in range(g.node_count):
                adjacent_to_all = (
                    len(comps) == 1 and g.degree(v) == g.node_count - 1
                    and g.node_count > 1
                )
                assert (abs(cent[v] - 1.0) < 1e-12) == adjacent_to_all


class TestNodeOrdering:
    def test_rank_values_matches_worked_example(self):
        assert rank_values([0.4, 0.6, 0.1, 0.9]) == [2, 1, 3, 0]

    def test_all_tied_triangle_falls_back_to_index(self, triangle):
        assert node_ordering(triangle).ranks == (0, 1, 2)

    def test_star_center_first(self):
        star = Graph(4, [(0, 1), (0, 2), (0, 3)])
        assert node_ordering(star).ranks == (0, 1, 2, 3)

    def test_ranks_always_a_permutation(self):
        rng = random.Random(23)
        for _ in range(1000):
            g = random_graph(rng, max_nodes=10, edge_prob=0.3)
            ranks = node_ordering(g).ranks
            assert sorted(ranks) == list(range(g.node_count))

    def test_relabeling_preserves_ranks_when_centralities_distinct(self):
        rng = random.Random(5)
        checked = 0
        while checked < 50:
            g = random_graph(rng, max_nodes=9, edge_prob=0.35)
            cent = closeness_centrality(g)
            if len(set(cent)) != g.node_count:
                continue
            perm = list(range(g.node_count))
            rng.shuffle(perm)
            h = relabel_nodes(g, perm)
            r_g = node_ordering(g).ranks
            r_h = node_ordering(h).ranks
            assert all(r_h[perm[v]] == r_g[v] for v in range(g.node_count))
            checked += 1


class TestSubgraphs:
    def test_induced_subgraph_keeps_inner_edges(self, triangle):
        sub = induced_subgraph(triangle, [0, 2])
        assert sub.node_count == 2 and sub.edge_count == 1

    def test_relabel_round_trip(self):
        rng = random.Random(2)
        g = random_graph(rng, max_nodes=8, n_labels=3)
        perm = list(range(g.node_count))
        rng.shuffle(perm)
        inverse = [0] * len(perm)
        for i, p in enumerate(perm):
            inverse[p] = i
        assert relabel_nodes(relabel_nodes(g, perm), inverse).structure_key() == (
            g.structure_key()
        )
