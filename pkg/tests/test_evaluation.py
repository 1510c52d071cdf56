from __future__ import annotations

import csv
import random

import numpy as np
import pytest

from graphmatch.datasets import generate_ba_mcs, split_samples
from graphmatch.evaluation import (
    NumericError,
    bench_runtime,
    export_pe,
    predict_similarity,
    rank_queries,
    write_bench_csv,
    write_metrics_csv,
)
from graphmatch.interpret import PredictedMcs, infer_mcs, mcs_quality, to_dot
from graphmatch.graphs import Graph, induced_subgraph
from graphmatch.model import ModelConfig, init_params
from graphmatch.oracles import mcs_exact
from graphmatch.storage import (
    DatasetManifest,
    PairingPolicy,
    save_graphs,
    save_manifest,
    save_pairs,
)

from conftest import random_graph

CFG = ModelConfig(hidden_dim=8, transformer_layers=1, heads=2, pe_dict_size=16)


@pytest.fixture(scope="module")
def disk_dataset(tmp_path_factory):
    tmp_path = tmp_path_factory.mktemp("ds")
    data = generate_ba_mcs((4, 6), (1, 2), count=12, seed=23)
    save_graphs(data.graphs, tmp_path / "graphs.jsonl")
    save_pairs(data.pairs, tmp_path / "pairs.jsonl")
    splits = split_samples([(p.g1_id, p.g2_id) for p in data.pairs], seed=23)
    manifest = DatasetManifest(
        metric="mcs",
        graphs_path="graphs.jsonl",
        splits=splits,
        pairing=PairingPolicy(),
        label_cache_path="cache.jsonl",
        pairs_path="pairs.jsonl",
    )
    save_manifest(manifest, tmp_path / "manifest.json")
    return tmp_path / "manifest.json"


class TestRankQueries:
    def test_candidates_cover_test_split_and_summary_fields(self, disk_dataset):
        params = init_params(CFG, seed=0)
        results, summary = rank_queries(params, disk_dataset, k=3, oracle_budget=30)
        from graphmatch.storage import load_manifest

        test_ids = set(load_manifest(disk_dataset).splits["test"])
        assert results
        for r in results:
            assert set(r.candidate_ids) == test_ids
            assert len(r.predicted) == len(r.truth) == len(test_ids)
            assert all(0 <= t <= 1 for t in r.truth)
            # ordered by predicted score descending
            assert all(
                a >= b for a, b in zip(r.predicted, r.predicted[1:])
            )
        for key in ("p_at_k", "mean_rho", "global_rho", "queries", "candidates"):
            assert key in summary

    def test_max_queries_limits_work(self, disk_dataset):
        params = init_params(CFG, seed=0)
        results, summary = rank_queries(
            params, disk_dataset, k=2, max_queries=1, oracle_budget=30
        )
        assert len(results) == 1 and summary["queries"] == 1.0

    def test_deterministic(self, disk_dataset):
        params = init_params(CFG, seed=1)
        a = rank_queries(params, disk_dataset, k=3, oracle_budget=30)[1]
        b = rank_queries(params, disk_dataset, k=3, oracle_budget=30)[1]
        assert a == b

    def test_numeric_error_on_nan(self):
        params = init_params(CFG, seed=0)
        params.mlp_w2.data[:] = np.nan
        g1 = Graph(3, [(0, 1)], graph_id="a")
        g2 = Graph(3, [(1, 2)], graph_id="b")
        with pytest.raises(NumericError):
            predict_similarity(params, g1, g2)


class TestBenchRuntime:
    def test_rows_and_csv(self, tmp_path):
        rng = random.Random(3)
        pairs = [
            (
                random_graph(rng, max_nodes=6, graph_id=f"a{i}"),
                random_graph(rng, max_nodes=6, graph_id=f"b{i}"),
            )
            for i in range(3)
        ]
        rows = bench_runtime(init_params(CFG, seed=0), pairs, oracle_budget=10)
        names = [r.method for r in rows]
        assert names == ["model", "mcs_exact", "ged_astar", "ged_beam", "ged_hungarian"]
        assert all(r.mean_seconds > 0 and r.pairs == 3 for r in rows)
        write_bench_csv(rows, tmp_path / "bench.csv")
        with (tmp_path / "bench.csv").open() as fh:
            got = list(csv.reader(fh))
        assert got[0] == ["method", "mean_seconds", "pairs"]
        assert len(got) == 6


class TestExports:
    def test_export_pe_round_trips_values(self, tmp_path):
        params = init_params(CFG, seed=4)
        n = export_pe(params, tmp_path / "pe.csv")
        assert n == CFG.pe_dict_size
        with (tmp_path / "pe.csv").open() as fh:
            rows = list(csv.reader(fh))
        assert rows[0][0] == "index" and len(rows) == CFG.pe_dict_size + 1
        got = np.array([[float(x) for x in row[1:]] for row in rows[1:]])
        assert np.array_equal(got, params.pe.data)

    def test_write_metrics_csv(self, tmp_path):
        write_metrics_csv({"mse": 0.25, "rho": 0.5}, tmp_path / "m.csv")
        text = (tmp_path / "m.csv").read_text()
        assert "mse,0.25" in text


class TestInterpret:
    def test_size_formula_and_clamp(self):
        rng = random.Random(5)
        params = init_params(CFG, seed=5)
        for _ in range(20):
            g1 = random_graph(rng, max_nodes=8, graph_id=f"x{rng.randrange(10**9)}")
            g2 = random_graph(rng, max_nodes=8, graph_id=f"y{rng.randrange(10**9)}")
            pred = infer_mcs(params, g1, g2)
            mean_size = (g1.node_count + g2.node_count) / 2
            want = int(np.floor(pred.similarity * mean_size + 0.5))
            assert pred.size == min(max(want, 0), pred.source.node_count)
            assert pred.nodes == sorted(pred.nodes)
            assert pred.subgraph.node_count == pred.size
            assert len(pred.scores) == pred.source.node_count

    def test_selected_nodes_have_top_scores(self):
        rng = random.Random(7)
        params = init_params(CFG, seed=7)
        g1 = random_graph(rng, max_nodes=8, min_nodes=6, graph_id="p")
        g2 = random_graph(rng, max_nodes=8, min_nodes=6, graph_id="q")
        pred = infer_mcs(params, g1, g2)
        if 0 < pred.size < pred.source.node_count:
            chosen = [pred.scores[i] for i in pred.nodes]
            rest = [
                pred.scores[i]
                for i in range(pred.source.node_count)
                if i not in pred.nodes
            ]
            assert min(chosen) >= max(rest)

    def test_quality_one_when_prediction_equals_truth(self, triangle, path3):
        truth = mcs_exact(triangle, path3)
        nodes = [u for u, _ in truth.mapping]
        predicted = PredictedMcs(
            size=truth.value,
            nodes=nodes,
            subgraph=induced_subgraph(triangle, nodes),
            scores=[1.0] * 3,
            similarity=2 / 3,
            source=triangle,
            other=path3,
        )
        assert mcs_quality(predicted, triangle, path3) == pytest.approx(1.0)

    def test_quality_zero_for_empty_prediction(self, triangle, path3):
        predicted = PredictedMcs(
            size=0,
            nodes=[],
            subgraph=Graph(0, []),
            scores=[0.0] * 3,
            similarity=0.0,
            source=triangle,
            other=path3,
        )
        assert mcs_quality(predicted, triangle, path3) == 0.0

    def test_size_invariant_under_relabeling_distinct_centrality(self):
        from graphmatch.graphs import closeness_centrality, relabel_nodes

        rng = random.Random(11)
        params = init_params(CFG, seed=11)
        checked = 0
        while checked < 5:
            g1 = random_graph(rng, max_nodes=8, min_nodes=4, edge_prob=0.3, graph_id="r1")
            g2 = random_graph(rng, max_nodes=8, min_nodes=4, edge_prob=0.3, graph_id="r2")
            if len(set(closeness_centrality(g1))) != g1.node_count:
                continue
            if len(set(closeness_centrality(g2))) != g2.node_count:
                continue
            perm = list(range(g1.node_count))
            rng.shuffle(perm)
            base = infer_mcs(params, g1, g2)
            permuted = infer_mcs(params, relabel_nodes(g1, perm), g2)
            assert permuted.size == base.size
            checked += 1

    def test_to_dot_marks_selected_nodes(self):
        params = init_params(CFG, seed=9)
        g1 = Graph(4, [(0, 1), (1, 2), (2, 3)], graph_id="dotg")
        g2 = Graph(4, [(0, 1), (1, 2), (0, 3)], graph_id="doth")
        pred = infer_mcs(params, g1, g2)
        dot = to_dot(pred)
        assert dot.startswith('graph "')
        assert "--" in dot
        if pred.nodes:
            assert "fillcolor" in dot
