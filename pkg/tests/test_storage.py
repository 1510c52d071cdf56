from __future__ import annotations

import json
import random

import pytest

from graphmatch.graphs import Graph
from graphmatch.storage import (
    DatasetManifest,
    LabelCache,
    MalformedRecordError,
    PairingPolicy,
    load_graphs,
    load_manifest,
    save_graphs,
    save_manifest,
)

from conftest import random_graph


class TestGraphJsonl:
    def test_round_trip_exact(self, tmp_path):
        rng = random.Random(1)
        graphs = [
            random_graph(rng, max_nodes=10, n_labels=4, graph_id=f"g{i}")
            for i in range(20)
        ]
        path = tmp_path / "graphs.jsonl"
        save_graphs(graphs, path)
        loaded = load_graphs(path)
        assert loaded == graphs

    def test_serialization_is_byte_stable(self, tmp_path):
        rng = random.Random(2)
        graphs = [random_graph(rng, max_nodes=8, graph_id=f"g{i}") for i in range(5)]
        p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        save_graphs(graphs, p1)
        save_graphs(load_graphs(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_malformed_record_reports_line_number(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        good = json.dumps({"id": "a", "n": 1, "labels": [0], "edges": []})
        path.write_text(good + "\n" + '{"id": "b", "n": 2}\n')
        with pytest.raises(MalformedRecordError, match="bad.jsonl:2"):
            load_graphs(path)

    def test_rejects_invalid_edge(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"id": "a", "n": 1, "labels": [0], "edges": [[0, 5]]}\n')
        with pytest.raises(MalformedRecordError):
            load_graphs(path)


class TestLabelCache:
    def test_put_get_order_normalized(self, tmp_path):
        cache = LabelCache(tmp_path / "cache.jsonl")
        cache.put("z", "a", "mcs", 4, "exact")
        assert cache.get("a", "z", "mcs") == (4, "exact")
        assert cache.get("z", "a", "mcs") == (4, "exact")
        assert cache.get("a", "z", "ged") is None

    def test_persists_across_instances(self, tmp_path):
        path = tmp_path / "cache.jsonl"
        LabelCache(path).put("a", "b", "ged", 3, "fallback_min")
        assert LabelCache(path).get("a", "b", "ged") == (3, "fallback_min")

    def test_first_write_wins(self, tmp_path):
        cache = LabelCache(tmp_path / "cache.jsonl")
        cache.put("a", "b", "mcs", 4, "exact")
        cache.put("a", "b", "mcs", 9, "exact")
        assert cache.get("a", "b", "mcs") == (4, "exact")

    def test_in_memory_cache_without_path(self):
        cache = LabelCache()
        cache.put("a", "b", "mcs", 2, "exact")
        assert cache.get("a", "b", "mcs") == (2, "exact")


class TestManifest:
    def make_manifest(self):
        return DatasetManifest(
            metric="mcs",
            graphs_path="graphs.jsonl",
            splits={"train": ["a", "b"], "valid": ["c"], "test": ["d"]},
            pairing=PairingPolicy(policy="sampled", count=10, seed=3),
            label_cache_path="cache.jsonl",
        )

    def test_round_trip(self, tmp_path):
        m = self.make_manifest()
        path = tmp_path / "manifest.json"
        save_manifest(m, path)
        assert load_manifest(path) == m

    def test_rejects_overlapping_splits(self):
        with pytest.raises(ValueError, match="overlap"):
            DatasetManifest(
                metric="mcs",
                graphs_path="g.jsonl",
                splits={"train": ["a"], "valid": ["a"], "test": []},
            )

    def test_rejects_unknown_metric(self):
        with pytest.raises(ValueError, match="metric"):
            DatasetManifest(metric="cosine", graphs_path="g", splits={})
