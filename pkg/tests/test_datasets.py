from __future__ import annotations

import random

import pytest

from graphmatch.datasets import (
    Dataset,
    LabeledPair,
    ba_graph,
    generate_ba_ged,
    generate_ba_mcs,
    label_pairs,
    load_dataset,
    make_pairs,
    split_dataset,
    split_samples,
)
from graphmatch.graphs import Graph, induced_subgraph
from graphmatch.oracles import ged_astar, mcs_exact, nged, nmcs
from graphmatch.storage import (
    DatasetManifest,
    LabelCache,
    PairingPolicy,
    save_graphs,
    save_manifest,
    save_pairs,
)


class TestBaGraph:
    def test_seed_graph_is_complete(self):
        g = ba_graph(3, attach_m=2, seed=0)
        assert g.edge_count == 3

    def test_single_node(self):
        g = ba_graph(1, seed=0)
        assert g.node_count == 1 and g.edge_count == 0

    def test_core_returned_unchanged_when_no_growth(self):
        core = ba_graph(6, seed=1, graph_id="core")
        g = ba_graph(6, core=core, seed=2, graph_id="same")
        assert g.edges == core.edges

    def test_tree_when_m_is_one(self):
        g = ba_graph(50, attach_m=1, seed=3)
        assert g.edge_count == 49

    def test_preferential_attachment_grows_hubs(self):
        max_degrees = []
        for seed in range(20):
            g = ba_graph(200, attach_m=1, seed=seed)
            max_degrees.append(max(g.degree(v) for v in range(200)))
        assert max(max_degrees) >= 10

    def test_reproducible(self):
        a = ba_graph(40, attach_m=2, seed=9, graph_id="x")
        b = ba_graph(40, attach_m=2, seed=9, graph_id="x")
        assert a == b

    def test_rejects_oversized_core(self):
        core = ba_graph(5, seed=0)
        with pytest.raises(ValueError, match="core"):
            ba_graph(3, core=core, seed=0)


class TestGenerateBaMcs:
    def test_worked_label_example(self):
        # core 60, additions 35 and 45 -> 60 / (60 + 40) = 0.6
        assert 60 / (60 + 0.5 * (35 + 45)) == 0.6

    def test_label_formula_on_generated_samples(self):
        data = generate_ba_mcs((6, 9), (2, 5), count=20, seed=11)
        assert len(data.pairs) == 20 and len(data.graphs) == 40
        by_id = {g.graph_id: g for g in data.graphs}
        for pair, sample in zip(data.pairs, data.samples):
            c = sample["core_size"]
            a1, a2 = sample["added"]
            assert pair.label == c / (c + 0.5 * (a1 + a2))
            assert by_id[pair.g1_id].node_count == c + a1
            assert by_id[pair.g2_id].node_count == c + a2

    def test_zero_additions_yield_core_and_label_one(self):
        data = generate_ba_mcs((4, 4), (0, 0), count=3, seed=5)
        for pair, sample in zip(data.pairs, data.samples):
            assert pair.label == 1.0
            by_id = {g.graph_id: g for g in data.graphs}
            assert by_id[pair.g1_id].edges == sample["core"].edges
            assert by_id[pair.g2_id].edges == sample["core"].edges

    def test_core_is_common_induced_subgraph(self):
        data = generate_ba_mcs((5, 8), (1, 4), count=15, seed=7)
        by_id = {g.graph_id: g for g in data.graphs}
        for pair, sample in zip(data.pairs, data.samples):
            core = sample["core"]
            for gid in (pair.g1_id, pair.g2_id):
                sub = induced_subgraph(by_id[gid], range(core.node_count))
                assert sub.edges == core.edges

    def test_mcs_at_least_core_size(self):
        data = generate_ba_mcs((5, 8), (1, 4), count=10, seed=13)
        by_id = {g.graph_id: g for g in data.graphs}
        for pair, sample in zip(data.pairs, data.samples):
            res = mcs_exact(by_id[pair.g1_id], by_id[pair.g2_id])
            assert res.value >= sample["core_size"]

    def test_deterministic_under_seed(self):
        a = generate_ba_mcs((5, 8), (1, 4), count=10, seed=21)
        b = generate_ba_mcs((5, 8), (1, 4), count=10, seed=21)
        assert a.graphs == b.graphs and a.pairs == b.pairs

    def test_rejects_bad_ranges(self):
        with pytest.raises(ValueError):
            generate_ba_mcs((1, 4), (0, 2), count=1, seed=0)
        with pytest.raises(ValueError):
            generate_ba_mcs((2, 4), (3, 2), count=1, seed=0)


class TestGenerateBaGed:
    def test_labels_follow_min_rule(self):
        data = generate_ba_ged(8, count=12, seed=3, pair_sample=40)
        by_id = {g.graph_id: g for g in data.graphs}
        for pair, sample in zip(data.pairs, data.samples):
            g1, g2 = by_id[pair.g1_id], by_id[pair.g2_id]
            want = min(sample["edit_bound"], sample["approx_bound"])
            assert sample["ged_value"] == want
            assert pair.label == pytest.approx(nged(g1, g2, want))

    def test_labels_upper_bound_exact_ged(self):
        data = generate_ba_ged(8, count=10, seed=5, pair_sample=50)
        by_id = {g.graph_id: g for g in data.graphs}
        for pair, sample in zip(data.pairs, data.samples):
            g1, g2 = by_id[pair.g1_id], by_id[pair.g2_id]
            exact = ged_astar(g1, g2, time_budget=30).value
            assert sample["ged_value"] >= exact

    def test_self_pair_scores_one(self):
        data = generate_ba_ged(6, count=4, seed=9)
        diag = [
            p for p, s in zip(data.pairs, data.samples) if s["pair"][0] == s["pair"][1]
        ]
        assert diag and all(p.g1_id == p.g2_id and p.label == 1.0 for p in diag)

    def test_deterministic_under_seed(self):
        a = generate_ba_ged(7, count=8, seed=2, pair_sample=20)
        b = generate_ba_ged(7, count=8, seed=2, pair_sample=20)
        assert a.graphs == b.graphs and a.pairs == b.pairs

    def test_rejects_small_base(self):
        with pytest.raises(ValueError):
            generate_ba_ged(2, count=1, seed=0)


class TestSplits:
    def test_disjoint_cover_and_proportions(self):
        ids = [f"g{i}" for i in range(100)]
        splits = split_dataset(ids, seed=4)
        assert sorted(splits["train"] + splits["valid"] + splits["test"]) == sorted(ids)
        assert len(splits["train"]) == 80
        assert len(splits["valid"]) == 10

    def test_deterministic(self):
        ids = [f"g{i}" for i in range(30)]
        assert split_dataset(ids, seed=1) == split_dataset(ids, seed=1)

    def test_sample_split_keeps_pairs_together(self):
        pair_ids = [(f"{i}a", f"{i}b") for i in range(40)]
        splits = split_samples(pair_ids, seed=8)
        member = {gid: name for name, ids in splits.items() for gid in ids}
        for a, b in pair_ids:
            assert member[a] == member[b]

    def test_rejects_duplicate_ids(self):
        with pytest.raises(ValueError, match="duplicate"):
            split_dataset(["a", "a"], seed=0)


class TestMakeAndLabelPairs:
    def manifest(self, policy: PairingPolicy) -> DatasetManifest:
        return DatasetManifest(
            metric="mcs",
            graphs_path="graphs.jsonl",
            splits={
                "train": [f"g{i}" for i in range(6)],
                "valid": ["g6", "g7"],
                "test": ["g8", "g9"],
            },
            pairing=policy,
        )

    def test_all_pairs_within_splits(self):
        pairs = make_pairs(self.manifest(PairingPolicy()))
        assert len(pairs["train"]) == 15
        assert pairs["valid"] == [("g6", "g7")]
        ids = {i for p in pairs["train"] for i in p}
        assert ids <= {f"g{i}" for i in range(6)}

    def test_sampled_pairs_deterministic_and_bounded(self):
        policy = PairingPolicy(policy="sampled", count=8, seed=3)
        a = make_pairs(self.manifest(policy))
        b = make_pairs(self.manifest(policy))
        assert a == b
        assert len(a["train"]) <= 15 and len(a["train"]) >= 1

    def test_label_pairs_uses_cache(self):
        rng = random.Random(0)
        graphs = {}
        for i in range(4):
            n = rng.randint(3, 6)
            edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < 0.5]
            graphs[f"g{i}"] = Graph(n, edges, graph_id=f"g{i}")
        cache = LabelCache()
        id_pairs = [("g0", "g1"), ("g2", "g3"), ("g0", "g1")]
        labeled = label_pairs(id_pairs, graphs, "mcs", cache=cache)
        assert len(labeled) == 3 and len(cache) == 2
        value, provenance = cache.get("g0", "g1", "mcs")
        assert provenance == "exact"
        assert labeled[0].label == nmcs(graphs["g0"], graphs["g1"], value)

    def test_label_pairs_parallel_matches_serial(self):
        rng = random.Random(1)
        graphs = {}
        for i in range(6):
            n = rng.randint(3, 6)
            edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < 0.5]
            graphs[f"g{i}"] = Graph(n, edges, graph_id=f"g{i}")
        id_pairs = [(f"g{i}", f"g{j}") for i in range(6) for j in range(i + 1, 6)]
        serial = label_pairs(id_pairs, graphs, "ged", cache=LabelCache())
        parallel = label_pairs(id_pairs, graphs, "ged", cache=LabelCache(), jobs=2)
        assert serial == parallel


class TestLoadDataset:
    def write_dataset(self, tmp_path, with_pairs_file: bool):
        data = generate_ba_mcs((4, 6), (1, 2), count=10, seed=17)
        save_graphs(data.graphs, tmp_path / "graphs.jsonl")
        splits = split_samples(
            [(p.g1_id, p.g2_id) for p in data.pairs], seed=17
        )
        manifest = DatasetManifest(
            metric="mcs",
            graphs_path="graphs.jsonl",
            splits=splits,
            pairing=PairingPolicy(policy="sampled", count=12, seed=1),
            label_cache_path="cache.jsonl",
            pairs_path="pairs.jsonl" if with_pairs_file else None,
        )
        if with_pairs_file:
            save_pairs(data.pairs, tmp_path / "pairs.jsonl")
        save_manifest(manifest, tmp_path / "manifest.json")
        return data

    def test_load_with_pairs_file(self, tmp_path):
        data = self.write_dataset(tmp_path, with_pairs_file=True)
        ds = load_dataset(tmp_path / "manifest.json")
        assert isinstance(ds, Dataset)
        loaded = [p for split in ds.pairs.values() for p in split]
        assert sorted(p.g1_id for p in loaded) == sorted(p.g1_id for p in data.pairs)
        assert all(0 < p.label <= 1 for p in loaded)

    def test_load_with_policy_labels_through_oracle(self, tmp_path):
        self.write_dataset(tmp_path, with_pairs_file=False)
        ds = load_dataset(tmp_path / "manifest.json", oracle_budget=30)
        n_pairs = sum(len(v) for v in ds.pairs.values())
        assert n_pairs >= 1
        assert (tmp_path / "cache.jsonl").exists()
        for split in ds.pairs.values():
            for p in split:
                assert 0 <= p.label <= 1

    def test_labeled_pair_validation(self):
        with pytest.raises(ValueError):
            LabeledPair("a", "b", 1.5, "mcs")
        with pytest.raises(ValueError):
            LabeledPair("a", "b", 0.5, "class")
        with pytest.raises(ValueError):
            LabeledPair("a", "b", 0.5, "euclid")
