"""Synthetic labeled datasets from preferential-attachment graphs.

Writes a ready-to-train dataset into demo_output/mcs_data/.

Run: python demos/03_synthetic_datasets.py
"""

from pathlib import Path

from graphmatch import mcs_exact
from graphmatch.datasets import generate_ba_ged, generate_ba_mcs, split_samples
from graphmatch.storage import (
    DatasetManifest,
    PairingPolicy,
    save_graphs,
    save_manifest,
    save_pairs,
)

out = Path("demo_output/mcs_data")
out.mkdir(parents=True, exist_ok=True)

# MCS-metric data: both graphs of a pair grow from a shared core, and the
# label is the core's share of the average size, e.g. core 60 with 35 and 45
# added nodes gives 60 / (60 + 40) = 0.6. Desk sizes keep oracles cheap.
data = generate_ba_mcs(core_range=(6, 9), add_range=(2, 5), count=40, seed=7)
by_id = {g.graph_id: g for g in data.graphs}
print(f"generated {len(data.graphs)} graphs, {len(data.pairs)} labeled pairs")
for pair, sample in list(zip(data.pairs, data.samples))[:3]:
    oracle = mcs_exact(by_id[pair.g1_id], by_id[pair.g2_id]).value
    print(
        f"  core={sample['core_size']:2d} added={sample['added']} "
        f"label={pair.label:.4f}  true MCS={oracle} (>= core)"
    )

splits = split_samples([(p.g1_id, p.g2_id) for p in data.pairs], seed=7)
save_graphs(data.graphs, out / "graphs.jsonl")
save_pairs(data.pairs, out / "pairs.jsonl")
save_manifest(
    DatasetManifest(
        metric="mcs",
        graphs_path="graphs.jsonl",
        splits=splits,
        pairing=PairingPolicy(),
        label_cache_path="cache.jsonl",
        pairs_path="pairs.jsonl",
    ),
    out / "manifest.json",
)
print(f"wrote {out}/manifest.json "
      f"(splits: { {k: len(v) for k, v in splits.items()} } graphs)")

# GED-metric data: trimmed copies of two base graphs; the label applies the
# min rule between summed edit costs and the approximate-GED upper bounds.
ged_data = generate_ba_ged(base_nodes=8, count=12, seed=7, pair_sample=30)
print(f"\nGED collection: {len(ged_data.graphs)} graphs, {len(ged_data.pairs)} pairs")
for pair, sample in list(zip(ged_data.pairs, ged_data.samples))[:3]:
    print(
        f"  edit bound={sample['edit_bound']} approx={sample['approx_bound']} "
        f"-> ged={sample['ged_value']} label={pair.label:.4f}"
    )
