"""Train a small matcher on generated data and evaluate it.

Expects demo_output/mcs_data from demos/03_synthetic_datasets.py (creates it
when missing). A deliberately small model and short schedule keep this to a
couple of minutes; see the CLI for full-size runs.

Run: python demos/04_train_and_evaluate.py
"""

import subprocess
import sys
from pathlib import Path

from graphmatch.datasets import load_dataset
from graphmatch.evaluation import predict_similarity, rank_queries
from graphmatch.metrics import mse_metric, spearman_rho
from graphmatch.model import ModelConfig, auto_label_vocab, auto_pe_size
from graphmatch.training import TrainConfig, train

data_dir = Path("demo_output/mcs_data")
if not (data_dir / "manifest.json").exists():
    subprocess.run([sys.executable, "demos/03_synthetic_datasets.py"], check=True)

dataset = load_dataset(data_dir / "manifest.json")
graphs = list(dataset.graphs.values())
print({name: len(pairs) for name, pairs in dataset.pairs.items()}, "pairs per split")

config = ModelConfig(
    hidden_dim=32,
    transformer_layers=1,
    heads=4,
    pe_dict_size=auto_pe_size(graphs),
    label_vocab_size=auto_label_vocab(graphs),
)
result = train(
    dataset,
    config,
    TrainConfig(
        epochs=60, batch_size=8, seed=0, checkpoint_dir="demo_output/checkpoints"
    ),
    log_every=15,
)
print(f"best checkpoint: {result.best_checkpoint} (epoch {result.best_epoch})")

test_pairs = dataset.pairs["test"]
preds = [
    predict_similarity(result.params, dataset.graphs[p.g1_id], dataset.graphs[p.g2_id])
    for p in test_pairs
]
truth = [p.label for p in test_pairs]
print(f"test mse: {mse_metric(preds, truth):.5f}")
print(f"test rho: {spearman_rho(preds, truth):.4f} over {len(test_pairs)} pairs")

# The ranking protocol: each query scored against every test graph, with
# oracle ground truth (cached in the dataset directory).
results, summary = rank_queries(
    result.params, data_dir / "manifest.json", k=5, max_queries=3
)
print("ranking summary:", {k: round(v, 4) for k, v in summary.items()})
top = results[0]
print(f"query {top.query_id}: top-3 candidates {top.candidate_ids[:3]}")
