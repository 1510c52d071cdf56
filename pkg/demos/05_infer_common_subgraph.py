"""Read the predicted common subgraph out of a trained model.

The model never sees subgraph supervision, only pair similarities; the
predicted size times the average pair size picks how many nodes to keep, and
the per-node matching scores pick which. Expects the checkpoint written by
demos/04_train_and_evaluate.py (creates it when missing).

Run: python demos/05_infer_common_subgraph.py
"""

import subprocess
import sys
from pathlib import Path

from graphmatch.datasets import load_dataset
from graphmatch.interpret import infer_mcs, mcs_quality, to_dot
from graphmatch.oracles import mcs_exact
from graphmatch.training import load_checkpoint

if not Path("demo_output/checkpoints").exists():
    subprocess.run([sys.executable, "demos/04_train_and_evaluate.py"], check=True)

best = sorted(Path("demo_output/checkpoints").glob("epoch_*.npz"))[-1]
params = load_checkpoint(best)
dataset = load_dataset(Path("demo_output/mcs_data/manifest.json"))

shown = 0
for pair in dataset.pairs["test"]:
    g1, g2 = dataset.graphs[pair.g1_id], dataset.graphs[pair.g2_id]
    predicted = infer_mcs(params, g1, g2)
    truth = mcs_exact(g1, g2)
    quality = mcs_quality(predicted, g1, g2)
    print(
        f"pair ({pair.g1_id}, {pair.g2_id}): yhat={predicted.similarity:.3f} "
        f"-> m={predicted.size}, true MCS={truth.value}, quality={quality:.3f}"
    )
    shown += 1
    if shown == 5:
        break

# GraphViz export of the last prediction (red nodes = predicted subgraph).
dot_path = Path("demo_output/predicted_mcs.dot")
dot_path.write_text(to_dot(predicted))
print(f"\nwrote {dot_path}; render with: dot -Tpng {dot_path} -o mcs.png")
