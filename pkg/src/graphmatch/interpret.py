"""Reading an explicit common-subgraph prediction out of a trained model.

The predicted similarity times the pair's average size estimates the common
subgraph's node count; the nodes with the highest matching scores realize it.
Quality is scored by comparing the predicted subgraph against the oracle's
maximum common subgraph with the same normalized-MCS measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .graphs import Graph, induced_subgraph
from .model import ModelParams, forward, load_checkpoint
from .oracles import DEFAULT_TIME_BUDGET, mcs_exact, nmcs


@dataclass
class PredictedMcs:
    """Model-inferred common subgraph of the pair's smaller graph.

    ``nodes`` are indices into ``source`` (the canonical smaller graph);
    ``scores`` holds every node's matching score, selected or not.
    """

    size: int
    nodes: list[int]
    subgraph: Graph
    scores: list[float]
    similarity: float
    source: Graph
    other: Graph


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def infer_mcs(checkpoint, g_a: Graph, g_b: Graph) -> PredictedMcs:
    """Extract the implicit common-subgraph prediction for a pair.

    The inferred size is the predicted similarity scaled back by the average
    pair size (rounded half-up, clamped to the smaller graph); the subgraph is
    induced by the top-scoring nodes, ties broken toward smaller indices.
    """
    params = (
        checkpoint if isinstance(checkpoint, ModelParams) else load_checkpoint(checkpoint)
    )
    res = forward(g_a, g_b, params)
    g1, g2 = res.g1, res.g2
    yhat = res.similarity
    m = _round_half_up(yhat * (g1.node_count + g2.node_count) / 2)
    m = max(0, min(m, g1.node_count))
    scores = [float(s) for s in res.scores.data.reshape(-1)]
    ranked = sorted(range(g1.node_count), key=lambda i: (-scores[i], i))
    nodes = sorted(ranked[:m])
    subgraph = induced_subgraph(g1, nodes, graph_id=f"{g1.graph_id}:predicted-mcs")
    return PredictedMcs(
        size=m,
        nodes=nodes,
        subgraph=subgraph,
        scores=scores,
        similarity=yhat,
        source=g1,
        other=g2,
    )


def mcs_quality(
    predicted: PredictedMcs,
    g_a: Graph,
    g_b: Graph,
    time_budget: float | None = DEFAULT_TIME_BUDGET,
) -> float:
    """Normalized-MCS similarity between the predicted and the true MCS.

    1.0 means the predicted subgraph is (label-aware) isomorphic to the true
    maximum common subgraph; an empty prediction scores 0.
    """
    if predicted.size == 0:
        return 0.0
    truth = mcs_exact(g_a, g_b, time_budget)
    if truth.value == 0:
        return 0.0
    true_sub = induced_subgraph(
        g_a, [u for u, _ in truth.mapping], graph_id=f"{g_a.graph_id}:true-mcs"
    )
    common = mcs_exact(predicted.subgraph, true_sub, time_budget)
    return nmcs(predicted.subgraph, true_sub, common.value)


def to_dot(predicted: PredictedMcs) -> str:
    """GraphViz rendering of the source graph with the prediction marked."""
    selected = set(predicted.nodes)
    lines = [f'graph "{predicted.source.graph_id}" {{']
    for v in range(predicted.source.node_count):
        style = ' [style=filled, fillcolor=lightcoral]' if v in selected else ""
        lines.append(f"  {v}{style};")
    for u, v in predicted.source.sorted_edges():
        lines.append(f"  {u} -- {v};")
    lines.append("}")
    return "\n".join(lines) + "\n"
