"""The learned similarity model.

A pair forward pass encodes each graph with a GCN stack, adds a learnable
positional encoding indexed by centrality rank, refines with vanilla
transformer encoder layers, soft-matches every node of the smaller graph
against the other graph with temperature-sharpened cosine attention, scores
each matched pair with a sigmoid MLP, and reads the similarity off the
normalized score sum. The predicted score estimates the pair's normalized
maximum-common-subgraph size, which is what makes the per-node scores
interpretable.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .graphs import Graph, node_ordering


@dataclass(frozen=True)
class ModelConfig:
    hidden_dim: int = 128
    gcn_layers: int = 3
    transformer_layers: int = 2
    heads: int = 8
    pe_dict_size: int = 64
    tau_init: float = 0.5
    mlp_hidden_dim: int = 0  # 0 means hidden_dim
    label_vocab_size: int = 1

    def __post_init__(self):
        if self.hidden_dim < 1 or self.hidden_dim % self.heads != 0:
            raise ValueError(
                f"hidden_dim {self.hidden_dim} must be divisible by heads {self.heads}"
            )
        if not 0.0 < self.tau_init < 1.0:
            raise ValueError(f"tau_init must be in (0,1), got {self.tau_init}")
        if self.gcn_layers < 0 or self.transformer_layers < 0:
            raise ValueError("layer counts must be non-negative")
        if self.pe_dict_size < 1 or self.label_vocab_size < 1:
            raise ValueError("pe_dict_size and label_vocab_size must be >= 1")

    @property
    def head_dim(self) -> int:
        return self.hidden_dim // self.heads

    @property
    def mlp_hidden(self) -> int:
        return self.mlp_hidden_dim or self.hidden_dim


def auto_pe_size(graphs, margin: int = 16) -> int:
    """Positional-encoding rows: comfortably above every graph size."""
    return max(g.node_count for g in graphs) + margin


def auto_label_vocab(graphs) -> int:
    return max(max(g.node_labels, default=0) for g in graphs) + 1


@dataclass
class TransformerLayerParams:
    wq: list[Tensor]
    wk: list[Tensor]
    wv: list[Tensor]
    wo: Tensor
    ln_gain: Tensor
    ln_bias: Tensor
    ffn_w1: Tensor
    ffn_b1: Tensor
    ffn_w2: Tensor
    ffn_b2: Tensor


@dataclass
class ModelParams:
    """All learnable weights; iterate them in declaration order via named()."""

    config: ModelConfig
    embedding: Tensor
    gcn_w: list[Tensor]
    gcn_b: list[Tensor]
    pe: Tensor
    layers: list[TransformerLayerParams]
    mlp_w1: Tensor
    mlp_b1: Tensor
    mlp_w2: Tensor
    mlp_b2: Tensor
    theta: Tensor

    def named(self) -> list[tuple[str, Tensor]]:
        out: list[tuple[str, Tensor]] = [("embedding", self.embedding)]
        for i, (w, b) in enumerate(zip(self.gcn_w, self.gcn_b)):
            out += [(f"gcn{i}_w", w), (f"gcn{i}_b", b)]
        out.append(("pe", self.pe))
        for l, lp in enumerate(self.layers):
            for h in range(len(lp.wq)):
                out += [
                    (f"t{l}_h{h}_wq", lp.wq[h]),
                    (f"t{l}_h{h}_wk", lp.wk[h]),
                    (f"t{l}_h{h}_wv", lp.wv[h]),
                ]
            out += [
                (f"t{l}_wo", lp.wo),
                (f"t{l}_ln_gain", lp.ln_gain),
                (f"t{l}_ln_bias", lp.ln_bias),
                (f"t{l}_ffn_w1", lp.ffn_w1),
                (f"t{l}_ffn_b1", lp.ffn_b1),
                (f"t{l}_ffn_w2", lp.ffn_w2),
                (f"t{l}_ffn_b2", lp.ffn_b2),
            ]
        out += [
            ("mlp_w1", self.mlp_w1),
            ("mlp_b1", self.mlp_b1),
            ("mlp_w2", self.mlp_w2),
            ("mlp_b2", self.mlp_b2),
            ("theta", self.theta),
        ]
        return out

    def tensors(self) -> list[Tensor]:
        return [t for _, t in self.named()]

    def tau_star(self) -> Tensor:
        """Temperature in (0,1), the sigmoid transform of the raw parameter."""
        return ad.sigmoid(self.theta)


def init_params(config: ModelConfig, seed: int = 0) -> ModelParams:
    """Fresh parameters: weights uniform(+-1/sqrt(fan_in)), PE normal(0, 0.02)."""
    rng = np.random.default_rng(seed)
    d = config.hidden_dim

    def weight(fan_in: int, *shape) -> Tensor:
        bound = 1.0 / math.sqrt(fan_in)
        return Tensor(rng.uniform(-bound, bound, shape), requires_grad=True)

    def zeros(*shape) -> Tensor:
        return Tensor(np.zeros(shape), requires_grad=True)

    embedding = weight(d, config.label_vocab_size, d)
    gcn_w = [weight(d, d, d) for _ in range(config.gcn_layers)]
    gcn_b = [zeros(d) for _ in range(config.gcn_layers)]
    pe = Tensor(rng.normal(0.0, 0.02, (config.pe_dict_size, d)), requires_grad=True)
    layers = []
    dk = config.head_dim
    for _ in range(config.transformer_layers):
        layers.append(
            TransformerLayerParams(
                wq=[weight(d, d, dk) for _ in range(config.heads)],
                wk=[weight(d, d, dk) for _ in range(config.heads)],
                wv=[weight(d, d, dk) for _ in range(config.heads)],
                wo=weight(d, d, d),
                ln_gain=Tensor(np.ones(d), requires_grad=True),
                ln_bias=zeros(d),
                ffn_w1=weight(d, d, d),
                ffn_b1=zeros(d),
                ffn_w2=weight(d, d, d),
                ffn_b2=zeros(d),
            )
        )
    mlp_w1 = weight(2 * d, 2 * d, config.mlp_hidden)
    mlp_b1 = zeros(config.mlp_hidden)
    mlp_w2 = weight(config.mlp_hidden, config.mlp_hidden, 1)
    mlp_b2 = zeros(1)
    theta = Tensor(
        np.array(math.log(config.tau_init / (1.0 - config.tau_init))),
        requires_grad=True,
    )
    return ModelParams(
        config=config,
        embedding=embedding,
        gcn_w=gcn_w,
        gcn_b=gcn_b,
        pe=pe,
        layers=layers,
        mlp_w1=mlp_w1,
        mlp_b1=mlp_b1,
        mlp_w2=mlp_w2,
        mlp_b2=mlp_b2,
        theta=theta,
    )


# ---------------------------------------------------------------------------
# Forward pass
# ---------------------------------------------------------------------------


def featurize(g: Graph, params: ModelParams) -> Tensor:
    """Initial node features: label-embedding rows."""
    vocab = params.config.label_vocab_size
    if any(lab >= vocab for lab in g.node_labels):
        raise ValueError(
            f"graph {g.graph_id!r} has label ids beyond label_vocab_size={vocab}"
        )
    return ad.row_gather(params.embedding, g.node_labels)


def _normalized_adjacency(g: Graph) -> Tensor:
    """(A + I) scaled by 1/sqrt(d_i d_j) with d = degree + 1; constant."""
    n = g.node_count
    d = np.array([g.degree(v) + 1.0 for v in range(n)])
    hat = np.zeros((n, n))
    for v in range(n):
        hat[v, v] = 1.0 / d[v]
        for w in g.neighbors(v):
            hat[v, w] = 1.0 / math.sqrt(d[v] * d[w])
    return Tensor(hat)


def gcn_layer(features: Tensor, g: Graph, w: Tensor, b: Tensor) -> Tensor:
    """One convolution: ReLU of degree-normalized neighborhood sum (+ self)."""
    if features.shape[0] != g.node_count:
        raise ad.ShapeError(
            f"gcn_layer: features {features.shape} vs {g.node_count} nodes"
        )
    mixed = ad.matmul(_normalized_adjacency(g), ad.matmul(features, w))
    return ad.relu(ad.add(mixed, b))


def _transformer_layer(
    h: Tensor, lp: TransformerLayerParams, head_dim: int
) -> Tensor:
    heads_out = None
    for wq, wk, wv in zip(lp.wq, lp.wk, lp.wv):
        q = ad.matmul(h, wq)
        k = ad.matmul(h, wk)
        v = ad.matmul(h, wv)
        logits = ad.scale(ad.matmul(q, ad.transpose(k)), 1.0 / math.sqrt(head_dim))
        head = ad.matmul(ad.softmax_rows(logits), v)
        heads_out = head if heads_out is None else ad.concat(heads_out, head)
    attended = ad.add(ad.matmul(heads_out, lp.wo), h)
    normed = ad.layer_norm(attended, lp.ln_gain, lp.ln_bias)
    ff = ad.add(
        ad.matmul(ad.relu(ad.add(ad.matmul(normed, lp.ffn_w1), lp.ffn_b1)), lp.ffn_w2),
        lp.ffn_b2,
    )
    return ad.add(ff, attended)


def encode_graph(g: Graph, params: ModelParams) -> Tensor:
    """Node representations: GCN stack + rank-indexed PE + transformer layers."""
    cfg = params.config
    if g.node_count > cfg.pe_dict_size:
        raise ValueError(
            f"graph {g.graph_id!r} has {g.node_count} nodes; node rank would "
            f"exceed pe_dict_size={cfg.pe_dict_size}, configure a larger table"
        )
    h = featurize(g, params)
    for w, b in zip(params.gcn_w, params.gcn_b):
        h = gcn_layer(h, g, w, b)
    ranks = node_ordering(g).ranks
    h = ad.add(h, ad.row_gather(params.pe, ranks))
    for lp in params.layers:
        h = _transformer_layer(h, lp, cfg.head_dim)
    return h


def cross_match(h1: Tensor, h2: Tensor, tau_star: Tensor) -> tuple[Tensor, Tensor]:
    """Soft-match each row of h1 against h2.

    Attention is a row softmax over cosine similarities divided by the
    temperature; rows with zero norm read as similarity 0 everywhere. Returns
    (attention, matched rows), where matched row i is the attention-weighted
    mix of h2 rows that most plausibly corresponds to node i.
    """
    sims = ad.matmul(ad.row_normalize(h1), ad.transpose(ad.row_normalize(h2)))
    attention = ad.softmax_rows(sims, pre_scale=ad.reciprocal(tau_star))
    matched = ad.matmul(attention, h2)
    return attention, matched


def matching_scores(h1: Tensor, matched: Tensor, params: ModelParams) -> Tensor:
    """Per-node match probability in (0,1): sigmoid MLP on [h1 || matched]."""
    x = ad.concat(h1, matched)
    hidden = ad.relu(ad.add(ad.matmul(x, params.mlp_w1), params.mlp_b1))
    return ad.sigmoid(ad.add(ad.matmul(hidden, params.mlp_w2), params.mlp_b2))


@dataclass
class ForwardResult:
    """Pair prediction plus the per-node evidence behind it.

    ``g1`` is always the canonical smaller graph of the pair; ``swapped``
    records whether the inputs were exchanged to achieve that.
    """

    yhat: Tensor
    scores: Tensor
    attention: Tensor
    g1: Graph
    g2: Graph
    swapped: bool

    @property
    def similarity(self) -> float:
        return self.yhat.item()


def _role_key(g: Graph) -> tuple[int, int, str]:
    return (g.node_count, g.edge_count, g.graph_id)


def forward(g_a: Graph, g_b: Graph, params: ModelParams) -> ForwardResult:
    """Predicted similarity: normalized sum of per-node matching scores.

    The pair element smaller under (node count, edge count, id) plays the
    matching side, so the result is exactly symmetric in argument order. The
    score sum divided by the pair's average size lands in [0, 1].
    """
    if g_a.node_count == 0 or g_b.node_count == 0:
        raise ValueError("forward requires non-empty graphs")
    if _role_key(g_a) <= _role_key(g_b):
        g1, g2, swapped = g_a, g_b, False
    else:
        g1, g2, swapped = g_b, g_a, True
    h1 = encode_graph(g1, params)
    h2 = encode_graph(g2, params)
    attention, matched = cross_match(h1, h2, params.tau_star())
    scores = matching_scores(h1, matched, params)
    yhat = ad.scale(ad.sum_all(scores), 2.0 / (g1.node_count + g2.node_count))
    return ForwardResult(
        yhat=yhat, scores=scores, attention=attention, g1=g1, g2=g2, swapped=swapped
    )


def loss(yhat: Tensor, y: float, task: str) -> Tensor:
    """Per-pair loss: MSE for regression, clamped BCE for classification."""
    target = Tensor(np.asarray(float(y)))
    if task == "regression":
        return ad.mse_loss(yhat, target)
    if task == "classification":
        return ad.bce_loss(yhat, target)
    raise ValueError(f"unknown task {task!r}")


# ---------------------------------------------------------------------------
# Checkpoints
# ---------------------------------------------------------------------------


def save_checkpoint(params: ModelParams, path) -> None:
    """Single .npz with the config JSON and every tensor, bit-exact float64."""
    arrays = {f"param/{name}": t.data for name, t in params.named()}
    arrays["config_json"] = np.frombuffer(
        json.dumps(asdict(params.config)).encode("utf-8"), dtype=np.uint8
    )
    np.savez(path, **arrays)


def load_checkpoint(path) -> ModelParams:
    with np.load(path) as bundle:
        config = ModelConfig(
            **json.loads(bundle["config_json"].tobytes().decode("utf-8"))
        )
        params = init_params(config, seed=0)
        for name, t in params.named():
            stored = bundle[f"param/{name}"]
            if stored.shape != t.data.shape:
                raise ValueError(
                    f"checkpoint tensor {name} has shape {stored.shape}, "
                    f"expected {t.data.shape}"
                )
            t.data = stored.astype(np.float64, copy=True)
    return params
