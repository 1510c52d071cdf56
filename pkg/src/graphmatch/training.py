"""Adam training loop over labeled pairs with per-epoch checkpointing.

Batch gradients are the mean of per-pair gradients, accumulated sequentially,
so a (seed, data, config) triple always produces bitwise-identical
checkpoints. The best checkpoint is the argmin of validation loss.
"""

from __future__ import annotations

import csv
import math
import random
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import autodiff as ad
from .datasets import Dataset, LabeledPair, load_dataset
from .graphs import Graph
from .model import (
    ModelConfig,
    ModelParams,
    forward,
    init_params,
    load_checkpoint,
    loss,
    save_checkpoint,
)


@dataclass
class OptimizerState:
    """Per-parameter Adam moments, keyed like ModelParams.named()."""

    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(params: ModelParams, state: OptimizerState) -> None:
    """Standard bias-corrected Adam update from the accumulated gradients."""
    state.step += 1
    t = state.step
    for name, tensor in params.named():
        grad = tensor.grad
        if grad is None:
            grad = np.zeros_like(tensor.data)
        if name not in state.m:
            state.m[name] = np.zeros_like(tensor.data)
            state.v[name] = np.zeros_like(tensor.data)
        state.m[name] = state.beta1 * state.m[name] + (1 - state.beta1) * grad
        state.v[name] = state.beta2 * state.v[name] + (1 - state.beta2) * grad * grad
        m_hat = state.m[name] / (1 - state.beta1**t)
        v_hat = state.v[name] / (1 - state.beta2**t)
        tensor.data = tensor.data - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)


def clip_gradients(params: ModelParams, max_norm: float) -> None:
    total = 0.0
    for _, t in params.named():
        if t.grad is not None:
            total += float((t.grad * t.grad).sum())
    norm = math.sqrt(total)
    if norm > max_norm and norm > 0:
        factor = max_norm / norm
        for _, t in params.named():
            if t.grad is not None:
                t.grad = t.grad * factor


@dataclass
class TrainConfig:
    epochs: int = 100
    batch_size: int = 128
    seed: int = 0
    task: str = "regression"
    checkpoint_dir: str = "checkpoints"
    lr: float = 0.001
    grad_clip: float | None = None

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        if self.task not in ("regression", "classification"):
            raise ValueError(f"unknown task {self.task!r}")


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    valid_loss: float
    wall_seconds: float


@dataclass
class TrainResult:
    best_checkpoint: Path
    best_epoch: int
    history: list[EpochStats]
    params: ModelParams


def _check_labels(pairs: list[LabeledPair], task: str) -> None:
    for p in pairs:
        if task == "classification" and p.label not in (0.0, 1.0):
            raise ValueError(
                f"classification task but pair ({p.g1_id},{p.g2_id}) "
                f"has label {p.label}"
            )
        if task == "regression" and p.metric == "class":
            raise ValueError("regression task over class-metric labels")


def mean_pair_loss(
    params: ModelParams,
    pairs: list[LabeledPair],
    graphs: dict[str, Graph],
    task: str,
) -> float:
    if not pairs:
        return math.nan
    total = 0.0
    for p in pairs:
        res = forward(graphs[p.g1_id], graphs[p.g2_id], params)
        total += loss(res.yhat, p.label, task).item()
    return total / len(pairs)


def evaluate_loss(checkpoint, pairs, graphs, task: str = "regression") -> float:
    """Mean per-pair loss of a checkpoint (path or in-memory params)."""
    params = checkpoint if isinstance(checkpoint, ModelParams) else load_checkpoint(checkpoint)
    return mean_pair_loss(params, pairs, graphs, task)


def train(
    data: Dataset | str | Path,
    model_config: ModelConfig,
    train_config: TrainConfig,
    log_every: int | None = None,
) -> TrainResult:
    """Optimize on the train split, checkpoint per epoch, pick best on valid.

    Writes one checkpoint per epoch plus a ``training_log.csv`` with columns
    epoch, train_loss, valid_loss, wall_seconds into the checkpoint directory
    and returns the path of the validation-loss argmin (train loss decides
    when the validation split is empty).
    """
    if not isinstance(data, Dataset):
        data = load_dataset(data)
    train_pairs = list(data.pairs.get("train", []))
    valid_pairs = list(data.pairs.get("valid", []))
    if not train_pairs:
        raise ValueError("empty training split")
    _check_labels(train_pairs + valid_pairs, train_config.task)

    out_dir = Path(train_config.checkpoint_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    params = init_params(model_config, seed=train_config.seed)
    state = OptimizerState(lr=train_config.lr)
    rng = random.Random(train_config.seed)
    graphs = data.graphs

    history: list[EpochStats] = []
    best_epoch, best_score = -1, math.inf
    for epoch in range(train_config.epochs):
        tic = time.perf_counter()
        order = list(range(len(train_pairs)))
        rng.shuffle(order)
        epoch_loss = 0.0
        for lo in range(0, len(order), train_config.batch_size):
            batch = order[lo : lo + train_config.batch_size]
            ad.zero_grads(params.tensors())
            inv = 1.0 / len(batch)
            for idx in batch:
                p = train_pairs[idx]
                res = forward(graphs[p.g1_id], graphs[p.g2_id], params)
                pair_loss = loss(res.yhat, p.label, train_config.task)
                epoch_loss += pair_loss.item()
                ad.backward(ad.scale(pair_loss, inv))
            if train_config.grad_clip is not None:
                clip_gradients(params, train_config.grad_clip)
            adam_step(params, state)
        train_loss = epoch_loss / len(order)
        valid_loss = mean_pair_loss(params, valid_pairs, graphs, train_config.task)
        wall = time.perf_counter() - tic
        history.append(EpochStats(epoch, train_loss, valid_loss, wall))
        save_checkpoint(params, out_dir / f"epoch_{epoch:04d}.npz")
        score = valid_loss if not math.isnan(valid_loss) else train_loss
        if score < best_score:
            best_score, best_epoch = score, epoch
        if log_every and (epoch + 1) % log_every == 0:
            print(
                f"epoch {epoch}: train={train_loss:.6f} valid={valid_loss:.6f} "
                f"({wall:.1f}s)",
                flush=True,
            )

    log_path = out_dir / "training_log.csv"
    with log_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "train_loss", "valid_loss", "wall_seconds"])
        for st in history:
            writer.writerow([st.epoch, st.train_loss, st.valid_loss, st.wall_seconds])

    best_path = out_dir / f"epoch_{best_epoch:04d}.npz"
    return TrainResult(
        best_checkpoint=best_path,
        best_epoch=best_epoch,
        history=history,
        params=load_checkpoint(best_path),
    )
