"""Evaluation metrics: mse, Spearman rank correlation, precision@k, AUC."""

from __future__ import annotations

from typing import Sequence

import numpy as np


def mse_metric(pred: Sequence[float], truth: Sequence[float]) -> float:
    p = np.asarray(pred, dtype=float)
    t = np.asarray(truth, dtype=float)
    if p.shape != t.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {t.shape}")
    return float(np.mean((p - t) ** 2))


def average_ranks(values: Sequence[float]) -> np.ndarray:
    """1-based ranks with ties sharing their average rank."""
    v = np.asarray(values, dtype=float)
    order = np.argsort(v, kind="stable")
    ranks = np.empty(len(v), dtype=float)
    i = 0
    while i < len(v):
        j = i
        while j + 1 < len(v) and v[order[j + 1]] == v[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def spearman_rho(pred: Sequence[float], truth: Sequence[float]) -> float:
    """Pearson correlation of average ranks; 0 when either side has no variance."""
    p = np.asarray(pred, dtype=float)
    t = np.asarray(truth, dtype=float)
    if p.shape != t.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {t.shape}")
    if len(p) < 2:
        return 0.0
    rp = average_ranks(p)
    rt = average_ranks(t)
    sp = rp.std()
    st = rt.std()
    if sp == 0.0 or st == 0.0:
        return 0.0
    return float(((rp - rp.mean()) * (rt - rt.mean())).mean() / (sp * st))


def precision_at_k(
    pred: Sequence[float],
    truth: Sequence[float],
    k: int,
    candidate_ids: Sequence | None = None,
) -> float:
    """Overlap of the predicted and true top-k, ties broken by candidate id."""
    if candidate_ids is None:
        candidate_ids = list(range(len(pred)))
    if not 1 <= k <= len(pred):
        raise ValueError(f"k must be in 1..{len(pred)}, got {k}")
    if len(pred) != len(truth) or len(pred) != len(candidate_ids):
        raise ValueError("pred, truth and candidate_ids must have equal length")
    by_pred = sorted(range(len(pred)), key=lambda i: (-pred[i], candidate_ids[i]))
    by_truth = sorted(range(len(truth)), key=lambda i: (-truth[i], candidate_ids[i]))
    top_pred = {candidate_ids[i] for i in by_pred[:k]}
    top_truth = {candidate_ids[i] for i in by_truth[:k]}
    return len(top_pred & top_truth) / k


def auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Mann-Whitney AUC: P(score_pos > score_neg) + 0.5 P(equal)."""
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels)
    if s.shape != y.shape:
        raise ValueError(f"length mismatch: {s.shape} vs {y.shape}")
    if not set(np.unique(y)) <= {0, 1}:
        raise ValueError("labels must be binary")
    pos = int((y == 1).sum())
    neg = int((y == 0).sum())
    if pos == 0 or neg == 0:
        raise ValueError("auc needs at least one positive and one negative label")
    ranks = average_ranks(s)
    rank_sum_pos = float(ranks[y == 1].sum())
    return (rank_sum_pos - pos * (pos + 1) / 2) / (pos * neg)
