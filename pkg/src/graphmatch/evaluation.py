"""The ranking protocol, the oracle-vs-model runtime benchmark, and exports."""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .datasets import Dataset, label_pairs, load_dataset
from .graphs import Graph
from .metrics import precision_at_k, spearman_rho
from .model import ModelParams, forward, load_checkpoint
from .oracles import (
    DEFAULT_BEAM_WIDTH,
    DEFAULT_TIME_BUDGET,
    BudgetExceededError,
    ged_astar,
    ged_beam,
    ged_hungarian,
    mcs_exact,
)
from .storage import LabelCache


class NumericError(RuntimeError):
    """A model produced a non-finite value where a score was required."""


def _params_of(checkpoint) -> ModelParams:
    return checkpoint if isinstance(checkpoint, ModelParams) else load_checkpoint(checkpoint)


def predict_similarity(params: ModelParams, g1: Graph, g2: Graph) -> float:
    value = forward(g1, g2, params).similarity
    if not math.isfinite(value):
        raise NumericError(
            f"non-finite similarity for pair ({g1.graph_id}, {g2.graph_id})"
        )
    return value


@dataclass
class RankingResult:
    """One query ranked against the full test split.

    Candidates are ordered by predicted score descending (ties by id);
    ``predicted`` and ``truth`` are aligned with ``candidate_ids``.
    """

    query_id: str
    candidate_ids: list[str]
    predicted: list[float]
    truth: list[float]

    def rho(self) -> float:
        return spearman_rho(self.predicted, self.truth)

    def p_at_k(self, k: int) -> float:
        return precision_at_k(self.predicted, self.truth, k, self.candidate_ids)


def rank_queries(
    checkpoint,
    data: Dataset | str | Path,
    k: int = 10,
    max_queries: int | None = None,
    oracle_budget: float | None = DEFAULT_TIME_BUDGET,
    beam_width: int = DEFAULT_BEAM_WIDTH,
    jobs: int = 1,
) -> tuple[list[RankingResult], dict[str, float]]:
    """Rank every test graph against the full test split.

    Ground truth comes from the oracles (through the manifest's label cache),
    not from generator labels, so rankings are scored against the metric
    itself. ``max_queries`` keeps desk-scale oracle cost bounded by using only
    the first queries of the split; candidates always cover the whole split.
    """
    params = _params_of(checkpoint)
    if not isinstance(data, Dataset):
        data = load_dataset(data, oracle_budget=oracle_budget, jobs=jobs)
    candidates = data.manifest.splits["test"]
    if not candidates:
        raise ValueError("empty test split")
    queries = candidates if max_queries is None else candidates[:max_queries]
    cache_path = data.manifest.label_cache_path
    cache = LabelCache(cache_path) if cache_path else LabelCache()

    results = []
    for q in queries:
        id_pairs = [(q, c) for c in candidates]
        truth_pairs = label_pairs(
            id_pairs,
            data.graphs,
            data.manifest.metric,
            oracle_budget,
            cache,
            beam_width,
            jobs,
        )
        preds = [
            predict_similarity(params, data.graphs[q], data.graphs[c])
            for c in candidates
        ]
        order = sorted(
            range(len(candidates)), key=lambda i: (-preds[i], candidates[i])
        )
        results.append(
            RankingResult(
                query_id=q,
                candidate_ids=[candidates[i] for i in order],
                predicted=[preds[i] for i in order],
                truth=[truth_pairs[i].label for i in order],
            )
        )
    k_eff = min(k, len(candidates))
    per_query_rho = [r.rho() for r in results]
    summary = {
        "queries": float(len(results)),
        "candidates": float(len(candidates)),
        "k": float(k_eff),
        "p_at_k": float(np.mean([r.p_at_k(k_eff) for r in results])),
        "mean_rho": float(np.mean(per_query_rho)),
        "global_rho": spearman_rho(
            [p for r in results for p in r.predicted],
            [t for r in results for t in r.truth],
        ),
    }
    return results, summary


# ---------------------------------------------------------------------------
# Runtime benchmark
# ---------------------------------------------------------------------------


@dataclass
class BenchRow:
    method: str
    mean_seconds: float
    pairs: int


def bench_runtime(
    checkpoint,
    pairs: list[tuple[Graph, Graph]],
    oracle_budget: float | None = DEFAULT_TIME_BUDGET,
    beam_width: int = DEFAULT_BEAM_WIDTH,
) -> list[BenchRow]:
    """Mean wall seconds per pair for the model and each classical oracle.

    Budget-exhausted exact searches contribute their elapsed time (roughly the
    budget), which understates how much slower they truly are; the comparison
    stays qualitative.
    """
    params = _params_of(checkpoint)

    def timed(fn) -> float:
        tic = time.perf_counter()
        try:
            fn()
        except BudgetExceededError:
            pass
        return time.perf_counter() - tic

    methods = {
        "model": lambda a, b: predict_similarity(params, a, b),
        "mcs_exact": lambda a, b: mcs_exact(a, b, oracle_budget),
        "ged_astar": lambda a, b: ged_astar(a, b, oracle_budget),
        "ged_beam": lambda a, b: ged_beam(a, b, beam_width),
        "ged_hungarian": ged_hungarian,
    }
    rows = []
    for name, fn in methods.items():
        total = sum(timed(lambda: fn(a, b)) for a, b in pairs)
        rows.append(BenchRow(name, total / len(pairs), len(pairs)))
    return rows


def write_bench_csv(rows: list[BenchRow], path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "mean_seconds", "pairs"])
        for row in rows:
            writer.writerow([row.method, f"{row.mean_seconds:.9f}", row.pairs])


# ---------------------------------------------------------------------------
# Exports
# ---------------------------------------------------------------------------


def export_pe(checkpoint, path) -> int:
    """Dump the positional-encoding table as CSV (index, then d columns)."""
    params = _params_of(checkpoint)
    pe = params.pe.data
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index"] + [f"c{j}" for j in range(pe.shape[1])])
        for i in range(pe.shape[0]):
            writer.writerow([i] + [repr(float(x)) for x in pe[i]])
    return pe.shape[0]


def write_metrics_csv(metrics: dict[str, float], path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "value"])
        for name, value in metrics.items():
            writer.writerow([name, value])
