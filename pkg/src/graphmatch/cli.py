"""Command-line interface: one executable, one subcommand per pipeline stage.

Exit codes: 0 success, 2 bad input, 3 oracle budget exceeded, 4 numeric
failure (non-finite values). Every failure prints a single ``error: ...``
line on stderr. A JSON run config (``--config`` or the GRAPHMATCH_CONFIG
environment variable) supplies defaults; explicit flags win over the config.
"""

from __future__ import annotations

import argparse
import copy
import json
import os
import random
import sys
from pathlib import Path

from . import autodiff as ad
from .datasets import (
    generate_ba_ged,
    generate_ba_mcs,
    label_pairs,
    load_dataset,
    make_pairs,
    split_samples,
)
from .evaluation import (
    NumericError,
    bench_runtime,
    export_pe,
    predict_similarity,
    rank_queries,
    write_bench_csv,
    write_metrics_csv,
)
from .graphs import Graph
from .interpret import infer_mcs, mcs_quality, to_dot
from .metrics import auc, mse_metric, spearman_rho
from .model import (
    ModelConfig,
    auto_label_vocab,
    auto_pe_size,
    init_params,
    load_checkpoint,
)
from .oracles import BudgetExceededError
from .storage import (
    DatasetManifest,
    LabelCache,
    MalformedRecordError,
    PairingPolicy,
    load_graphs,
    load_manifest,
    save_graphs,
    save_manifest,
    save_pairs,
)
from .training import TrainConfig, train

CONFIG_ENV_VAR = "GRAPHMATCH_CONFIG"

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_BUDGET = 3
EXIT_NUMERIC = 4

# Generator presets: (core size range, added-node range) for the MCS metric
# and the base size for the GED metric. The three ba* rows match the large
# synthetic benchmarks; "desk" is sized for laptop-scale oracle verification.
PRESETS = {
    "ba100": {"core": (50, 70), "add": (30, 50), "ged_base": 100, "count": 100},
    "ba200": {"core": (100, 120), "add": (80, 100), "ged_base": 200, "count": 100},
    "ba300": {"core": (150, 170), "add": (130, 150), "ged_base": 300, "count": 100},
    "desk": {"core": (6, 9), "add": (2, 5), "ged_base": 8, "count": 200},
}

DEFAULT_RUN_CONFIG = {
    "model": {
        "hidden_dim": 128,
        "gcn_layers": 3,
        "transformer_layers": 2,
        "heads": 8,
        "pe_dict_size": 0,  # 0 = max graph size in the dataset + 16
        "tau_init": 0.5,
        "mlp_hidden_dim": 0,  # 0 = hidden_dim
        "label_vocab_size": 0,  # 0 = max label id in the dataset + 1
    },
    "train": {
        "epochs": 100,
        "batch_size": 128,
        "seed": 0,
        "task": "regression",
        "lr": 0.001,
        "grad_clip": None,
    },
    "oracle": {"budget": 10.0, "beam_width": 100},
}


class CliError(ValueError):
    """Bad input surfaced to the user with exit code 2."""


def load_run_config(path: str | None) -> dict:
    """Defaults, overlaid by the JSON config file; unknown keys rejected."""
    config = copy.deepcopy(DEFAULT_RUN_CONFIG)
    if path is None:
        path = os.environ.get(CONFIG_ENV_VAR) or None
    if path is None:
        return config
    try:
        user = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read config {path}: {exc}") from exc
    for section, values in user.items():
        if section not in config:
            raise CliError(f"unknown config section {section!r}")
        if not isinstance(values, dict):
            raise CliError(f"config section {section!r} must be an object")
        for key, value in values.items():
            if key not in config[section]:
                raise CliError(f"unknown config key {section}.{key!r}")
            config[section][key] = value
    return config


def _model_config(config: dict, graphs: list[Graph]) -> ModelConfig:
    section = dict(config["model"])
    if section["pe_dict_size"] == 0:
        section["pe_dict_size"] = auto_pe_size(graphs)
    if section["label_vocab_size"] == 0:
        section["label_vocab_size"] = auto_label_vocab(graphs)
    try:
        return ModelConfig(**section)
    except ValueError as exc:
        raise CliError(str(exc)) from exc


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_gen_data(args) -> int:
    preset = PRESETS[args.preset]
    count = args.count if args.count is not None else preset["count"]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.metric == "mcs":
        data = generate_ba_mcs(
            preset["core"],
            preset["add"],
            count,
            args.seed,
            attach_m=args.attach_m,
            id_prefix=f"bamcs-{args.preset}-s{args.seed}",
        )
    else:
        data = generate_ba_ged(
            preset["ged_base"],
            count,
            args.seed,
            attach_m=args.attach_m,
            pair_sample=args.pairs,
            id_prefix=f"baged-{args.preset}-s{args.seed}",
        )
    if args.metric == "mcs":
        sample_ids = [(p.g1_id, p.g2_id) for p in data.pairs]
        splits = split_samples(sample_ids, seed=args.seed)
    else:
        # GED pairs live inside one trim collection; split samples, keep
        # within-split pairs so summed edit bounds stay valid per split
        by_sample: list[tuple[str, str]] = []
        per_side = len(data.graphs) // 2
        for i in range(per_side):
            by_sample.append((data.graphs[i].graph_id, data.graphs[per_side + i].graph_id))
        splits = split_samples(by_sample, seed=args.seed)
    member = {gid: name for name, ids in splits.items() for gid in ids}
    kept = [
        p for p in data.pairs if member.get(p.g1_id) == member.get(p.g2_id)
    ]
    if args.pairs is not None and len(kept) > args.pairs:
        kept = sorted(
            random.Random(args.seed).sample(kept, args.pairs),
            key=lambda p: (p.g1_id, p.g2_id),
        )
    save_graphs(data.graphs, out / "graphs.jsonl")
    save_pairs(kept, out / "pairs.jsonl")
    manifest = DatasetManifest(
        metric=args.metric,
        graphs_path="graphs.jsonl",
        splits=splits,
        pairing=PairingPolicy(),
        label_cache_path="cache.jsonl",
        pairs_path="pairs.jsonl",
    )
    save_manifest(manifest, out / "manifest.json")
    print(
        json.dumps(
            {
                "graphs": len(data.graphs),
                "pairs": len(kept),
                "manifest": str(out / "manifest.json"),
            }
        )
    )
    return EXIT_OK


def cmd_label(args) -> int:
    config = load_run_config(args.config)
    budget = args.budget if args.budget is not None else config["oracle"]["budget"]
    manifest = load_manifest(args.manifest)
    root = Path(args.manifest).parent
    graphs = {g.graph_id: g for g in load_graphs(root / manifest.graphs_path)}
    metric = args.metric or manifest.metric
    cache = LabelCache(
        root / manifest.label_cache_path if manifest.label_cache_path else None
    )
    counts = {}
    for split, id_pairs in make_pairs(manifest).items():
        labeled = label_pairs(
            id_pairs,
            graphs,
            metric,
            budget,
            cache,
            config["oracle"]["beam_width"],
            jobs=args.jobs,
        )
        counts[split] = len(labeled)
    print(json.dumps({"labeled": counts, "cache_entries": len(cache)}))
    return EXIT_OK


def _apply_train_flags(config: dict, args) -> None:
    for key in ("epochs", "batch_size", "seed", "task", "lr"):
        value = getattr(args, key, None)
        if value is not None:
            config["train"][key] = value
    for key in ("hidden_dim", "transformer_layers"):
        value = getattr(args, key, None)
        if value is not None:
            config["model"][key] = value


def cmd_train(args) -> int:
    config = load_run_config(args.config)
    _apply_train_flags(config, args)
    dataset = load_dataset(
        args.manifest,
        oracle_budget=config["oracle"]["budget"],
        beam_width=config["oracle"]["beam_width"],
        jobs=args.jobs,
    )
    model_config = _model_config(config, list(dataset.graphs.values()))
    train_config = TrainConfig(checkpoint_dir=args.out, **config["train"])
    result = train(dataset, model_config, train_config, log_every=args.log_every)
    best = result.history[result.best_epoch]
    print(
        json.dumps(
            {
                "best_checkpoint": str(result.best_checkpoint),
                "best_epoch": result.best_epoch,
                "train_loss": best.train_loss,
                "valid_loss": best.valid_loss,
            }
        )
    )
    return EXIT_OK


def cmd_eval(args) -> int:
    config = load_run_config(args.config)
    params = load_checkpoint(args.checkpoint)
    dataset = load_dataset(
        args.manifest,
        oracle_budget=config["oracle"]["budget"],
        beam_width=config["oracle"]["beam_width"],
        jobs=args.jobs,
    )
    pairs = dataset.pairs[args.split]
    if not pairs:
        raise CliError(f"no pairs in split {args.split!r}")
    preds = [
        predict_similarity(params, dataset.graphs[p.g1_id], dataset.graphs[p.g2_id])
        for p in pairs
    ]
    truth = [p.label for p in pairs]
    metrics = {"pairs": len(pairs), "mse": mse_metric(preds, truth)}
    if all(t in (0.0, 1.0) for t in truth) and 0 < sum(truth) < len(truth):
        metrics["auc"] = auc(preds, [int(t) for t in truth])
    else:
        metrics["rho"] = spearman_rho(preds, truth)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "metrics.json").write_text(json.dumps(metrics, indent=2) + "\n")
        write_metrics_csv(metrics, out / "metrics.csv")
    print(json.dumps(metrics))
    return EXIT_OK


def cmd_rank(args) -> int:
    config = load_run_config(args.config)
    results, summary = rank_queries(
        args.checkpoint,
        args.manifest,
        k=args.k,
        max_queries=args.max_queries,
        oracle_budget=config["oracle"]["budget"],
        beam_width=config["oracle"]["beam_width"],
        jobs=args.jobs,
    )
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "ranking_summary.json").write_text(json.dumps(summary, indent=2) + "\n")
        with (out / "rankings.csv").open("w", newline="", encoding="utf-8") as fh:
            import csv as _csv

            writer = _csv.writer(fh)
            writer.writerow(["query", "candidate", "predicted", "truth"])
            for r in results:
                for cid, p, t in zip(r.candidate_ids, r.predicted, r.truth):
                    writer.writerow([r.query_id, cid, p, t])
    print(json.dumps(summary))
    return EXIT_OK


def cmd_infer_mcs(args) -> int:
    config = load_run_config(args.config)
    try:
        id1, id2 = args.pair.split(",")
    except ValueError as exc:
        raise CliError("--pair must be two comma-separated graph ids") from exc
    graphs = {g.graph_id: g for g in load_graphs(args.graphs)}
    for gid in (id1, id2):
        if gid not in graphs:
            raise CliError(f"graph id {gid!r} not found in {args.graphs}")
    predicted = infer_mcs(args.checkpoint, graphs[id1], graphs[id2])
    payload = {
        "yhat": predicted.similarity,
        "m": predicted.size,
        "g1": predicted.source.graph_id,
        "nodes": predicted.nodes,
        "edges": [list(e) for e in predicted.subgraph.sorted_edges()],
    }
    if args.quality:
        payload["quality"] = mcs_quality(
            predicted, graphs[id1], graphs[id2], config["oracle"]["budget"]
        )
    if args.dot:
        Path(args.dot).write_text(to_dot(predicted), encoding="utf-8")
    print(json.dumps(payload))
    return EXIT_OK


def cmd_bench(args) -> int:
    config = load_run_config(args.config)
    budget = args.budget if args.budget is not None else config["oracle"]["budget"]
    manifest = load_manifest(args.manifest)
    root = Path(args.manifest).parent
    graphs = {g.graph_id: g for g in load_graphs(root / manifest.graphs_path)}
    test_ids = manifest.splits["test"]
    if len(test_ids) < 2:
        raise CliError("bench needs at least two test graphs")
    rng = random.Random(args.seed)
    pairs = []
    for _ in range(args.pairs):
        a, b = rng.sample(test_ids, 2)
        pairs.append((graphs[a], graphs[b]))
    rows = bench_runtime(
        args.checkpoint, pairs, budget, config["oracle"]["beam_width"]
    )
    if args.out:
        write_bench_csv(rows, args.out)
    print(json.dumps({r.method: r.mean_seconds for r in rows}))
    return EXIT_OK


def cmd_grad_check(args) -> int:
    worst = 0.0
    for op, err in ad.check_all_ops(seed=args.seed).items():
        print(f"{op} max_rel_err={err:.3e}")
        worst = max(worst, err)
    if worst >= 1e-4:
        raise NumericError(f"gradient check failed: max relative error {worst:.3e}")
    return EXIT_OK


def cmd_export_pe(args) -> int:
    rows = export_pe(args.checkpoint, args.out)
    print(json.dumps({"rows": rows, "out": args.out}))
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphmatch",
        description="Graph similarity: learned matcher plus MCS/GED oracles.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config(p):
        p.add_argument("--config", help="JSON run config (or set $GRAPHMATCH_CONFIG)")

    p = sub.add_parser("gen-data", help="generate a synthetic labeled dataset")
    p.add_argument("--metric", choices=("mcs", "ged"), required=True)
    p.add_argument("--preset", choices=sorted(PRESETS), required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--count", type=int, help="samples (default per preset)")
    p.add_argument("--pairs", type=int, help="cap on emitted labeled pairs")
    p.add_argument("--attach-m", type=int, default=1, dest="attach_m")
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("label", help="label policy pairs through the oracles")
    add_config(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--metric", choices=("mcs", "ged"))
    p.add_argument("--budget", type=float)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("train", help="train a model on a labeled dataset")
    add_config(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="checkpoint directory")
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int, dest="batch_size")
    p.add_argument("--seed", type=int)
    p.add_argument("--task", choices=("regression", "classification"))
    p.add_argument("--lr", type=float)
    p.add_argument("--hidden-dim", type=int, dest="hidden_dim")
    p.add_argument("--transformer-layers", type=int, dest="transformer_layers")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--log-every", type=int, dest="log_every")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="metrics of a checkpoint on one split")
    add_config(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--split", default="test", choices=("train", "valid", "test"))
    p.add_argument("--out")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("rank", help="rank each test graph against the test split")
    add_config(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--max-queries", type=int, dest="max_queries")
    p.add_argument("--out")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("infer-mcs", help="extract the predicted common subgraph")
    add_config(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--graphs", required=True, help="graph JSONL file")
    p.add_argument("--pair", required=True, help="two graph ids: id1,id2")
    p.add_argument("--quality", action="store_true", help="score against the oracle")
    p.add_argument("--dot", help="write a GraphViz file of the prediction")
    p.set_defaults(func=cmd_infer_mcs)

    p = sub.add_parser("bench", help="runtime of model vs oracles on test pairs")
    add_config(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--budget", type=float)
    p.add_argument("--pairs", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("grad-check", help="finite-difference check of every op")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_grad_check)

    p = sub.add_parser("export-pe", help="dump the positional encoding as CSV")
    add_config(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_pe)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_BAD_INPUT
    try:
        return args.func(args)
    except BudgetExceededError as exc:
        print(f"error: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except NumericError as exc:
        print(f"error: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (CliError, MalformedRecordError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
