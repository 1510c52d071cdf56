"""File formats: graph JSON-lines, the pair label cache, and dataset manifests.

Graph records are one JSON object per line::

    {"id": str, "n": int, "labels": [int, ...], "edges": [[u, v], ...]}

Writing is canonical (fixed key order, sorted edges) so that identical graphs
always serialize to identical bytes.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .graphs import Graph

METRICS = ("mcs", "ged", "class")


class MalformedRecordError(ValueError):
    """A JSONL record failed validation; carries the 1-based line number."""

    def __init__(self, path, line_no: int, reason: str):
        super().__init__(f"{path}:{line_no}: {reason}")
        self.line_no = line_no


def graph_to_record(g: Graph) -> dict:
    return {
        "id": g.graph_id,
        "n": g.node_count,
        "labels": list(g.node_labels),
        "edges": [list(e) for e in g.sorted_edges()],
    }


def graph_from_record(rec: dict) -> Graph:
    return Graph(
        node_count=rec["n"],
        edges=[tuple(e) for e in rec["edges"]],
        node_labels=rec["labels"],
        graph_id=rec["id"],
    )


def save_graphs(graphs: Iterable[Graph], path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for g in graphs:
            fh.write(json.dumps(graph_to_record(g)) + "\n")


def load_graphs(path) -> list[Graph]:
    path = Path(path)
    graphs = []
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                if not isinstance(rec.get("id"), str):
                    raise ValueError("missing or non-string 'id'")
                graphs.append(graph_from_record(rec))
            except MalformedRecordError:
                raise
            except (KeyError, TypeError, ValueError) as exc:
                raise MalformedRecordError(path, line_no, str(exc)) from exc
    return graphs


def pair_key(g1_id: str, g2_id: str) -> tuple[str, str]:
    """Order-normalized pair key (lexicographic ids)."""
    return (g1_id, g2_id) if g1_id <= g2_id else (g2_id, g1_id)


class LabelCache:
    """JSONL cache of oracle values, keyed by (normalized id pair, metric).

    Entries are ``{"g1": id, "g2": id, "metric": "mcs"|"ged", "value": int,
    "provenance": str}``. Appends are serialized through a lock so labeling
    jobs can run data-parallel.
    """

    def __init__(self, path=None):
        self.path = Path(path) if path is not None else None
        self._entries: dict[tuple[str, str, str], tuple[int, str]] = {}
        self._lock = threading.Lock()
        if self.path is not None and self.path.exists():
            self._load()

    def _load(self) -> None:
        with self.path.open("r", encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    rec = json.loads(line)
                    key = (*pair_key(rec["g1"], rec["g2"]), rec["metric"])
                    self._entries[key] = (int(rec["value"]), rec["provenance"])
                except (KeyError, TypeError, ValueError) as exc:
                    raise MalformedRecordError(self.path, line_no, str(exc)) from exc

    def get(self, g1_id: str, g2_id: str, metric: str) -> tuple[int, str] | None:
        return self._entries.get((*pair_key(g1_id, g2_id), metric))

    def put(
        self, g1_id: str, g2_id: str, metric: str, value: int, provenance: str
    ) -> None:
        a, b = pair_key(g1_id, g2_id)
        with self._lock:
            if (a, b, metric) in self._entries:
                return
            self._entries[(a, b, metric)] = (int(value), provenance)
            if self.path is not None:
                rec = {
                    "g1": a,
                    "g2": b,
                    "metric": metric,
                    "value": int(value),
                    "provenance": provenance,
                }
                with self.path.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps(rec) + "\n")

    def __len__(self) -> int:
        return len(self._entries)


@dataclass
class PairingPolicy:
    """Either every in-split pair ("all_pairs") or a seeded sample of them."""

    policy: str = "all_pairs"
    count: int = 0
    seed: int = 0

    def to_dict(self) -> dict:
        if self.policy == "all_pairs":
            return {"policy": "all_pairs"}
        return {"policy": "sampled", "count": self.count, "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "PairingPolicy":
        if d["policy"] == "all_pairs":
            return cls(policy="all_pairs")
        if d["policy"] == "sampled":
            return cls(policy="sampled", count=int(d["count"]), seed=int(d["seed"]))
        raise ValueError(f"unknown pairing policy {d['policy']!r}")


@dataclass
class DatasetManifest:
    """Everything needed to reproduce a labeled pair dataset from files.

    ``splits`` maps "train"/"valid"/"test" to disjoint id lists that cover the
    graph file. ``pairs_path``, when set, points to a JSONL file of pre-built
    labeled pairs (as written by the generators); otherwise pairs are derived
    from the pairing policy and labeled through the oracle cache.
    """

    metric: str
    graphs_path: str
    splits: dict[str, list[str]]
    pairing: PairingPolicy = field(default_factory=PairingPolicy)
    label_cache_path: str | None = None
    pairs_path: str | None = None

    def __post_init__(self):
        if self.metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}, got {self.metric!r}")
        seen: set[str] = set()
        for name in ("train", "valid", "test"):
            ids = self.splits.get(name, [])
            overlap = seen.intersection(ids)
            if overlap:
                raise ValueError(f"splits overlap on ids {sorted(overlap)[:3]}")
            seen.update(ids)

    def all_ids(self) -> list[str]:
        return [i for name in ("train", "valid", "test") for i in self.splits[name]]

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "graphs": self.graphs_path,
            "splits": self.splits,
            "pairing": self.pairing.to_dict(),
            "label_cache": self.label_cache_path,
            "pairs": self.pairs_path,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetManifest":
        return cls(
            metric=d["metric"],
            graphs_path=d["graphs"],
            splits={k: list(v) for k, v in d["splits"].items()},
            pairing=PairingPolicy.from_dict(d.get("pairing", {"policy": "all_pairs"})),
            label_cache_path=d.get("label_cache"),
            pairs_path=d.get("pairs"),
        )


def save_manifest(manifest: DatasetManifest, path) -> None:
    Path(path).write_text(
        json.dumps(manifest.to_dict(), indent=2) + "\n", encoding="utf-8"
    )


def load_manifest(path) -> DatasetManifest:
    return DatasetManifest.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def save_pairs(pairs: Sequence, path) -> None:
    """Write labeled pairs as JSONL; accepts any objects with the pair fields."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for p in pairs:
            rec = {
                "g1": p.g1_id,
                "g2": p.g2_id,
                "label": float(p.label),
                "metric": p.metric,
            }
            fh.write(json.dumps(rec) + "\n")


def load_pairs(path):
    from .datasets import LabeledPair

    pairs = []
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                pairs.append(
                    LabeledPair(
                        g1_id=rec["g1"],
                        g2_id=rec["g2"],
                        label=float(rec["label"]),
                        metric=rec["metric"],
                    )
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise MalformedRecordError(path, line_no, str(exc)) from exc
    return pairs
