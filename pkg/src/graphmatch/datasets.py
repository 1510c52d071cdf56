"""Synthetic dataset generation, splits, pair construction and labeling.

The two preferential-attachment generators mirror the construction used for
the synthetic benchmarks: one plants a shared core and labels each pair with
the core's share of the average size (a lower bound on the true normalized
MCS), the other edits two base graphs and labels pairs through a min rule
over the accumulated edit cost and the approximate-GED upper bounds.
"""

from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .graphs import Graph
from .oracles import (
    DEFAULT_BEAM_WIDTH,
    DEFAULT_TIME_BUDGET,
    BudgetExceededError,
    ged_beam,
    ged_hungarian,
    label_ged,
    mcs_exact,
    nged,
    nmcs,
)
from .storage import (
    DatasetManifest,
    LabelCache,
    load_graphs,
    load_manifest,
    load_pairs,
)

# Unit edit costs of one trimming step: adding/removing a leaf moves both a
# node and an edge, adding an edge moves only the edge.
_TRIM_COSTS = {"delete_leaf": 2, "add_leaf": 2, "add_edge": 1}


@dataclass(frozen=True)
class LabeledPair:
    """A pair of graph ids with a similarity label under a given metric."""

    g1_id: str
    g2_id: str
    label: float
    metric: str

    def __post_init__(self):
        if self.metric in ("mcs", "ged"):
            if not (0.0 <= self.label <= 1.0):
                raise ValueError(f"{self.metric} label {self.label} outside [0,1]")
        elif self.metric == "class":
            if self.label not in (0.0, 1.0):
                raise ValueError(f"class label must be 0 or 1, got {self.label}")
        else:
            raise ValueError(f"unknown metric {self.metric!r}")


@dataclass
class GeneratedData:
    """Generator output: the graphs, the labeled pairs, and per-sample notes."""

    graphs: list[Graph]
    pairs: list[LabeledPair]
    samples: list[dict]


def ba_graph(
    n_nodes: int,
    attach_m: int = 1,
    core: Graph | None = None,
    rng: random.Random | None = None,
    seed: int | None = None,
    graph_id: str = "",
) -> Graph:
    """Preferential-attachment graph, optionally grown around a core.

    Without a core the seed graph is the complete graph on ``attach_m + 1``
    nodes; with a core, new nodes attach to the core-seeded graph. Each new
    node connects to ``attach_m`` distinct existing nodes drawn with
    probability proportional to degree. With a core, the first ``core`` nodes
    and their edges are preserved verbatim.
    """
    if n_nodes < 1:
        raise ValueError(f"n_nodes must be >= 1, got {n_nodes}")
    if attach_m < 1:
        raise ValueError(f"attach_m must be >= 1, got {attach_m}")
    if rng is None:
        rng = random.Random(seed)
    edges: list[tuple[int, int]] = []
    repeated: list[int] = []
    if core is not None:
        if core.node_count > n_nodes:
            raise ValueError(
                f"core has {core.node_count} nodes, more than n_nodes={n_nodes}"
            )
        start = core.node_count
        for u, v in core.sorted_edges():
            edges.append((u, v))
            repeated.extend((u, v))
    else:
        start = min(attach_m + 1, n_nodes)
        for u in range(start):
            for v in range(u + 1, start):
                edges.append((u, v))
                repeated.extend((u, v))
    for k in range(start, n_nodes):
        targets: set[int] = set()
        want = min(attach_m, k)
        while len(targets) < want:
            if repeated:
                targets.add(rng.choice(repeated))
            else:
                targets.add(rng.randrange(k))
        for t in sorted(targets):
            edges.append((t, k))
            repeated.extend((t, k))
    return Graph(n_nodes, edges, graph_id=graph_id)


def generate_ba_mcs(
    core_range: tuple[int, int],
    add_range: tuple[int, int],
    count: int,
    seed: int,
    attach_m: int = 1,
    id_prefix: str = "bamcs",
) -> GeneratedData:
    """Pairs of graphs grown from a shared core, labeled by the core share.

    Each sample draws a core size ``c`` and two addition counts, grows both
    graphs from the same core and labels the pair ``c / (c + (a1 + a2) / 2)``,
    a lower bound on the pair's true normalized MCS (the planted core is a
    common induced subgraph by construction).
    """
    c1, c2 = core_range
    a1, a2 = add_range
    if c1 < 2 or c2 < c1:
        raise ValueError(f"invalid core range ({c1}, {c2}); need 2 <= c1 <= c2")
    if a1 < 0 or a2 < a1:
        raise ValueError(f"invalid add range ({a1}, {a2}); need 0 <= a1 <= a2")
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    rng = random.Random(seed)
    graphs: list[Graph] = []
    pairs: list[LabeledPair] = []
    samples: list[dict] = []
    for i in range(count):
        c = rng.randint(c1, c2)
        add1 = rng.randint(a1, a2)
        add2 = rng.randint(a1, a2)
        core = ba_graph(c, attach_m, rng=rng)
        g1 = ba_graph(c + add1, attach_m, core=core, rng=rng, graph_id=f"{id_prefix}-{i}a")
        g2 = ba_graph(c + add2, attach_m, core=core, rng=rng, graph_id=f"{id_prefix}-{i}b")
        label = c / (c + 0.5 * (add1 + add2))
        graphs.extend((g1, g2))
        pairs.append(LabeledPair(g1.graph_id, g2.graph_id, label, "mcs"))
        samples.append(
            {"core": core, "core_size": c, "added": (add1, add2), "pair": i}
        )
    return GeneratedData(graphs, pairs, samples)


def _trim(
    g: Graph, steps: int, rng: random.Random, graph_id: str
) -> tuple[Graph, int]:
    """Apply ``steps`` random edits; returns the graph and the unit edit cost.

    Ops are drawn uniformly from delete-leaf / add-leaf / add-edge; an
    infeasible op falls through to the next feasible one so the edit count
    stays exact.
    """
    nodes = list(range(g.node_count))
    edges = {tuple(sorted(e)) for e in g.edges}
    next_id = g.node_count
    cost = 0

    def degree(v: int) -> int:
        return sum(1 for e in edges if v in e)

    for _ in range(steps):
        op = ("delete_leaf", "add_leaf", "add_edge")[rng.randrange(3)]
        if op == "delete_leaf":
            leaves = sorted(v for v in nodes if degree(v) == 1)
            if not leaves:
                op = "add_edge"
            else:
                v = rng.choice(leaves)
                edges = {e for e in edges if v not in e}
                nodes.remove(v)
                cost += _TRIM_COSTS["delete_leaf"]
                continue
        if op == "add_edge":
            candidates = [
                (u, v)
                for i, u in enumerate(sorted(nodes))
                for v in sorted(nodes)[i + 1 :]
                if (u, v) not in edges
            ]
            if not candidates:
                op = "add_leaf"
            else:
                edges.add(rng.choice(candidates))
                cost += _TRIM_COSTS["add_edge"]
                continue
        # add_leaf is always feasible
        anchor = rng.choice(sorted(nodes))
        edges.add(tuple(sorted((anchor, next_id))))
        nodes.append(next_id)
        next_id += 1
        cost += _TRIM_COSTS["add_leaf"]

    index = {v: i for i, v in enumerate(sorted(nodes))}
    new_edges = [(index[u], index[v]) for u, v in edges]
    return Graph(len(nodes), new_edges, graph_id=graph_id), cost


def generate_ba_ged(
    base_nodes: int,
    count: int,
    seed: int,
    attach_m: int = 1,
    pair_sample: int | None = None,
    beam_width: int = DEFAULT_BEAM_WIDTH,
    id_prefix: str = "baged",
) -> GeneratedData:
    """Edited copies of two base graphs, pair-labeled through the min rule.

    Two base graphs are generated once; sample ``i`` trims each with an edit
    count that steps up every 10 samples (capped at 10). Pairs are drawn
    within a base's collection so the summed unit edit costs upper-bound the
    pair's true GED through the shared base; the label then takes
    ``min(cost_i + cost_j, beam, hungarian)`` and maps it through
    ``exp(-ged / mean size)``.
    """
    if base_nodes < 3:
        raise ValueError(f"base_nodes must be >= 3, got {base_nodes}")
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    rng = random.Random(seed)
    bases = (
        ba_graph(base_nodes, attach_m, rng=rng, graph_id=f"{id_prefix}-base-a"),
        ba_graph(base_nodes, attach_m, rng=rng, graph_id=f"{id_prefix}-base-b"),
    )
    collections: tuple[list, list] = ([], [])
    steps = 0
    for i in range(count):
        if i % 10 == 0:
            steps = min(steps + 1, 10)
        for side, tag in ((0, "a"), (1, "b")):
            trimmed, cost = _trim(bases[side], steps, rng, f"{id_prefix}-{i}{tag}")
            collections[side].append((trimmed, cost, steps))

    candidates = [
        (side, i, j)
        for side in (0, 1)
        for i in range(count)
        for j in range(i, count)
    ]
    if pair_sample is not None and pair_sample < len(candidates):
        candidates = sorted(rng.sample(candidates, pair_sample))

    graphs = [g for coll in collections for g, _, _ in coll]
    pairs: list[LabeledPair] = []
    samples: list[dict] = []
    for side, i, j in candidates:
        g1, cost1, _ = collections[side][i]
        g2, cost2, _ = collections[side][j]
        bound = cost1 + cost2
        approx = min(
            ged_beam(g1, g2, beam_width).value, ged_hungarian(g1, g2).value
        )
        value = min(bound, approx)
        pairs.append(
            LabeledPair(g1.graph_id, g2.graph_id, nged(g1, g2, value), "ged")
        )
        samples.append(
            {
                "side": side,
                "pair": (i, j),
                "edit_bound": bound,
                "approx_bound": approx,
                "ged_value": value,
            }
        )
    return GeneratedData(graphs, pairs, samples)


# ---------------------------------------------------------------------------
# Splits, pair construction, labeling
# ---------------------------------------------------------------------------


def split_dataset(
    ids: list[str],
    fractions: tuple[float, float, float] = (0.8, 0.1, 0.1),
    seed: int = 0,
) -> dict[str, list[str]]:
    """Deterministic shuffled train/valid/test split; disjoint and covering."""
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError(f"fractions must sum to 1, got {fractions}")
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate graph ids")
    shuffled = sorted(ids)
    random.Random(seed).shuffle(shuffled)
    n = len(shuffled)
    n_train = int(round(fractions[0] * n))
    n_valid = min(int(round(fractions[1] * n)), n - n_train)
    return {
        "train": shuffled[:n_train],
        "valid": shuffled[n_train : n_train + n_valid],
        "test": shuffled[n_train + n_valid :],
    }


def split_samples(
    pair_ids: list[tuple[str, str]],
    fractions: tuple[float, float, float] = (0.8, 0.1, 0.1),
    seed: int = 0,
) -> dict[str, list[str]]:
    """Split whole samples: both ids of a pair land in the same split."""
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError(f"fractions must sum to 1, got {fractions}")
    order = list(range(len(pair_ids)))
    random.Random(seed).shuffle(order)
    n = len(order)
    n_train = int(round(fractions[0] * n))
    n_valid = min(int(round(fractions[1] * n)), n - n_train)
    buckets = {
        "train": sorted(order[:n_train]),
        "valid": sorted(order[n_train : n_train + n_valid]),
        "test": sorted(order[n_train + n_valid :]),
    }
    return {
        name: [gid for k in idxs for gid in pair_ids[k]]
        for name, idxs in buckets.items()
    }


def make_pairs(manifest: DatasetManifest) -> dict[str, list[tuple[str, str]]]:
    """Unlabeled within-split pairs according to the manifest's policy."""
    policy = manifest.pairing
    out: dict[str, list[tuple[str, str]]] = {}
    all_candidates = {
        name: [
            (ids[i], ids[j])
            for i in range(len(ids))
            for j in range(i + 1, len(ids))
        ]
        for name, ids in manifest.splits.items()
    }
    if policy.policy == "all_pairs":
        return all_candidates
    total = sum(len(c) for c in all_candidates.values())
    rng = random.Random(policy.seed)
    for name, candidates in all_candidates.items():
        if not candidates or total == 0:
            out[name] = []
            continue
        want = min(
            len(candidates),
            max(1, round(policy.count * len(candidates) / total)),
        )
        out[name] = sorted(rng.sample(candidates, want))
    return out


def _label_one(
    g1: Graph,
    g2: Graph,
    metric: str,
    budget: float | None,
    beam_width: int,
) -> tuple[int, str]:
    if metric == "mcs":
        try:
            res = mcs_exact(g1, g2, budget)
        except BudgetExceededError as exc:
            res = exc.best
        return res.value, res.provenance
    if metric == "ged":
        res = label_ged(g1, g2, budget, beam_width)
        return res.value, res.provenance
    raise ValueError(f"cannot compute labels for metric {metric!r}")


def label_pairs(
    pairs: list[tuple[str, str]],
    graphs: dict[str, Graph],
    metric: str,
    oracle_budget: float | None = DEFAULT_TIME_BUDGET,
    cache: LabelCache | None = None,
    beam_width: int = DEFAULT_BEAM_WIDTH,
    jobs: int = 1,
) -> list[LabeledPair]:
    """Label id pairs through the oracles, consulting and filling the cache."""
    if cache is None:
        cache = LabelCache()
    todo = [
        (a, b) for a, b in pairs if cache.get(a, b, metric) is None
    ]
    if jobs > 1 and todo:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = pool.map(
                _label_one,
                (graphs[a] for a, b in todo),
                (graphs[b] for a, b in todo),
                [metric] * len(todo),
                [oracle_budget] * len(todo),
                [beam_width] * len(todo),
            )
            for (a, b), (value, provenance) in zip(todo, results):
                cache.put(a, b, metric, value, provenance)
    else:
        for a, b in todo:
            value, provenance = _label_one(
                graphs[a], graphs[b], metric, oracle_budget, beam_width
            )
            cache.put(a, b, metric, value, provenance)
    out = []
    for a, b in pairs:
        value, _ = cache.get(a, b, metric)
        g1, g2 = graphs[a], graphs[b]
        label = nmcs(g1, g2, value) if metric == "mcs" else nged(g1, g2, value)
        out.append(LabeledPair(a, b, label, metric))
    return out


# ---------------------------------------------------------------------------
# High-level dataset loading
# ---------------------------------------------------------------------------


@dataclass
class Dataset:
    """Materialized dataset: graphs by id and labeled pairs per split."""

    manifest: DatasetManifest
    graphs: dict[str, Graph]
    pairs: dict[str, list[LabeledPair]]

    def split_graphs(self, name: str) -> list[Graph]:
        return [self.graphs[i] for i in self.manifest.splits[name]]


def load_dataset(
    manifest_path,
    oracle_budget: float | None = DEFAULT_TIME_BUDGET,
    beam_width: int = DEFAULT_BEAM_WIDTH,
    jobs: int = 1,
) -> Dataset:
    """Load a manifest and materialize labeled pairs for every split.

    Relative paths in the manifest resolve against the manifest's directory.
    Pre-built pair files are split by membership (pairs crossing splits are
    dropped); otherwise pairs come from the pairing policy and are labeled
    through the oracle cache.
    """
    manifest_path = Path(manifest_path)
    manifest = load_manifest(manifest_path)
    root = manifest_path.parent

    def resolve(p: str) -> Path:
        path = Path(p)
        return path if path.is_absolute() else root / path

    graph_list = load_graphs(resolve(manifest.graphs_path))
    graphs = {g.graph_id: g for g in graph_list}
    if len(graphs) != len(graph_list):
        raise ValueError("duplicate graph ids in graph file")
    missing = [i for i in manifest.all_ids() if i not in graphs]
    if missing:
        raise ValueError(f"manifest references unknown graph ids: {missing[:3]}")

    split_of = {
        gid: name for name, ids in manifest.splits.items() for gid in ids
    }
    pairs: dict[str, list[LabeledPair]] = {
        name: [] for name in ("train", "valid", "test")
    }
    if manifest.pairs_path is not None:
        for pair in load_pairs(resolve(manifest.pairs_path)):
            s1, s2 = split_of.get(pair.g1_id), split_of.get(pair.g2_id)
            if s1 is not None and s1 == s2:
                pairs.setdefault(s1, []).append(pair)
    else:
        cache = LabelCache(
            resolve(manifest.label_cache_path)
            if manifest.label_cache_path
            else None
        )
        for name, id_pairs in make_pairs(manifest).items():
            pairs[name] = label_pairs(
                id_pairs,
                graphs,
                manifest.metric,
                oracle_budget,
                cache,
                beam_width,
                jobs,
            )
    return Dataset(manifest=manifest, graphs=graphs, pairs=pairs)
