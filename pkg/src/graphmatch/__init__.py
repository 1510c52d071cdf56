"""Graph similarity toolkit: learned node-matching model plus exact oracles.

The package has three layers: combinatorial ground truth (``graphs``,
``oracles``), data plumbing (``datasets``, ``storage``) and the learned
similarity model with its training/evaluation stack (``autodiff``, ``model``,
``training``, ``metrics``, ``evaluation``, ``interpret``). The ``graphmatch``
CLI wires them together.
"""

from .graphs import (
    Graph,
    NodeOrdering,
    bfs_distances,
    closeness_centrality,
    connected_components,
    induced_subgraph,
    node_ordering,
    rank_values,
    relabel_nodes,
)
from .oracles import (
    BudgetExceededError,
    OracleResult,
    edit_path_cost,
    ged_astar,
    ged_beam,
    ged_hungarian,
    hungarian_assignment,
    label_ged,
    mcs_exact,
    nged,
    nmcs,
)

__all__ = [
    "Graph",
    "NodeOrdering",
    "bfs_distances",
    "closeness_centrality",
    "connected_components",
    "induced_subgraph",
    "node_ordering",
    "rank_values",
    "relabel_nodes",
    "BudgetExceededError",
    "OracleResult",
    "edit_path_cost",
    "ged_astar",
    "ged_beam",
    "ged_hungarian",
    "hungarian_assignment",
    "label_ged",
    "mcs_exact",
    "nged",
    "nmcs",
]

__version__ = "0.1.0"
