"""kdomset: synchronous distributed construction of small k-dominating sets.

A connected graph is contracted phase by phase into a rooted spanning
forest whose trees each carry at least k+1 nodes; slicing every tree by
depth modulo k+1 then yields a k-dominating set of at most floor(n/(k+1))
nodes. The package ships a centralized reference executor, a faithful
lockstep message-passing simulation of the same procedure, verification
and brute-force oracles, complexity accounting, a command-line interface,
and a scikit-learn style estimator wrapper.
"""

from .graph import Graph, GraphError, bfs_distances, generate, parse_edgelist
from .forest import RootedForest, MetaGraph, MetaNode, Status, init_g0
from .partition import PhaseTrace, num_phases, run_partition
from .dominate import DominatingSet, build_dominating_set, layer_tree
from .verify import (VerificationReport, brute_force_min_kdom, check_bounds,
                     compare_runs, verify_domination, verify_size_bound)
from .simkernel import Envelope, RunMetrics, SimulationError
from .runner import run_central, run_compare, run_distributed
from .estimator import KDominatingSet

__version__ = "0.1.0"

__all__ = [
    "Graph", "GraphError", "bfs_distances", "generate", "parse_edgelist",
    "RootedForest", "MetaGraph", "MetaNode", "Status", "init_g0",
    "PhaseTrace", "num_phases", "run_partition",
    "DominatingSet", "build_dominating_set", "layer_tree",
    "VerificationReport", "brute_force_min_kdom", "check_bounds",
    "compare_runs", "verify_domination", "verify_size_bound",
    "Envelope", "RunMetrics", "SimulationError",
    "run_central", "run_compare", "run_distributed",
    "KDominatingSet",
    "__version__",
]
