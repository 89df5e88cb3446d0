"""Scikit-learn style estimator wrapping the full pipeline.

``KDominatingSet`` is configured like any estimator (all constructor
arguments stored untouched, ``get_params``/``set_params``/``clone``
compatible) and fitted on a graph. After ``fit`` the computed set, the
tree assignment of every node, run metrics, and the verification report
are available as trailing-underscore attributes.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .dominate import POLICIES
from .graph import Graph, GraphError
from .runner import run_central, run_distributed
from .verify import (VerificationReport, verify_domination, verify_forest,
                     verify_size_bound)

MODES = ("central", "sim")


def as_graph(X) -> Graph:
    """Coerce common graph inputs into the package's Graph type.

    Accepts: a Graph; a mapping node -> iterable of neighbors; an iterable
    of (u, v) edge pairs (lists, tuples, or an array of shape (m, 2)).
    """
    if isinstance(X, Graph):
        return X
    if isinstance(X, Mapping):
        edges = set()
        for u, nbrs in X.items():
            for v in nbrs:
                edges.add((min(int(u), int(v)), max(int(u), int(v))))
        return Graph(sorted(edges), nodes=[int(u) for u in X])
    arr = np.asarray(list(X) if not isinstance(X, np.ndarray) else X)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise GraphError("expected an edge array of shape (m, 2)")
    return Graph([(int(u), int(v)) for u, v in arr])


class KDominatingSet(BaseEstimator):
    """Compute a k-dominating set of a connected graph.

    Parameters
    ----------
    k : int, default=1
        Domination radius; every node ends within k hops of the output set.
        Must satisfy 1 <= k <= n-1 for the fitted graph.
    mode : {"central", "sim"}, default="central"
        "central" runs the reference executor; "sim" runs the same
        procedure as a lockstep message-passing simulation and also fills
        ``metrics_``.
    policy : {"guarded", "literal"}, default="guarded"
        Per-tree class selection. "literal" takes the smallest depth class
        outright (never exceeds floor(n/(k+1)) nodes but can fail to
        dominate shallow trees); "guarded" verifies candidates and may add
        a tree root, guaranteeing domination at a cost of at most one node
        per tree.
    pulse_cap : int or None, default=None
        Simulation safety cap on clock pulses (sim mode only).

    Attributes
    ----------
    dominating_set_ : ndarray of node ids, sorted
    nodes_ : ndarray of all node ids, sorted
    labels_ : ndarray, tree root of each node aligned with ``nodes_``
    n_nodes_ : int
    metrics_ : dict or None, pulse/message/word counters (sim mode)
    report_ : VerificationReport for the fitted output
    """

    def __init__(self, k: int = 1, mode: str = "central",
                 policy: str = "guarded", pulse_cap: Optional[int] = None):
        self.k = k
        self.mode = mode
        self.policy = policy
        self.pulse_cap = pulse_cap

    def fit(self, X, y=None):
        g = as_graph(X)
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.policy not in POLICIES:
            raise ValueError(f"policy must be one of {POLICIES}, got {self.policy!r}")
        if not isinstance(self.k, int) or not 1 <= self.k <= g.n - 1:
            raise ValueError(f"k must satisfy 1 <= k <= n-1, got k={self.k} for n={g.n}")
        if not g.is_connected():
            raise ValueError("the input graph must be connected")

        if self.mode == "central":
            result = run_central(g, self.k, self.policy)
            dom = result.dominating.members
            forest = result.forest
            trace = result.trace
            self.metrics_ = None
        else:
            result = run_distributed(g, self.k, self.policy,
                                     pulse_cap=self.pulse_cap)
            dom = result.dominating
            forest = result.forest
            trace = None
            self.metrics_ = result.metrics.to_dict()

        ok, witness, far = verify_domination(g, dom, self.k)
        self.report_ = VerificationReport(
            dominates=ok,
            farthest_node=witness,
            farthest_distance=far,
            size=len(dom),
            size_bound=g.n // (self.k + 1),
            size_ok=verify_size_bound(len(dom), g.n, self.k),
            guarded_slack=len(forest.members),
            policy=self.policy,
            forest=verify_forest(trace, forest, g, self.k) if trace else None,
        )
        self.graph_ = g
        self.nodes_ = np.asarray(g.nodes, dtype=np.int64)
        self.labels_ = np.asarray([forest.root_of[v] for v in g.nodes], dtype=np.int64)
        self.dominating_set_ = np.asarray(sorted(dom), dtype=np.int64)
        self.n_nodes_ = g.n
        return self

    def _check_fitted(self):
        if not hasattr(self, "dominating_set_"):
            raise NotFittedError("call fit before using this estimator")

    def predict(self, nodes: Optional[Iterable[int]] = None) -> np.ndarray:
        """Boolean membership of the given nodes (default: all, sorted)."""
        self._check_fitted()
        chosen = set(int(v) for v in self.dominating_set_)
        if nodes is None:
            nodes = self.nodes_
        return np.asarray([int(v) in chosen for v in nodes], dtype=bool)

    def fit_predict(self, X, y=None) -> np.ndarray:
        return self.fit(X).predict()

    def score(self, X=None, y=None) -> float:
        """Fraction of the size budget left unused (1 is best, 0 uses the
        full floor(n/(k+1)) allowance)."""
        self._check_fitted()
        bound = max(1, self.n_nodes_ // (self.k + 1))
        return 1.0 - len(self.dominating_set_) / bound
