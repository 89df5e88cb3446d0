"""Second stage: depth-class layering of each forest tree and selection of
the output dominating set.

Each tree is sliced into k+1 classes by depth modulo k+1. The *literal*
policy takes the smallest class per tree, which meets the global floor(n/(k+1))
size bound but can come out empty or non-dominating on shallow trees. The
*guarded* policy verifies candidates against tree distances and may add the
root, trading at most one extra node per tree for guaranteed coverage.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Tuple

from .forest import RootedForest

POLICIES = ("literal", "guarded")


class DominateError(ValueError):
    """Invalid forest or parameters for the selection stage."""


@dataclass(frozen=True)
class DepthClasses:
    root: int
    k: int
    classes: Tuple[FrozenSet[int], ...]  # index ell holds depth % (k+1) == ell

    @property
    def tree_size(self) -> int:
        return sum(len(c) for c in self.classes)


@dataclass(frozen=True)
class TreeChoice:
    root: int
    class_index: int
    augmented: bool
    members: FrozenSet[int]


@dataclass(frozen=True)
class DominatingSet:
    members: FrozenSet[int]
    per_tree: Dict[int, TreeChoice]

    def sorted_members(self) -> List[int]:
        return sorted(self.members)


def layer_tree(f: RootedForest, root: int, k: int) -> DepthClasses:
    """Partition a tree's nodes into classes by depth modulo k+1."""
    depths = f.depths(root)
    classes: List[set] = [set() for _ in range(k + 1)]
    for v, d in depths.items():
        classes[d % (k + 1)].add(v)
    return DepthClasses(root, k, tuple(frozenset(c) for c in classes))


def select_literal(classes: DepthClasses) -> Tuple[int, FrozenSet[int]]:
    """Smallest class, ties broken by the smaller class index.

    May be empty and may fail to dominate a shallow tree; callers that need
    guaranteed coverage use :func:`select_guarded`.
    """
    best = min(range(classes.k + 1), key=lambda ell: (len(classes.classes[ell]), ell))
    return best, classes.classes[best]


def _tree_adjacency(f: RootedForest, root: int) -> Dict[int, List[int]]:
    adj: Dict[int, List[int]] = {v: [] for v in f.members[root]}
    for v in f.members[root]:
        p = f.parent[v]
        if p is not None:
            adj[v].append(p)
            adj[p].append(v)
    return adj


def tree_dominates(f: RootedForest, root: int, candidate: FrozenSet[int], k: int) -> bool:
    """True when every tree member is within k tree edges of the candidate.

    Tree distances upper-bound host-graph distances, so this check is
    conservative: a candidate that passes dominates its members in the full
    graph as well.
    """
    if not candidate:
        return False
    adj = _tree_adjacency(f, root)
    dist = {v: 0 for v in candidate}
    q = deque(sorted(candidate))
    while q:
        v = q.popleft()
        if dist[v] >= k:
            continue
        for w in adj[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                q.append(w)
    return len(dist) == len(adj)


def select_guarded(classes: DepthClasses, f: RootedForest, root: int,
                   k: int) -> Tuple[int, bool, FrozenSet[int]]:
    """Smallest verified-dominating candidate for one tree.

    Candidates are the root class, every nonempty class that dominates the
    tree on its own, and every class augmented with the root. Ties prefer
    fewer nodes, then the smaller class index, then no augmentation. The
    root class always dominates (every node has an ancestor at depth 0 mod
    k+1 within k steps), so a candidate always exists.
    """
    options: List[Tuple[int, int, bool, FrozenSet[int]]] = []
    for ell in range(classes.k + 1):
        cls = classes.classes[ell]
        if tree_dominates(f, root, cls, k):
            options.append((len(cls), ell, False, cls))
        if ell >= 1:
            aug = cls | {root}
            if tree_dominates(f, root, aug, k):
                options.append((len(aug), ell, True, aug))
    if not options:
        raise DominateError(f"no dominating candidate for tree {root}; "
                            "the root class should always qualify")
    size, ell, augmented, members = min(options, key=lambda o: (o[0], o[1], o[2]))
    return ell, augmented, members


def build_dominating_set(f: RootedForest, k: int, policy: str = "guarded") -> DominatingSet:
    """Union of the per-tree selections over a forest of trees with >= k+1
    nodes each."""
    if policy not in POLICIES:
        raise DominateError(f"unknown policy {policy!r}")
    members: set = set()
    per_tree: Dict[int, TreeChoice] = {}
    for root in sorted(f.members):
        if len(f.members[root]) < k + 1:
            raise DominateError(
                f"tree {root} has {len(f.members[root])} nodes, below the k+1 floor")
        classes = layer_tree(f, root, k)
        if policy == "literal":
            ell, chosen = select_literal(classes)
            choice = TreeChoice(root, ell, False, chosen)
        else:
            ell, augmented, chosen = select_guarded(classes, f, root, k)
            choice = TreeChoice(root, ell, augmented, chosen)
        per_tree[root] = choice
        members |= choice.members
    return DominatingSet(frozenset(members), per_tree)
