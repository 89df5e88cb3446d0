"""Rooted spanning forests embedded in a host graph.

Every meta-node of the contraction is concretely a rooted tree whose edges
are edges of the host graph. The forest tracks parent pointers, the root of
each node's tree, and per-root member sets; merge and re-root are the two
mutating primitives every contraction step uses.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Optional, Set, Tuple

from .graph import Graph


class ForestError(RuntimeError):
    """Structural misuse of a rooted forest (bad root, broken precondition)."""


class MissingPreferredEdge(ForestError):
    """No host-graph edge was recorded for a meta-pair that needs one.

    This signals a protocol bug, not bad input: every merge crosses a
    recorded preferred edge.
    """


class Status(Enum):
    ACTIVE = "active"
    INACTIVE = "inactive"
    ISOLATED = "isolated"


class RootedForest:
    """Partition of a graph's nodes into rooted trees (parent maps)."""

    __slots__ = ("parent", "root_of", "members")

    def __init__(self, parent: Dict[int, Optional[int]], root_of: Dict[int, int],
                 members: Dict[int, Set[int]]):
        self.parent = parent
        self.root_of = root_of
        self.members = members

    @classmethod
    def singletons(cls, nodes: Iterable[int]) -> "RootedForest":
        nodes = list(nodes)
        return cls(
            parent={v: None for v in nodes},
            root_of={v: v for v in nodes},
            members={v: {v} for v in nodes},
        )

    def roots(self) -> List[int]:
        return sorted(self.members)

    def copy(self) -> "RootedForest":
        return RootedForest(
            dict(self.parent),
            dict(self.root_of),
            {r: set(ms) for r, ms in self.members.items()},
        )

    def children_map(self, root: int) -> Dict[int, List[int]]:
        kids: Dict[int, List[int]] = {v: [] for v in self.members[root]}
        for v in self.members[root]:
            p = self.parent[v]
            if p is not None:
                kids[p].append(v)
        return kids

    def depths(self, root: int) -> Dict[int, int]:
        if self.parent.get(root, 0) is not None:
            raise ForestError(f"{root} is not a root")
        kids = self.children_map(root)
        depth = {root: 0}
        q = deque([root])
        while q:
            v = q.popleft()
            for c in kids[v]:
                depth[c] = depth[v] + 1
                q.append(c)
        return depth

    def tree_height(self, root: int) -> int:
        """Longest root-to-leaf path, in edges (0 for a singleton)."""
        return max(self.depths(root).values())

    def reroot(self, u: int) -> None:
        """Make u the root of its tree by reversing the path to the old root."""
        old = self.root_of[u]
        if old == u:
            return
        chain = [u]
        p = self.parent[u]
        while p is not None:
            chain.append(p)
            p = self.parent[p]
        # chain runs u .. old root; flip every parent pointer along it
        for i in range(len(chain) - 1, 0, -1):
            self.parent[chain[i]] = chain[i - 1]
        self.parent[u] = None
        tree = self.members.pop(old)
        self.members[u] = tree
        for v in tree:
            self.root_of[v] = u

    def attach(self, u: int, v: int) -> None:
        """Hang the tree rooted at u below node v (of a different tree)."""
        if self.parent.get(u, 0) is not None:
            raise ForestError(f"attach requires {u} to be a root")
        dst_root = self.root_of[v]
        if dst_root == u:
            raise ForestError("attach within one tree")
        self.parent[u] = v
        moved = self.members.pop(u)
        self.members[dst_root] |= moved
        for w in moved:
            self.root_of[w] = dst_root

    def validate(self, g: Graph) -> None:
        """Check structural invariants against the host graph."""
        seen = set()
        for root, ms in self.members.items():
            if self.parent[root] is not None:
                raise ForestError(f"member-set key {root} is not a root")
            for v in ms:
                if v in seen:
                    raise ForestError(f"node {v} in two trees")
                seen.add(v)
                if self.root_of[v] != root:
                    raise ForestError(f"root_of[{v}] inconsistent")
                p = self.parent[v]
                if p is None:
                    if v != root:
                        raise ForestError(f"extra root {v} inside tree {root}")
                elif not g.has_edge(v, p):
                    raise ForestError(f"tree edge ({v},{p}) is not a graph edge")
        if seen != set(g.nodes):
            raise ForestError("trees do not partition the node set")
        # acyclicity: depths() would loop forever on a cycle, so walk with a bound
        for v in g.nodes:
            hops, p = 0, self.parent[v]
            while p is not None:
                p = self.parent[p]
                hops += 1
                if hops > len(g.nodes):
                    raise ForestError("parent relation has a cycle")


def dump_forest(f: RootedForest) -> str:
    """One line per node: 'v parent root', with '-' for a missing parent."""
    lines = []
    for v in sorted(f.parent):
        p = f.parent[v]
        lines.append(f"{v} {'-' if p is None else p} {f.root_of[v]}")
    return "\n".join(lines) + "\n"


@dataclass
class MetaNode:
    id: int
    status: Status
    height: int


class MetaGraph:
    """Directed graph over meta-nodes for one contraction phase.

    Every directed edge x->y carries a recorded *preferred* host-graph edge
    (u, v) with u in x's tree and v in y's tree; merges and routed messages
    cross exactly that edge. Preferred records persist until phase end so
    rescue merges can reuse them after the meta-edge itself is gone.
    """

    def __init__(self, phase: int, nodes: Dict[int, MetaNode]):
        self.phase = phase
        self.nodes = nodes
        self.out_edge: Dict[int, int] = {}
        self.preferred: Dict[Tuple[int, int], Tuple[int, int]] = {}

    def upstreams(self) -> Dict[int, List[int]]:
        ups: Dict[int, List[int]] = {x: [] for x in self.nodes}
        for src, dst in self.out_edge.items():
            ups[dst].append(src)
        for lst in ups.values():
            lst.sort()
        return ups

    def neighbors_of(self, x: int) -> Set[int]:
        nbrs = set()
        if x in self.out_edge:
            nbrs.add(self.out_edge[x])
        for src, dst in self.out_edge.items():
            if dst == x:
                nbrs.add(src)
        return nbrs

    def add_edge(self, src: int, dst: int, via: Tuple[int, int]) -> None:
        self.out_edge[src] = dst
        self.preferred[(src, dst)] = via

    def resolve_preferred(self, src: int, dst: int) -> Tuple[int, int]:
        """Host edge (u, v) with u in src's tree, v in dst's tree."""
        via = self.preferred.get((src, dst))
        if via is not None:
            return via
        via = self.preferred.get((dst, src))
        if via is not None:
            return via[1], via[0]
        raise MissingPreferredEdge(f"no preferred edge recorded between {src} and {dst}")


def init_g0(g: Graph) -> Tuple[RootedForest, MetaGraph]:
    """Phase-0 state: every node a singleton tree and a meta-node of height 0."""
    if not g.is_connected():
        raise ForestError("host graph must be connected")
    forest = RootedForest.singletons(g.nodes)
    nodes = {v: MetaNode(v, Status.ACTIVE, 0) for v in g.nodes}
    return forest, MetaGraph(0, nodes)


def merge(mg: MetaGraph, f: RootedForest, src: int, dst: int,
          via_pair: Optional[Tuple[int, int]] = None) -> None:
    """Combine meta-node src into dst; the surviving node keeps dst's id.

    The src tree is re-rooted at its endpoint of the preferred edge and hung
    below the dst-side endpoint. ``via_pair`` names the meta-pair whose
    preferred edge to cross (defaults to (src, dst)); rescue merges pass the
    pair of the eliminated meta-edge instead.
    """
    a, b = via_pair if via_pair is not None else (src, dst)
    u, v = mg.resolve_preferred(a, b)
    if f.root_of[u] != src:
        u, v = v, u
    if f.root_of[u] != src or f.root_of[v] != dst:
        raise MissingPreferredEdge(
            f"preferred edge for ({a},{b}) does not join {src}'s tree to {dst}'s")
    f.reroot(u)
    f.attach(u, v)
    mg.nodes.pop(src, None)
