"""Immutable undirected graph model, deterministic generators, edge-list I/O
and BFS utilities shared by the rest of the package.

Node identifiers are distinct nonnegative integers. Generated graphs use
0..n-1; parsed graphs may use arbitrary distinct nonnegative 64-bit ids.
"""

from __future__ import annotations

import random
from collections import deque
from typing import Dict, Iterable, Mapping, Optional, Tuple

MAX_NODE_ID = 2**63 - 1


class GraphError(ValueError):
    """Invalid graph structure, parameters, or input document."""


class Graph:
    """Immutable undirected simple graph.

    Construction validates: no self-loops, no duplicate edges. Connectivity
    is *not* required here; callers that need it use :meth:`is_connected`
    (algorithm entry points reject disconnected inputs).
    """

    __slots__ = ("_nodes", "_adj", "_edges")

    def __init__(self, edges: Iterable[Tuple[int, int]], nodes: Optional[Iterable[int]] = None):
        adj: Dict[int, list] = {}
        eset = set()
        if nodes is not None:
            for v in nodes:
                _check_id(v)
                if v in adj:
                    raise GraphError(f"duplicate node id {v}")
                adj[v] = []
        for u, v in edges:
            _check_id(u)
            _check_id(v)
            if u == v:
                raise GraphError(f"self-loop at node {u}")
            key = (u, v) if u < v else (v, u)
            if key in eset:
                raise GraphError(f"duplicate edge {key}")
            eset.add(key)
            adj.setdefault(u, []).append(v)
            adj.setdefault(v, []).append(u)
        if not adj:
            raise GraphError("graph has no nodes")
        self._nodes: Tuple[int, ...] = tuple(sorted(adj))
        self._adj: Dict[int, Tuple[int, ...]] = {v: tuple(sorted(ns)) for v, ns in adj.items()}
        self._edges = frozenset(eset)

    @property
    def n(self) -> int:
        return len(self._nodes)

    @property
    def m(self) -> int:
        return len(self._edges)

    @property
    def nodes(self) -> Tuple[int, ...]:
        return self._nodes

    @property
    def edges(self) -> frozenset:
        return self._edges

    def neighbors(self, v: int) -> Tuple[int, ...]:
        return self._adj[v]

    def adjacency(self) -> Mapping[int, Tuple[int, ...]]:
        return self._adj

    def has_edge(self, u: int, v: int) -> bool:
        return ((u, v) if u < v else (v, u)) in self._edges

    def is_connected(self) -> bool:
        seen = bfs_distances(self, {self._nodes[0]})
        return len(seen) == self.n

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._nodes == other._nodes and self._edges == other._edges

    def __hash__(self):
        return hash((self._nodes, self._edges))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


def _check_id(v) -> None:
    if not isinstance(v, int) or isinstance(v, bool):
        raise GraphError(f"node id must be an integer, got {v!r}")
    if v < 0 or v > MAX_NODE_ID:
        raise GraphError(f"node id {v} outside allowed range 0..{MAX_NODE_ID}")


# ---------------------------------------------------------------------------
# Edge-list document format: first line "n m"; one "u v" pair per line;
# lines starting with '#' are comments and ignored.
# ---------------------------------------------------------------------------

def parse_edgelist(text: str) -> Graph:
    """Parse an edge-list document into a Graph.

    Raises GraphError with the offending line number on malformed lines,
    self-loops, duplicate edges, out-of-range ids, or count mismatches.
    """
    header: Optional[Tuple[int, int]] = None
    edges = []
    seen = set()
    ids = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if header is None:
            if len(parts) != 2:
                raise GraphError(f"line {lineno}: expected header 'n m', got {line!r}")
            try:
                header = (int(parts[0]), int(parts[1]))
            except ValueError:
                raise GraphError(f"line {lineno}: non-integer header {line!r}") from None
            if header[0] < 1 or header[1] < 0:
                raise GraphError(f"line {lineno}: invalid header counts {line!r}")
            continue
        if len(parts) != 2:
            raise GraphError(f"line {lineno}: expected edge 'u v', got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphError(f"line {lineno}: non-integer endpoint in {line!r}") from None
        if u < 0 or v < 0 or u > MAX_NODE_ID or v > MAX_NODE_ID:
            raise GraphError(f"line {lineno}: node id outside declared range")
        if u == v:
            raise GraphError(f"line {lineno}: self-loop at node {u}")
        key = (u, v) if u < v else (v, u)
        if key in seen:
            raise GraphError(f"line {lineno}: duplicate edge {u} {v}")
        seen.add(key)
        ids.update(key)
        edges.append((u, v))
    if header is None:
        raise GraphError("empty document: missing 'n m' header")
    n, m = header
    if len(edges) != m:
        raise GraphError(f"declared m={m} but found {len(edges)} edges")
    if n == 1 and not edges:
        return Graph([], nodes=[0])
    if len(ids) != n:
        raise GraphError(f"declared n={n} but found {len(ids)} distinct node ids")
    return Graph(edges)


def format_edgelist(g: Graph) -> str:
    lines = [f"{g.n} {g.m}"]
    lines.extend(f"{u} {v}" for u, v in sorted(g.edges))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Generators. All deterministic in (kind, params, seed).
# ---------------------------------------------------------------------------

GENERATOR_KINDS = ("path", "cycle", "star", "balanced-tree", "gnm-connected", "grid")


def generate(kind: str, seed: int = 0, **params) -> Graph:
    """Build a connected graph of the given kind.

    Kinds and parameters:
      path           n
      cycle          n (>= 3)
      star           n (>= 2): node 0 is the hub
      balanced-tree  branching (>= 1), height (>= 0)
      grid           rows, cols
      gnm-connected  n, m (n-1 <= m <= n(n-1)/2): uniform random spanning
                     tree plus m-n+1 distinct random extra edges
    """
    if kind == "path":
        n = _need_int(params, "n", 1)
        return Graph([(i, i + 1) for i in range(n - 1)], nodes=range(n))
    if kind == "cycle":
        n = _need_int(params, "n", 3)
        return Graph([(i, (i + 1) % n) for i in range(n)])
    if kind == "star":
        n = _need_int(params, "n", 2)
        return Graph([(0, i) for i in range(1, n)])
    if kind == "balanced-tree":
        b = _need_int(params, "branching", 1)
        h = _need_int(params, "height", 0)
        edges = []
        frontier = [0]
        nxt = 1
        for _ in range(h):
            newfront = []
            for p in frontier:
                for _ in range(b):
                    edges.append((p, nxt))
                    newfront.append(nxt)
                    nxt += 1
            frontier = newfront
        return Graph(edges, nodes=range(nxt))
    if kind == "grid":
        r = _need_int(params, "rows", 1)
        c = _need_int(params, "cols", 1)
        if r * c < 1:
            raise GraphError("grid needs at least one cell")
        edges = []
        for i in range(r):
            for j in range(c):
                v = i * c + j
                if j + 1 < c:
                    edges.append((v, v + 1))
                if i + 1 < r:
                    edges.append((v, v + c))
        return Graph(edges, nodes=range(r * c))
    if kind == "gnm-connected":
        n = _need_int(params, "n", 2)
        m = _need_int(params, "m", 1)
        if m < n - 1:
            raise GraphError(f"gnm-connected needs m >= n-1 (got n={n}, m={m})")
        if m > n * (n - 1) // 2:
            raise GraphError(f"gnm-connected needs m <= n(n-1)/2 (got n={n}, m={m})")
        rng = random.Random(seed)
        edges = set(_random_spanning_tree(n, rng))
        while len(edges) < m:
            u = rng.randrange(n)
            v = rng.randrange(n)
            if u == v:
                continue
            key = (u, v) if u < v else (v, u)
            if key not in edges:
                edges.add(key)
        return Graph(sorted(edges), nodes=range(n))
    raise GraphError(f"unknown generator kind {kind!r}")


def _need_int(params, name, lo):
    try:
        value = int(params[name])
    except KeyError:
        raise GraphError(f"missing parameter {name!r}") from None
    except (TypeError, ValueError):
        raise GraphError(f"parameter {name!r} must be an integer") from None
    if value < lo:
        raise GraphError(f"parameter {name}={value} below minimum {lo}")
    return value


def _random_spanning_tree(n: int, rng: random.Random):
    """Uniform random labeled tree on 0..n-1 via a Pruefer sequence."""
    if n == 1:
        return []
    if n == 2:
        return [(0, 1)]
    seq = [rng.randrange(n) for _ in range(n - 2)]
    degree = [1] * n
    for s in seq:
        degree[s] += 1
    edges = []
    # classic decode: repeatedly attach the smallest leaf to the next code entry
    import heapq

    leaves = [v for v in range(n) if degree[v] == 1]
    heapq.heapify(leaves)
    for s in seq:
        leaf = heapq.heappop(leaves)
        edges.append((min(leaf, s), max(leaf, s)))
        degree[s] -= 1
        if degree[s] == 1:
            heapq.heappush(leaves, s)
    u = heapq.heappop(leaves)
    v = heapq.heappop(leaves)
    edges.append((min(u, v), max(u, v)))
    return edges


# ---------------------------------------------------------------------------
# BFS
# ---------------------------------------------------------------------------

def bfs_distances(g: Graph, sources: Iterable[int]) -> Dict[int, int]:
    """Minimum hop count from each reachable node to the nearest source."""
    srcs = list(sources)
    if not srcs:
        raise GraphError("bfs_distances requires a nonempty source set")
    dist = {}
    q = deque()
    for s in srcs:
        if s not in g.adjacency():
            raise GraphError(f"source {s} not a node of the graph")
        if s not in dist:
            dist[s] = 0
            q.append(s)
    while q:
        v = q.popleft()
        d = dist[v] + 1
        for w in g.neighbors(v):
            if w not in dist:
                dist[w] = d
                q.append(w)
    return dist


