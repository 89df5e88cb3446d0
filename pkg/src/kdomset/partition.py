"""Centralized reference executor of the graph-contraction stage.

Runs the phase loop exactly as specified over an explicit meta-graph: build
the directed edges of the current phase, absorb actives into oversized
trees, prune parallel upstreams, then contract the remaining label chains.
The executor is the semantic authority the message-passing realization is
compared against, so every decision (snapshots, tie-breaks, merge order) is
deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple

from .chains import ChainState, contract_chains, extremum_pass, log_star
from .forest import MetaGraph, RootedForest, Status, init_g0, merge
from .graph import Graph


class PartitionError(RuntimeError):
    """Violated precondition or internal invariant of the contraction."""


def ceil_log2(x: int) -> int:
    if x < 1:
        raise PartitionError(f"ceil_log2 needs a positive argument, got {x}")
    return (x - 1).bit_length()


def num_phases(k: int) -> int:
    """Number of contraction phases for neighborhood radius k (>= 1)."""
    if k < 1:
        raise PartitionError(f"k must be at least 1, got {k}")
    return ceil_log2(k + 1)


def check_run_params(g: Graph, k: int) -> None:
    if k < 1 or k > g.n - 1:
        raise PartitionError(f"k must satisfy 1 <= k <= n-1 (k={k}, n={g.n})")


# ---------------------------------------------------------------------------
# Trace
# ---------------------------------------------------------------------------

@dataclass
class StepSnapshot:
    step: str
    statuses: Dict[int, str]
    edges: List[Tuple[int, int]]
    merges: List[Tuple[int, int, Tuple[int, int]]]  # (absorbed, survivor, via pair)
    root_of: Optional[Dict[int, int]] = None

    def to_dict(self) -> dict:
        d = {
            "step": self.step,
            "statuses": {str(x): s for x, s in sorted(self.statuses.items())},
            "edges": [list(e) for e in self.edges],
            "merges": [[a, b, list(via)] for a, b, via in self.merges],
        }
        if self.root_of is not None:
            d["root_of"] = {str(v): r for v, r in sorted(self.root_of.items())}
        return d


@dataclass
class PhaseRecord:
    phase: int
    entry_sizes: Dict[int, int]
    entry_heights: Dict[int, int]
    statuses_1a: Dict[int, str]
    steps: List[StepSnapshot] = field(default_factory=list)
    survivors: List[int] = field(default_factory=list)
    root_of_after: Dict[int, int] = field(default_factory=dict)
    chain_rounds: int = 0
    early_exit: bool = False


@dataclass
class PhaseTrace:
    k: int
    phases: List[PhaseRecord] = field(default_factory=list)
    early_exit: bool = False
    final_phase: int = 0
    final_sizes: Dict[int, int] = field(default_factory=dict)
    final_heights: Dict[int, int] = field(default_factory=dict)

    def to_dicts(self) -> List[dict]:
        out = []
        for rec in self.phases:
            for snap in rec.steps:
                d = snap.to_dict()
                d["phase"] = rec.phase
                out.append(d)
        return out


# ---------------------------------------------------------------------------
# Step implementations
# ---------------------------------------------------------------------------

def recompute_heights(mg: MetaGraph, f: RootedForest) -> None:
    for root, node in mg.nodes.items():
        node.height = f.tree_height(root)


def step1_classify(mg: MetaGraph, f: RootedForest) -> None:
    """A tree is inactive for the phase when its height reaches 2^(i+1)."""
    bound = 2 ** (mg.phase + 1)
    recompute_heights(mg, f)
    for node in mg.nodes.values():
        node.status = Status.INACTIVE if node.height >= bound else Status.ACTIVE


EARLY_EXIT = "early-exit"


def step1_edges(mg: MetaGraph, f: RootedForest, g: Graph) -> bool:
    """Give every active meta-node its single outgoing edge.

    The target is the least-id active potential neighbor, falling back to
    the least-id inactive one; the recorded host edge is the
    lexicographically least (u, v) pair between the two trees. Returns True
    (early exit) when a single meta-node spans the whole graph.
    """
    mg.out_edge.clear()
    mg.preferred.clear()
    if len(mg.nodes) == 1:
        return True
    # candidate[x][y] = least host edge (u, v) with u in x's tree, v in y's
    candidate: Dict[int, Dict[int, Tuple[int, int]]] = {x: {} for x in mg.nodes}
    for a, b in sorted(g.edges):
        ra, rb = f.root_of[a], f.root_of[b]
        if ra == rb:
            continue
        for x, y, u, v in ((ra, rb, a, b), (rb, ra, b, a)):
            best = candidate[x].get(y)
            if best is None or (u, v) < best:
                candidate[x][y] = (u, v)
    for x in sorted(mg.nodes):
        if mg.nodes[x].status is not Status.ACTIVE:
            continue
        options = candidate[x]
        actives = [y for y in options if mg.nodes[y].status is Status.ACTIVE]
        pool = actives if actives else sorted(options)
        if not pool:
            raise PartitionError(
                f"active node {x} has no potential neighbors in a multi-node phase")
        y = min(pool)
        mg.add_edge(x, y, options[y])
    return False


def active_nonisolated(mg: MetaGraph) -> List[int]:
    incident: Set[int] = set()
    for src, dst in mg.out_edge.items():
        incident.add(src)
        incident.add(dst)
    return sorted(x for x in mg.nodes
                  if mg.nodes[x].status is Status.ACTIVE and x in incident)


def step2a_absorb_into_inactive(mg: MetaGraph, f: RootedForest,
                                log: List[Tuple[int, int, Tuple[int, int]]]) -> List[int]:
    """Combine every active node whose downstream neighbor is inactive into
    that neighbor; the surviving node keeps the inactive node's id."""
    ups = mg.upstreams()
    targets: Dict[int, List[int]] = {}
    for x, y in sorted(mg.out_edge.items()):
        if mg.nodes[y].status is Status.INACTIVE:
            if ups[x]:
                raise PartitionError(
                    f"active {x} points at inactive {y} but has upstreams {ups[x]}")
            targets.setdefault(y, []).append(x)
    for y in sorted(targets):
        for x in sorted(targets[y]):
            merge(mg, f, x, y, (x, y))
            log.append((x, y, (x, y)))
            del mg.out_edge[x]
    # all inactive nodes are now edge-free, hence isolated
    for x, node in mg.nodes.items():
        if node.status is Status.INACTIVE:
            node.status = Status.ISOLATED
    x_set = active_nonisolated(mg)
    for x in x_set:
        y = mg.out_edge.get(x)
        if y is None or mg.nodes[y].status is not Status.ACTIVE:
            raise PartitionError(f"member {x} of X lacks an active downstream")
    return x_set


def step2b_prune_upstreams(mg: MetaGraph, f: RootedForest,
                           log: List[Tuple[int, int, Tuple[int, int]]]) -> List[int]:
    """Keep only the least-id upstream of every node; merge in the parallel
    upstreams that have none of their own, drop the edges of the rest."""
    ups = mg.upstreams()
    x_set = active_nonisolated(mg)
    merges: List[Tuple[int, int]] = []
    drops: List[int] = []
    for x in x_set:
        z_list = ups[x]
        if not z_list:
            continue
        for y in z_list[1:]:  # z_list is sorted, so [0] is the survivor z
            if ups[y]:
                drops.append(y)
            else:
                merges.append((y, x))
    for y, x in sorted(merges):
        merge(mg, f, y, x, (y, x))
        log.append((y, x, (y, x)))
        del mg.out_edge[y]
    for y in drops:
        del mg.out_edge[y]
    return active_nonisolated(mg)


def _chain_state(mg: MetaGraph, x_set: List[int]) -> ChainState:
    labels = {x: x for x in x_set}
    edges = {x: mg.out_edge[x] for x in x_set if x in mg.out_edge}
    return ChainState.from_edges(labels, edges)


def _bind_callbacks(mg: MetaGraph, f: RootedForest,
                    log: List[Tuple[int, int, Tuple[int, int]]]):
    def on_merge(src: int, dst: int, via: Tuple[int, int]) -> None:
        merge(mg, f, src, dst, via)
        log.append((src, dst, via))
        mg.out_edge.pop(src, None)

    def on_isolate(x: int) -> None:
        mg.nodes[x].status = Status.ISOLATED
        mg.out_edge.pop(x, None)

    return on_merge, on_isolate


def _sync_edges(mg: MetaGraph, st: ChainState) -> None:
    mg.out_edge = {x: st.down[x] for x in st.down
                   if st.down[x] is not None and x in mg.nodes}


def step2c_minima(mg: MetaGraph, f: RootedForest, st: ChainState,
                  log: List[Tuple[int, int, Tuple[int, int]]]) -> List[int]:
    on_merge, on_isolate = _bind_callbacks(mg, f, log)
    extremum_pass(st, True, on_merge, on_isolate)
    _sync_edges(mg, st)
    return active_nonisolated(mg)


def step2d_maxima(mg: MetaGraph, f: RootedForest, st: ChainState,
                  log: List[Tuple[int, int, Tuple[int, int]]]) -> List[int]:
    on_merge, on_isolate = _bind_callbacks(mg, f, log)
    extremum_pass(st, False, on_merge, on_isolate)
    _sync_edges(mg, st)
    return active_nonisolated(mg)


def step2e_iterate(mg: MetaGraph, f: RootedForest, st: ChainState,
                   log: List[Tuple[int, int, Tuple[int, int]]]) -> Tuple[List[int], int]:
    """Contract the remaining monotone chains; returns (survivor ids, rounds)."""
    on_merge, on_isolate = _bind_callbacks(mg, f, log)
    if st.alive():
        cap = log_star(max(st.label[x] for x in st.alive())) + 3
    else:
        cap = 3
    rounds = contract_chains(st, on_merge, on_isolate, iteration_cap=cap)
    _sync_edges(mg, st)
    if mg.out_edge:
        raise PartitionError(f"meta edges survived chain contraction: {mg.out_edge}")
    for node in mg.nodes.values():
        node.status = Status.ISOLATED
    return sorted(mg.nodes), rounds


# ---------------------------------------------------------------------------
# Phase loop
# ---------------------------------------------------------------------------

def run_partition(g: Graph, k: int,
                  snapshot_steps: bool = False) -> Tuple[RootedForest, PhaseTrace]:
    """Contract g into a rooted spanning forest whose trees each have at
    least k+1 nodes. Returns the forest and the full phase trace."""
    check_run_params(g, k)
    if not g.is_connected():
        raise PartitionError("input graph must be connected")
    forest, mg = init_g0(g)
    trace = PhaseTrace(k=k)
    phases = num_phases(k)
    for i in range(phases):
        mg.phase = i
        rec = PhaseRecord(
            phase=i,
            entry_sizes={r: len(forest.members[r]) for r in mg.nodes},
            entry_heights={},
            statuses_1a={},
        )
        trace.phases.append(rec)
        trace.final_phase = i

        def snap(step: str, merges, statuses=None):
            rec.steps.append(StepSnapshot(
                step=step,
                statuses=statuses if statuses is not None else
                         {x: n.status.value for x, n in sorted(mg.nodes.items())},
                edges=sorted(mg.out_edge.items()),
                merges=list(merges),
                root_of=dict(forest.root_of) if snapshot_steps else None,
            ))

        step1_classify(mg, forest)
        rec.entry_heights = {x: n.height for x, n in mg.nodes.items()}
        rec.statuses_1a = {x: n.status.value for x, n in mg.nodes.items()}
        snap("1a", [])

        early = step1_edges(mg, forest, g)
        if early:
            rec.early_exit = True
            trace.early_exit = True
            snap("1b", [])
            rec.survivors = sorted(mg.nodes)
            rec.root_of_after = dict(forest.root_of)
            break
        snap("1c", [])

        log: List[Tuple[int, int, Tuple[int, int]]] = []
        x_set = step2a_absorb_into_inactive(mg, forest, log)
        snap("2a", log)

        log = []
        x_set = step2b_prune_upstreams(mg, forest, log)
        snap("2b", log)

        st = _chain_state(mg, x_set)
        log = []
        x_set = step2c_minima(mg, forest, st, log)
        snap("2c", log)

        log = []
        x_set = step2d_maxima(mg, forest, st, log)
        snap("2d", log)

        log = []
        survivors, rounds = step2e_iterate(mg, forest, st, log)
        rec.chain_rounds = rounds
        snap("2e", log)

        rec.survivors = survivors
        rec.root_of_after = dict(forest.root_of)
        if set(survivors) != set(forest.members):
            raise PartitionError("meta-node set diverged from the forest roots")
        # survivors carry phase i+1: statuses recomputed at its step 1a

    trace.final_sizes = {r: len(forest.members[r]) for r in forest.members}
    trace.final_heights = {r: forest.tree_height(r) for r in forest.members}
    low = min(trace.final_sizes.values())
    if low < k + 1:
        raise PartitionError(f"final tree of {low} nodes violates the k+1 floor")
    return forest, trace
