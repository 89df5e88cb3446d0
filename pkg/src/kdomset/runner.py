"""High-level run entry points: the centralized executor, the simulated
distributed executor, and the equality comparison between them."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, List, Optional, Tuple

from .dominate import DominatingSet, build_dominating_set
from .forest import RootedForest
from .graph import Graph
from .partition import PhaseTrace, check_run_params, run_partition
from .protocol import PartitionProtocol, ProtocolError, Schedule
from .simkernel import RunMetrics, run as kernel_run
from .verify import RunOutputs, compare_runs


@dataclass
class CentralResult:
    forest: RootedForest
    trace: PhaseTrace
    dominating: DominatingSet

    def outputs(self) -> RunOutputs:
        return RunOutputs(dict(self.forest.root_of), self.dominating.members)


@dataclass
class DistributedResult:
    forest: RootedForest
    dominating: FrozenSet[int]
    per_tree_choice: Dict[int, Tuple[int, bool]]
    metrics: RunMetrics
    snapshots: Dict[int, Dict[int, int]] = field(default_factory=dict)

    def outputs(self) -> RunOutputs:
        return RunOutputs(dict(self.forest.root_of), self.dominating)


def run_central(g: Graph, k: int, policy: str = "guarded",
                snapshot_steps: bool = False) -> CentralResult:
    forest, trace = run_partition(g, k, snapshot_steps=snapshot_steps)
    dom = build_dominating_set(forest, k, policy)
    return CentralResult(forest, trace, dom)


def _forest_from_states(states) -> RootedForest:
    parent = {v: st.parent for v, st in states.items()}
    root_of = {v: st.my_root for v, st in states.items()}
    members: Dict[int, set] = {}
    for v, r in root_of.items():
        members.setdefault(r, set()).add(v)
    return RootedForest(parent, root_of, members)


def run_distributed(g: Graph, k: int, policy: str = "guarded",
                    pulse_cap: Optional[int] = None,
                    trace_sink: Optional[Callable[[dict], None]] = None,
                    shuffle_seed: Optional[int] = None,
                    snapshot_pulses: Optional[List[int]] = None,
                    ) -> DistributedResult:
    """Execute the full protocol on the lockstep kernel and extract the
    forest, output set, and metrics from the final node states."""
    check_run_params(g, k)
    if not g.is_connected():
        raise ProtocolError("input graph must be connected")
    protocol = PartitionProtocol(g, k, policy)
    cap = pulse_cap if pulse_cap is not None else protocol.schedule.total + 16
    snap_map = None
    if snapshot_pulses:
        def roots_snapshot(states):
            return {v: st.my_root for v, st in states.items()}
        snap_map = {p: roots_snapshot for p in snapshot_pulses}
    states, metrics = kernel_run(g, protocol, cap, trace_sink=trace_sink,
                                 shuffle_seed=shuffle_seed,
                                 snapshot_pulses=snap_map)
    forest = _forest_from_states(states)
    dom = frozenset(v for v, st in states.items() if st.in_dom)
    per_tree = {v: st.s2_choice for v, st in states.items()
                if st.parent is None and st.s2_choice is not None}
    return DistributedResult(forest, dom, per_tree, metrics,
                             snapshots=dict(metrics.snapshots))


def run_compare(g: Graph, k: int, policy: str = "guarded"
                ) -> Tuple[bool, str, CentralResult, DistributedResult]:
    """Run both executors on the same instance and compare forests and sets."""
    central = run_central(g, k, policy)
    dist = run_distributed(g, k, policy)
    ok, msg = compare_runs(central.outputs(), dist.outputs())
    return ok, msg, central, dist


def phase_boundary_pulses(g: Graph, k: int) -> Dict[int, int]:
    """Pulse of each phase's final window end minus one (forest settled)."""
    sched = Schedule(k, max(g.nodes))
    out = {}
    for i in range(sched.phases):
        last = max(w.end for w in sched.windows if w.phase == i)
        out[i] = last - 1
    return out
