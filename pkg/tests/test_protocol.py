import pytest

from kdomset.graph import Graph, generate
from kdomset.protocol import PartitionProtocol, ProtocolError, Schedule
from kdomset.runner import (phase_boundary_pulses, run_central, run_compare,
                            run_distributed)
from kdomset.simkernel import run as kernel_run
from kdomset.verify import verify_domination


class PlantedProtocol(PartitionProtocol):
    """Protocol variant that starts from a prebuilt forest instead of
    singletons, for exercising later-phase behavior directly."""

    def __init__(self, g, k, parent, policy="guarded"):
        super().__init__(g, k, policy)
        self._parent = parent
        children = {}
        for v, p in parent.items():
            if p is not None:
                children.setdefault(p, set()).add(v)
        self._children = children
        roots = {v for v, p in parent.items() if p is None}
        self._root_of = {}
        for v in parent:
            r = v
            while parent[r] is not None:
                r = parent[r]
            self._root_of[v] = r

    def init_node(self, node, neighbors):
        st = super().init_node(node, neighbors)
        st.parent = self._parent[node]
        st.children = set(self._children.get(node, ()))
        st.my_root = self._root_of[node]
        return st


def tree_status_snapshot(states):
    return {v: (st.my_root, st.tree_active) for v, st in states.items()}


class TestHeightCheck:
    def run_and_snapshot(self, g, k, parent, pulse):
        proto = PlantedProtocol(g, k, parent)
        states, metrics = kernel_run(
            g, proto, proto.schedule.total + 16,
            snapshot_pulses={pulse: tree_status_snapshot})
        return metrics.snapshots[pulse], proto

    def test_singleton_is_active_immediately(self):
        g = generate("path", n=2)
        proto = PartitionProtocol(g, 1)
        pulse = proto.schedule.end(0, "h-status") - 1
        states, metrics = kernel_run(
            g, proto, proto.schedule.total + 16,
            snapshot_pulses={pulse: tree_status_snapshot})
        snap = metrics.snapshots[pulse]
        assert snap[0][1] is True and snap[1][1] is True

    def test_height_two_chain_is_inactive_at_phase_zero(self):
        g = generate("path", n=3)
        parent = {0: None, 1: 0, 2: 1}
        proto = PlantedProtocol(g, 1, parent)
        pulse = proto.schedule.end(0, "h-status") - 1
        states, metrics = kernel_run(
            g, proto, proto.schedule.total + 16,
            snapshot_pulses={pulse: tree_status_snapshot})
        snap = metrics.snapshots[pulse]
        assert snap[0][1] is False  # broadcast budget 1 dies before the leaf

    def test_height_one_tree_is_active_at_phase_zero(self):
        g = generate("path", n=3)
        parent = {0: None, 1: 0, 2: None}
        proto = PlantedProtocol(g, 1, parent)
        pulse = proto.schedule.end(0, "h-status") - 1
        states, metrics = kernel_run(
            g, proto, proto.schedule.total + 16,
            snapshot_pulses={pulse: tree_status_snapshot})
        snap = metrics.snapshots[pulse]
        assert snap[0][1] is True


class TestNeighborProbe:
    def test_path4_probe_selects_least_id(self):
        g = generate("path", n=4)
        central = run_central(g, 1)
        steps = {s.step: s for s in central.trace.phases[0].steps}
        dist = run_distributed(g, 1)
        ok = dist.forest.root_of == central.forest.root_of
        assert ok
        assert steps["1c"].edges == [(0, 1), (1, 0), (2, 1), (3, 2)]

    def test_spanning_tree_probes_find_nothing(self):
        # one planted spanning tree: no foreign roots, run completes cleanly
        g = generate("star", n=5)
        parent = {0: None, 1: 0, 2: 0, 3: 0, 4: 0}
        proto = PlantedProtocol(g, 1, parent)
        states, _ = kernel_run(g, proto, proto.schedule.total + 16)
        assert all(st.my_root == 0 for st in states.values())
        assert frozenset(v for v, st in states.items() if st.in_dom) == {0}


class TestRootRoute:
    def test_four_hop_route_between_planted_trees(self):
        # tree A: 0<-1<-2 (endpoint at depth 2); tree B: 3<-4, 4<-5
        # (crossing endpoint at depth 1); host edge (2, 4) joins them
        g = Graph([(0, 1), (1, 2), (3, 4), (4, 5), (2, 4)])
        parent = {0: None, 1: 0, 2: 1, 3: None, 4: 3, 5: 4}
        proto = PlantedProtocol(g, 5, parent)
        sched = proto.schedule
        lo = sched.start(1, "notify")
        hi = sched.end(1, "notify")
        traced = []
        states, _ = kernel_run(g, proto, sched.total + 16, trace_sink=traced.append)
        notify_hops = []
        for rec in traced:
            if lo <= rec["pulse"] < hi:
                notify_hops.extend(
                    (s["from"], s["to"]) for s in rec["sends"] if s["kind"] == "route")
        # two notifies (0 -> 3 and 3 -> 0), each over four hops
        assert len(notify_hops) == 8
        assert (2, 4) in notify_hops and (4, 2) in notify_hops
        # payload survives to the destination: upstream sets were built,
        # which the ensuing merge proves
        roots = {st.my_root for st in states.values()}
        assert roots == {0}

    def test_missing_route_is_an_error(self):
        g = generate("path", n=3)
        proto = PartitionProtocol(g, 1)
        st = proto.init_node(0, g.neighbors(0))
        proto._ensure_phase(st, 0)
        with pytest.raises(ProtocolError):
            proto._down_hop(st, 99, ("back",))


class TestMergeWave:
    def test_path4_final_roots(self):
        g = generate("path", n=4)
        dist = run_distributed(g, 1)
        assert dist.forest.root_of == {0: 0, 1: 0, 2: 2, 3: 2}

    def test_multi_absorb_into_one_target(self):
        g = generate("star", n=6)
        dist = run_distributed(g, 1)
        assert set(dist.forest.root_of.values()) == {0}

    def test_flood_edges_are_tree_edges_of_the_final_forest(self):
        g = generate("gnm-connected", n=40, m=70, seed=4)
        floods = []
        def sink(rec):
            floods.extend((s["from"], s["to"]) for s in rec["sends"]
                          if s["kind"] == "new-root")
        dist = run_distributed(g, 3, trace_sink=sink)
        f = dist.forest
        tree_edges = {(v, p) for v, p in f.parent.items() if p is not None}
        tree_edges |= {(p, v) for v, p in tree_edges}
        for a, b in floods:
            assert f.root_of[a] == f.root_of[b]
            assert (a, b) in tree_edges


class TestRunDistributed:
    def test_path4_k1_matches_central(self):
        g = generate("path", n=4)
        ok, msg, central, dist = run_compare(g, 1)
        assert ok, msg
        assert dist.dominating == frozenset({0, 2})

    def test_random_graph_matches_central(self):
        g = generate("gnm-connected", n=50, m=80, seed=7)
        ok, msg, central, dist = run_compare(g, 3)
        assert ok, msg
        assert verify_domination(g, dist.dominating, 3)[0]

    def test_phase_boundary_lockstep_equality(self):
        g = generate("gnm-connected", n=48, m=80, seed=11)
        k = 7
        bounds = phase_boundary_pulses(g, k)
        central = run_central(g, k)
        dist = run_distributed(g, k, snapshot_pulses=list(bounds.values()))
        for rec in central.trace.phases:
            assert dist.snapshots[bounds[rec.phase]] == rec.root_of_after

    def test_shuffled_evaluation_identical(self):
        g = generate("gnm-connected", n=30, m=50, seed=2)
        base = run_distributed(g, 3)
        for seed in (1, 9):
            other = run_distributed(g, 3, shuffle_seed=seed)
            assert other.dominating == base.dominating
            assert other.forest.root_of == base.forest.root_of
            assert other.metrics.to_dict() == base.metrics.to_dict()

    def test_repeat_runs_identical_metrics(self):
        g = generate("cycle", n=30)
        a = run_distributed(g, 3)
        b = run_distributed(g, 3)
        assert a.metrics.to_dict() == b.metrics.to_dict()

    def test_probe_step_message_budget(self):
        g = generate("gnm-connected", n=60, m=110, seed=5)
        dist = run_distributed(g, 7)
        per = dist.metrics.per_phase
        for (phase, step), slot in per.items():
            if step == "probe":
                # one probe per directed host edge plus one report per node
                assert slot["messages"] <= 2 * g.m + g.n

    def test_absorb_steps_linear_messages(self):
        g = generate("gnm-connected", n=80, m=140, seed=6)
        dist = run_distributed(g, 7)
        per = dist.metrics.per_phase
        for (phase, step), slot in per.items():
            if step in ("2a-exec", "2b-zstat", "2b-cmd", "2b-exec"):
                assert slot["messages"] <= 6 * g.n

    def test_words_not_less_than_messages(self):
        g = generate("grid", rows=6, cols=7)
        dist = run_distributed(g, 3)
        assert dist.metrics.words >= dist.metrics.messages


class TestEdgeCases:
    def test_two_node_graph(self):
        g = generate("path", n=2)
        ok, msg, central, dist = run_compare(g, 1)
        assert ok and dist.dominating == frozenset({0})

    def test_branching_one_tree_is_a_path(self):
        g = generate("balanced-tree", branching=1, height=3)
        ok, msg, _, dist = run_compare(g, 3)
        assert ok and len(dist.dominating) == 1

    @pytest.mark.parametrize("n,k", [(3, 2), (4, 3), (5, 4), (9, 8)])
    def test_k_equals_n_minus_one(self, n, k):
        g = generate("cycle", n=n)
        ok, msg, central, dist = run_compare(g, k)
        assert ok, msg
        assert len(dist.forest.members) == 1
        assert verify_domination(g, dist.dominating, k)[0]


from hypothesis import given, settings, strategies as st


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 100_000), k=st.sampled_from([1, 2, 3, 5, 7]),
       policy=st.sampled_from(["guarded", "literal"]))
def test_fuzz_executors_agree(seed, k, policy):
    import random as _r
    rng = _r.Random(seed)
    n = rng.randint(k + 1, 36)
    m = min(n * (n - 1) // 2, n - 1 + rng.randint(0, 2 * n))
    g = generate("gnm-connected", n=n, m=m, seed=seed)
    ok, msg, central, dist = run_compare(g, k, policy)
    assert ok, f"n={n} m={m} k={k} {policy}: {msg}"


class TestSchedule:
    def test_windows_cover_the_run_contiguously(self):
        sched = Schedule(7, 100)
        t = 0
        for w in sched.windows:
            assert w.start == t
            t = w.end
        assert sched.total == t

    def test_label_maps_pulses_to_steps(self):
        sched = Schedule(1, 10)
        assert sched.label(0) == (0, "h-probe")
        last = sched.windows[-1]
        assert sched.label(last.start) == (sched.phases, "s2-done")

    def test_time_grows_linearly_in_k(self):
        small = Schedule(1, 1000).total
        big = Schedule(15, 1000).total
        assert big < small * 40

    def test_stage2_span_linear_in_k(self):
        for k in (1, 3, 7, 15):
            sched = Schedule(k, 1000)
            span = sum(w.end - w.start for w in sched.windows
                       if w.phase == sched.phases)
            assert span <= 300 * (k + 1)
