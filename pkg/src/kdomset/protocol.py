"""Per-node state machine executing the two-stage construction over the
lockstep kernel.

Trees coordinate through their roots. Each phase step runs inside a fixed
pulse window derived from the phase's height bound, so barriers are purely
time-based; root-to-root traffic travels on tree edges and crosses exactly
one recorded host edge per message. Routed envelopes are stamped with their
send window and receivers assert the stamp, so an undersized window
surfaces as a hard error instead of silent divergence.

Window plan per phase i (B = 2^(i+1)):

  h-probe    height probe down, acks up, root decides active/inactive
  h-status   verdict broadcast (budget-limited; deep members infer inactive
             from silence)
  probe      all nodes exchange (root, active) on every host edge, then
             active trees convergecast their best foreign candidates
  notify     each root tells its chosen active downstream about the new
             meta edge (builds upstream sets and return routes)
  2a-exec    actives pointing at oversized trees re-root and attach
  2b-zstat   every chain member reports upstream-emptiness downstream
  2b-cmd     keep the least upstream, order merges/eliminations for the rest
  2b-exec    ordered merges run
  2c-claim / 2c-reply / 2c-exec / 2c-rescue    local-minima absorption
  2d-*                                         local-maxima absorption
  2e{j}-pstar / gone / exec / rescue, then minima and maxima reruns
             (claim/reply/exec/rescue each), for a fixed round count J

followed by one stage-2 block: depth broadcast, class-count convergecast
with the per-class coverage fold, selection broadcast, done barrier.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Set, Tuple

from .chains import log_star, node_pivot
from .graph import Graph
from .partition import num_phases
from .simkernel import Send, StepResult


class ProtocolError(RuntimeError):
    """Internal protocol invariant broken (budget, routing, or state bug)."""


# ---------------------------------------------------------------------------
# Schedule
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Window:
    phase: int
    step: str
    start: int
    end: int


class Schedule:
    """Fixed global window plan shared by every node.

    Lengths scale with the phase height bound 2^(i+1); exec windows carry a
    larger multiple because a re-root wave is followed by a flood over the
    merged tree. The stage-2 block scales with the final height bound.
    """

    def __init__(self, k: int, max_id: int):
        self.k = k
        self.phases = num_phases(k)
        self.rounds_2e = log_star(max_id + 1) + 3
        windows: List[Window] = []
        t = 0

        def add(phase: int, step: str, length: int) -> None:
            nonlocal t
            windows.append(Window(phase, step, t, t + length))
            t += length

        for i in range(self.phases):
            b = 2 ** (i + 1)
            routed = 2 * b + 6
            execu = 8 * b + 12
            add(i, "h-probe", 2 * b + 6)
            add(i, "h-status", b + 4)
            add(i, "probe", b + 8)
            add(i, "notify", routed)
            add(i, "2a-exec", execu)
            add(i, "2b-zstat", routed)
            add(i, "2b-cmd", routed)
            add(i, "2b-exec", execu)
            for step in ("2c", "2d"):
                add(i, f"{step}-claim", routed)
                add(i, f"{step}-reply", routed)
                add(i, f"{step}-exec", execu)
                add(i, f"{step}-rescue", execu)
            for j in range(self.rounds_2e):
                add(i, f"2e{j}-pstar", routed)
                add(i, f"2e{j}-gone", routed)
                add(i, f"2e{j}-exec", execu)
                add(i, f"2e{j}-rescue", execu)
                for sub in ("mn", "mx"):
                    add(i, f"2e{j}-{sub}-claim", routed)
                    add(i, f"2e{j}-{sub}-reply", routed)
                    add(i, f"2e{j}-{sub}-exec", execu)
                    add(i, f"2e{j}-{sub}-rescue", execu)
        stage2_span = 40 * 2 ** self.phases + 40
        add(self.phases, "s2-depth", stage2_span)
        add(self.phases, "s2-count", stage2_span + k + 4)
        add(self.phases, "s2-select", stage2_span)
        add(self.phases, "s2-done", 2)
        self.windows = windows
        self.total = t
        self._starts = [w.start for w in windows]
        self._index = {(w.phase, w.step): n for n, w in enumerate(windows)}

    def window_at(self, pulse: int) -> Tuple[int, Window]:
        n = bisect_right(self._starts, pulse) - 1
        if n < 0 or pulse >= self.windows[n].end:
            raise ProtocolError(f"pulse {pulse} outside the schedule")
        return n, self.windows[n]

    def label(self, pulse: int) -> Tuple[Any, str]:
        try:
            _, w = self.window_at(pulse)
        except ProtocolError:
            return (-1, "-")
        return (w.phase, w.step)

    def start(self, phase: int, step: str) -> int:
        return self.windows[self._index[(phase, step)]].start

    def end(self, phase: int, step: str) -> int:
        return self.windows[self._index[(phase, step)]].end

    def index(self, phase: int, step: str) -> int:
        return self._index[(phase, step)]


# ---------------------------------------------------------------------------
# Node state
# ---------------------------------------------------------------------------

@dataclass
class UpstreamRec:
    label: int
    z_nonempty: Optional[bool] = None
    pivot: Optional[int] = None


@dataclass
class Ledger:
    """Root-side record for one phase. The meta id is the node's own id."""

    active: Optional[bool] = None
    acks_pending: int = 0
    isolated: bool = False
    early_spanning: bool = False
    chosen: Optional[int] = None       # my 1c pick; never re-pointed
    chosen_cat: Optional[str] = None
    out: Optional[int] = None          # current downstream (chosen or gone)
    out_active: Optional[bool] = None
    out_label: Optional[int] = None
    out_pivot: Optional[int] = None
    ups: Dict[int, UpstreamRec] = field(default_factory=dict)
    label: int = -1
    pivot: Optional[int] = None
    claims_in: List[Tuple[int, int]] = field(default_factory=list)
    grants: int = 0
    pending_merge: Optional[Tuple[int, int, Tuple]] = None  # target, new root, route mode
    gone: Dict[int, Tuple[int, bool]] = field(default_factory=dict)


@dataclass
class NodeState:
    me: int
    nbrs: Tuple[int, ...]
    parent: Optional[int] = None
    children: Set[int] = field(default_factory=set)
    my_root: int = -1
    done: bool = False
    # phase-scoped member state
    ph: int = -1
    tree_active: Optional[bool] = None
    acks_pending: int = 0
    best: Dict[str, Optional[Tuple[int, int, int]]] = field(default_factory=dict)
    supplier: Dict[str, Optional[Tuple[str, int]]] = field(default_factory=dict)
    kids_pending: Set[int] = field(default_factory=set)
    report_done: bool = False
    back_routes: Dict[int, Tuple[str, int]] = field(default_factory=dict)
    rl: Optional[Ledger] = None
    # stage 2
    cls: Optional[int] = None
    s2_kids: Set[int] = field(default_factory=set)
    s2_counts: Optional[List[int]] = None
    s2_down: Optional[List[Optional[int]]] = None
    s2_pend: Optional[List[Optional[int]]] = None
    s2_choice: Optional[Tuple[int, bool]] = None
    in_dom: bool = False
    wake_iter: int = 0


class PartitionProtocol:
    """Node behavior realizing the whole run on the lockstep kernel."""

    def __init__(self, g: Graph, k: int, policy: str = "guarded"):
        self.k = k
        self.policy = policy
        self.schedule = Schedule(k, max(g.nodes))
        self.phases = self.schedule.phases
        wakes: List[int] = []
        for i in range(self.phases):
            p = self.schedule.start(i, "probe")
            wakes.extend((p, p + 1))
        wakes.append(self.schedule.start(self.phases, "s2-count"))
        self._member_wakes = sorted(wakes)

    # -- kernel interface ---------------------------------------------------

    def init_node(self, node: int, neighbors: Tuple[int, ...]) -> NodeState:
        return NodeState(me=node, nbrs=tuple(neighbors), my_root=node)

    def label(self, pulse: int) -> Tuple[Any, str]:
        return self.schedule.label(pulse)

    def on_pulse(self, st: NodeState, pulse: int, inbox) -> StepResult:
        sends: List[Send] = []
        win_idx, win = self.schedule.window_at(pulse)
        for env in inbox:
            self._handle(st, env, win_idx, win, sends)
        self._act(st, pulse, win, sends)
        return StepResult(sends=sends, wake=self._next_wake(st, pulse, win),
                          done=st.done)

    # -- phase-scoped reset ---------------------------------------------------

    def _ensure_phase(self, st: NodeState, phase: int) -> None:
        if st.ph != phase:
            st.ph = phase
            st.tree_active = None
            st.acks_pending = 0
            st.best = {"act": None, "inact": None}
            st.supplier = {"act": None, "inact": None}
            st.kids_pending = set()
            st.report_done = False
            st.back_routes = {}
            st.rl = Ledger(label=st.me) if st.parent is None else None

    # -- routing ----------------------------------------------------------------

    def _send(self, sends, dst, kind, payload, words):
        sends.append(Send(dst, kind, payload, words))

    def _mode_for(self, rl: Ledger, target: int) -> Tuple:
        """Route orientation toward a meta neighbor: across my own chosen
        edge when I picked the target, otherwise back along its approach."""
        if rl.chosen == target:
            return ("cat", rl.chosen_cat)
        return ("back",)

    def _down_hop(self, st: NodeState, target: int, mode: Tuple) -> Tuple[str, int]:
        if mode[0] == "cat":
            rec = st.best.get(mode[1])
            sup = st.supplier.get(mode[1])
            if rec is None or rec[0] != target or sup is None:
                raise ProtocolError(f"node {st.me}: no {mode[1]} route toward {target}")
            return sup
        hop = st.back_routes.get(target)
        if hop is None:
            raise ProtocolError(f"node {st.me}: no return route toward {target}")
        return hop

    def _route(self, st, sends, win_idx, target, mode, inner) -> None:
        payload = ("down", win_idx, target, mode, st.me, inner)
        hop = self._down_hop(st, target, mode)
        self._forward_down(st, sends, hop, payload)

    def _forward_down(self, st, sends, hop, payload) -> None:
        _, win_idx, target, mode, src_meta, inner = payload
        words = 5 + len(inner)
        direction, where = hop
        if inner[0] == "reroot":
            if direction == "child":
                self._flip_toward(st, sends, where, inner[1])
                self._send(sends, where, "route", payload, words)
            else:
                self._flip_across(st, sends, where, inner[1])
                self._send(sends, where, "route",
                           ("attach", win_idx, target, mode, src_meta, inner), words)
            return
        if direction == "child":
            self._send(sends, where, "route", payload, words)
        else:
            self._send(sends, where, "route",
                       ("climb", win_idx, target, mode, src_meta, inner), words)

    def _flip_toward(self, st, sends, next_hop: int, new_root: int) -> None:
        """Reverse one parent pointer of the re-root wave and flood the
        subtrees that hang off this path node."""
        flood = sorted(st.children - {next_hop})
        old_parent = st.parent
        st.children.discard(next_hop)
        if old_parent is not None:
            st.children.add(old_parent)
        st.parent = next_hop
        st.my_root = new_root
        st.rl = None
        for c in flood:
            self._send(sends, c, "new-root", (new_root, None, None), 3)

    def _flip_across(self, st, sends, partner: int, new_root: int) -> None:
        flood = sorted(st.children)
        old_parent = st.parent
        if old_parent is not None:
            st.children.add(old_parent)
        st.parent = partner
        st.my_root = new_root
        st.rl = None
        for c in flood:
            self._send(sends, c, "new-root", (new_root, None, None), 3)

    def _start_merge_wave(self, st, sends, phase: int, step: str,
                          target: int, new_root: int, mode: Tuple) -> None:
        win_idx = self.schedule.index(phase, step)
        payload = ("down", win_idx, target, mode, st.me, ("reroot", new_root))
        hop = self._down_hop(st, target, mode)
        self._forward_down(st, sends, hop, payload)

    # -- message handling ---------------------------------------------------

    def _handle(self, st: NodeState, env, win_idx: int, win: Window, sends) -> None:
        kind = env.kind
        if kind == "height":
            self._ensure_phase(st, win.phase)
            budget = env.payload
            if not st.children:
                self._send(sends, env.src, "height-ack", None, 1)
            elif budget >= 2:
                st.acks_pending = len(st.children)
                for c in sorted(st.children):
                    self._send(sends, c, "height", budget - 1, 1)
            return
        if kind == "height-ack":
            st.acks_pending -= 1
            if st.acks_pending == 0:
                if st.parent is not None:
                    self._send(sends, st.parent, "height-ack", None, 1)
                elif st.rl is not None:
                    st.rl.acks_pending = 0
            return
        if kind == "new-root":
            root, active, hops = env.payload
            if hops is not None:  # phase status broadcast
                self._ensure_phase(st, win.phase)
                st.tree_active = active
                st.my_root = root
                if hops >= 2:
                    for c in sorted(st.children):
                        self._send(sends, c, "new-root", (root, active, hops - 1), 3)
            else:  # merge flood over a static subtree
                st.my_root = root
                st.rl = None
                for c in sorted(st.children):
                    self._send(sends, c, "new-root", (root, None, None), 3)
            return
        if kind == "probe":
            self._ensure_phase(st, win.phase)
            root, active = env.payload
            if root == st.my_root or st.tree_active is not True:
                return
            cat = "act" if active else "inact"
            cand = (root, st.me, env.src)
            if st.best[cat] is None or cand < st.best[cat]:
                st.best[cat] = cand
                st.supplier[cat] = ("cross", env.src)
            return
        if kind == "report":
            act, inact = env.payload
            for cat, cand in (("act", act), ("inact", inact)):
                if cand is None:
                    continue
                cand = tuple(cand)
                if st.best[cat] is None or cand < st.best[cat]:
                    st.best[cat] = cand
                    st.supplier[cat] = ("child", env.src)
            st.kids_pending.discard(env.src)
            if not st.kids_pending and not st.report_done:
                st.report_done = True
                if st.parent is not None:
                    self._send(sends, st.parent, "report",
                               (st.best["act"], st.best["inact"]), 6)
            return
        if kind == "route":
            self._handle_route(st, env, win_idx, sends)
            return
        if kind == "depth":
            st.cls = env.payload
            nxt = (env.payload + 1) % (self.k + 1)
            for c in sorted(st.children):
                self._send(sends, c, "depth", nxt, 1)
            return
        if kind == "counts":
            self._collect_counts(st, env, sends)
            return
        if kind == "select":
            ell, augmented = env.payload
            st.in_dom = st.cls == ell
            for c in sorted(st.children):
                self._send(sends, c, "select", (ell, augmented), 2)
            st.done = True
            return
        raise ProtocolError(f"unknown message kind {kind!r}")

    def _handle_route(self, st: NodeState, env, win_idx: int, sends) -> None:
        stage, sent_win, target, mode, src_meta, inner = env.payload
        if sent_win != win_idx:
            w = self.schedule.windows[win_idx]
            raise ProtocolError(
                f"node {st.me}: window overrun, {inner[0]} message from window "
                f"{sent_win} arrived in window {win_idx} ({w.step})")
        if stage == "down":
            hop = self._down_hop(st, target, mode)
            self._forward_down(st, sends, hop, env.payload)
            return
        if stage == "attach":
            st.children.add(env.src)
            return
        if stage == "climb":
            arrived_across = env.src != st.parent and env.src not in st.children
            st.back_routes[src_meta] = (
                ("cross", env.src) if arrived_across else ("child", env.src))
            if st.parent is not None:
                self._send(sends, st.parent, "route",
                           ("climb", sent_win, target, mode, src_meta, inner),
                           5 + len(inner))
            else:
                self._deliver(st, src_meta, inner)
            return
        raise ProtocolError(f"bad route stage {stage!r}")

    def _deliver(self, st: NodeState, src_meta: int, inner) -> None:
        rl = st.rl
        if rl is None:
            raise ProtocolError(f"routed delivery at non-root {st.me}")
        ikind = inner[0]
        if ikind == "notify":
            rl.ups[src_meta] = UpstreamRec(label=src_meta)
        elif ikind == "zstat":
            if src_meta not in rl.ups:
                raise ProtocolError(f"zstat from unknown upstream {src_meta}")
            rl.ups[src_meta].z_nonempty = inner[1]
        elif ikind == "merge-cmd":
            if rl.out != src_meta:
                raise ProtocolError(f"merge-cmd from non-downstream {src_meta}")
            rl.pending_merge = (src_meta, src_meta, self._mode_for(rl, src_meta))
            rl.out = None
        elif ikind == "elim":
            if rl.out != src_meta:
                raise ProtocolError(f"elim from non-downstream {src_meta}")
            rl.out = None
        elif ikind == "claim":
            rl.claims_in.append((inner[1], src_meta))
        elif ikind == "grant":
            self._drop_neighbor(rl, src_meta)
            rl.grants += 1
        elif ikind in ("deny", "gone"):
            was_down = rl.out == src_meta
            self._drop_neighbor(rl, src_meta)
            rl.gone[src_meta] = (inner[1], was_down)
        elif ikind == "pstar":
            if rl.out == src_meta:
                rl.out_pivot = inner[1]
            if src_meta in rl.ups:
                rl.ups[src_meta].pivot = inner[1]
        else:
            raise ProtocolError(f"unknown routed payload {ikind!r}")

    @staticmethod
    def _drop_neighbor(rl: Ledger, meta: int) -> None:
        if rl.out == meta:
            rl.out = None
        rl.ups.pop(meta, None)

    # -- scheduled actions ----------------------------------------------------

    def _act(self, st: NodeState, pulse: int, win: Window, sends) -> None:
        if win.phase == self.phases:
            self._act_stage2(st, pulse, win, sends)
            return
        step = win.step
        if step == "probe":
            self._act_probe(st, pulse, win, sends)
            return
        if pulse != win.start:
            return
        self._ensure_phase(st, win.phase)
        rl = st.rl
        if rl is None:
            return

        if step == "h-probe":
            rl.label = st.me
            if st.children:
                rl.acks_pending = len(st.children)
                st.acks_pending = len(st.children)
                for c in sorted(st.children):
                    self._send(sends, c, "height", 2 ** (win.phase + 1) - 1, 1)
            else:
                rl.acks_pending = 0
            return
        if step == "h-status":
            rl.active = (rl.acks_pending == 0) if st.children else True
            st.tree_active = rl.active
            hops = 2 ** (win.phase + 1) - 1
            for c in sorted(st.children):
                self._send(sends, c, "new-root", (st.me, rl.active, hops), 3)
            return
        if step == "notify":
            self._act_notify(st, win, sends)
            return
        if step == "2a-exec":
            if rl.active is True and rl.out is not None and rl.out_active is False:
                if rl.ups:
                    raise ProtocolError(
                        f"root {st.me} points at an oversized tree yet has upstreams")
                self._start_merge_wave(st, sends, win.phase, step, rl.out, rl.out,
                                       self._mode_for(rl, rl.out))
            return
        if step.endswith("-exec"):
            if rl.pending_merge is not None:
                target, new_root, mode = rl.pending_merge
                self._start_merge_wave(st, sends, win.phase, step, target,
                                       new_root, mode)
                return
            if rl.grants > 0:
                if rl.out is not None or rl.ups:
                    raise ProtocolError(f"winner {st.me} still holds chain edges")
                rl.grants = 0
                rl.isolated = True
            return
        if step.endswith("-rescue"):
            self._act_rescue(st, win, sends)
            return

        if not self._in_x(st):
            return
        if step == "2b-zstat":
            if rl.out is not None:
                self._route(st, sends, self.schedule.index(win.phase, step),
                            rl.out, self._mode_for(rl, rl.out),
                            ("zstat", bool(rl.ups)))
            return
        if step == "2b-cmd":
            if rl.ups:
                keep = min(rl.ups)
                win_idx = self.schedule.index(win.phase, step)
                for y in sorted(rl.ups):
                    if y == keep:
                        continue
                    rec = rl.ups.pop(y)
                    inner = ("elim",) if rec.z_nonempty else ("merge-cmd",)
                    self._route(st, sends, win_idx, y, ("back",), inner)
            return
        if step.endswith("-claim"):
            self._act_claim(st, win, sends)
            return
        if step.endswith("-reply"):
            self._act_reply(st, win, sends)
            return
        if step.endswith("-pstar"):
            self._act_pstar(st, win, sends)
            return
        if step.endswith("-gone"):
            self._act_gone(st, win, sends)
            return

    def _act_probe(self, st: NodeState, pulse: int, win: Window, sends) -> None:
        if pulse == win.start:
            self._ensure_phase(st, win.phase)
            flag = st.tree_active is True
            for nb in st.nbrs:
                self._send(sends, nb, "probe", (st.my_root, flag), 2)
            st.kids_pending = set(st.children)
            return
        if pulse == win.start + 1 and st.tree_active is True \
                and not st.children and not st.report_done:
            st.report_done = True
            if st.parent is not None:
                self._send(sends, st.parent, "report",
                           (st.best["act"], st.best["inact"]), 6)

    def _act_notify(self, st: NodeState, win: Window, sends) -> None:
        rl = st.rl
        if rl.active is not True:
            return
        if st.best["act"] is not None:
            rl.chosen, _, _ = st.best["act"]
            rl.chosen_cat = "act"
            rl.out_active = True
        elif st.best["inact"] is not None:
            rl.chosen, _, _ = st.best["inact"]
            rl.chosen_cat = "inact"
            rl.out_active = False
        else:
            rl.early_spanning = True
            rl.isolated = True
            return
        rl.out = rl.chosen
        rl.out_label = rl.chosen
        if rl.out_active:
            self._route(st, sends, self.schedule.index(win.phase, win.step),
                        rl.out, ("cat", rl.chosen_cat), ("notify",))

    def _in_x(self, st: NodeState) -> bool:
        rl = st.rl
        return (rl is not None and rl.active is True and not rl.isolated
                and (rl.out is not None or bool(rl.ups)))

    def _uses_pivots(self, step: str) -> bool:
        return "-mn-" in step or "-mx-" in step

    def _claim_is_min(self, step: str) -> bool:
        if "-mn-" in step:
            return True
        if "-mx-" in step:
            return False
        return step.startswith("2c")

    def _neighbor_values(self, rl: Ledger, pivots: bool) -> Dict[int, int]:
        vals: Dict[int, int] = {}
        if rl.out is not None:
            vals[rl.out] = rl.out_pivot if pivots else rl.out_label
        for y, rec in rl.ups.items():
            vals[y] = rec.pivot if pivots else rec.label
        return vals

    def _act_claim(self, st: NodeState, win: Window, sends) -> None:
        rl = st.rl
        minima = self._claim_is_min(win.step)
        pivots = self._uses_pivots(win.step)
        mine = rl.pivot if pivots else rl.label
        vals = self._neighbor_values(rl, pivots)
        if not vals:
            return
        if any(v == mine for v in vals.values()):
            raise ProtocolError(f"root {st.me}: equal labels across a chain edge")
        if not all((mine < v) == minima for v in vals.values()):
            return
        win_idx = self.schedule.index(win.phase, win.step)
        for y in sorted(vals):
            self._route(st, sends, win_idx, y, self._mode_for(rl, y), ("claim", mine))

    def _act_reply(self, st: NodeState, win: Window, sends) -> None:
        rl = st.rl
        if not rl.claims_in:
            return
        if self._claim_is_min(win.step):
            winner = min(rl.claims_in, key=lambda c: (c[0], c[1]))[1]
        else:
            winner = min(rl.claims_in, key=lambda c: (-c[0], c[1]))[1]
        claimants = {src for _, src in rl.claims_in}
        rl.claims_in = []
        others = set(self._neighbor_values(rl, False)) - claimants
        win_idx = self.schedule.index(win.phase, win.step)
        for src in sorted(claimants):
            if src == winner:
                self._route(st, sends, win_idx, src, self._mode_for(rl, src),
                            ("grant",))
            else:
                self._route(st, sends, win_idx, src, self._mode_for(rl, src),
                            ("deny", winner))
        for t in sorted(others):
            self._route(st, sends, win_idx, t, self._mode_for(rl, t),
                        ("gone", winner))
        rl.pending_merge = (winner, winner, self._mode_for(rl, winner))
        rl.out = None
        rl.ups.clear()

    def _act_rescue(self, st: NodeState, win: Window, sends) -> None:
        rl = st.rl
        if rl is None or rl.active is not True or rl.isolated \
                or rl.out is not None or rl.ups:
            if rl is not None:
                rl.gone.clear()
            return
        if not rl.gone:
            return
        chosen = None
        for g in sorted(rl.gone):
            absorber, was_down = rl.gone[g]
            if was_down:
                chosen = (g, absorber)
                break
        if chosen is None:
            g = sorted(rl.gone)[0]
            chosen = (g, rl.gone[g][0])
        g, absorber = chosen
        rl.gone.clear()
        self._start_merge_wave(st, sends, win.phase, win.step, g, absorber,
                               self._mode_for(rl, g))

    def _act_pstar(self, st: NodeState, win: Window, sends) -> None:
        rl = st.rl
        if rl.pivot is not None:  # labels advance to the previous round's pivots
            rl.label = rl.pivot
            if rl.out is not None:
                rl.out_label = rl.out_pivot
            for rec in rl.ups.values():
                rec.label = rec.pivot
        rl.pivot = None
        rl.out_pivot = None
        for rec in rl.ups.values():
            rec.pivot = None
        up_label = next((rec.label for rec in rl.ups.values()), None)
        down_label = rl.out_label if rl.out is not None else None
        rl.pivot = node_pivot(rl.label, up_label, down_label).pivot
        win_idx = self.schedule.index(win.phase, win.step)
        for y in sorted(self._neighbor_values(rl, False)):
            self._route(st, sends, win_idx, y, self._mode_for(rl, y),
                        ("pstar", rl.pivot))

    def _act_gone(self, st: NodeState, win: Window, sends) -> None:
        rl = st.rl
        win_idx = self.schedule.index(win.phase, win.step)
        up_meta = next(iter(rl.ups), None)
        up_pivot = rl.ups[up_meta].pivot if up_meta is not None else None
        down_match = rl.out is not None and rl.out_pivot == rl.pivot
        up_match = up_meta is not None and up_pivot == rl.pivot
        if down_match and up_match:
            raise ProtocolError(f"root {st.me}: two consecutive pivot matches")
        if down_match:
            rl.pending_merge = (rl.out, rl.out, self._mode_for(rl, rl.out))
            if up_meta is not None:
                self._route(st, sends, win_idx, up_meta,
                            self._mode_for(rl, up_meta), ("gone", rl.out))
                rl.ups.pop(up_meta)
            rl.out = None
            return
        if up_match:
            # my upstream combines into me; the merged node goes quiet, so my
            # own downstream edge dissolves with a notice
            rl.ups.pop(up_meta)
            if rl.out is not None:
                self._route(st, sends, win_idx, rl.out,
                            self._mode_for(rl, rl.out), ("gone", st.me))
                rl.out = None
            rl.isolated = True

    # -- stage 2 ----------------------------------------------------------------

    def _act_stage2(self, st: NodeState, pulse: int, win: Window, sends) -> None:
        if pulse != win.start:
            return
        step = win.step
        if step == "s2-depth":
            if st.parent is None:
                st.cls = 0
                for c in sorted(st.children):
                    self._send(sends, c, "depth", 1 % (self.k + 1), 1)
            return
        if step == "s2-count":
            kk = self.k + 1
            if st.cls is None:
                raise ProtocolError(f"node {st.me} missed the depth broadcast")
            st.s2_counts = [0] * kk
            st.s2_counts[st.cls] += 1
            st.s2_down = [0 if st.cls == c else None for c in range(kk)]
            st.s2_pend = [None if st.cls == c else 0 for c in range(kk)]
            st.s2_kids = set(st.children)
            if not st.s2_kids:
                self._fold_and_forward_counts(st, sends)
            return
        if step == "s2-select":
            if st.parent is None:
                choice = self._select_choice(st)
                st.s2_choice = choice
                st.in_dom = (st.cls == choice[0]) or choice[1]
                for c in sorted(st.children):
                    self._send(sends, c, "select", choice, 2)
            return
        if step == "s2-done":
            if st.parent is None:
                st.done = True

    def _collect_counts(self, st: NodeState, env, sends) -> None:
        counts, down, pend = env.payload
        for c in range(self.k + 1):
            st.s2_counts[c] += counts[c]
        if self.policy == "guarded":
            for c in range(self.k + 1):
                if down[c] is not None and down[c] + 1 <= self.k:
                    if st.s2_down[c] is None or down[c] + 1 < st.s2_down[c]:
                        st.s2_down[c] = down[c] + 1
                if pend[c] is not None:
                    lifted = pend[c] + 1
                    if st.s2_pend[c] is None or lifted > st.s2_pend[c]:
                        st.s2_pend[c] = lifted
        st.s2_kids.discard(env.src)
        if not st.s2_kids:
            self._fold_and_forward_counts(st, sends)

    def _fold_and_forward_counts(self, st: NodeState, sends) -> None:
        if self.policy == "guarded":
            for c in range(self.k + 1):
                if st.s2_down[c] is not None and st.s2_pend[c] is not None \
                        and st.s2_down[c] + st.s2_pend[c] <= self.k:
                    st.s2_pend[c] = None  # coverage met through this node
        if st.parent is not None:
            if self.policy == "literal":
                payload = (tuple(st.s2_counts), None, None)
                words = self.k + 2
            else:
                payload = (tuple(st.s2_counts), tuple(st.s2_down), tuple(st.s2_pend))
                words = 3 * (self.k + 1) + 2
            self._send(sends, st.parent, "counts", payload, words)

    def _select_choice(self, st: NodeState) -> Tuple[int, bool]:
        kk = self.k + 1
        if self.policy == "literal":
            ell = min(range(kk), key=lambda c: (st.s2_counts[c], c))
            return (ell, False)
        options = []
        for c in range(kk):
            if st.s2_pend[c] is None:
                options.append((st.s2_counts[c], c, False))
            if c >= 1:
                pend = st.s2_pend[c]
                if pend is None or pend <= self.k:  # root forced in: down 0
                    options.append((st.s2_counts[c] + 1, c, True))
        if not options:
            raise ProtocolError(f"root {st.me}: no dominating class candidate")
        size, ell, augmented = min(options)
        return (ell, augmented)

    # -- wake planning ------------------------------------------------------------

    def _next_wake(self, st: NodeState, pulse: int, win: Window) -> Optional[int]:
        while st.wake_iter < len(self._member_wakes) and \
                self._member_wakes[st.wake_iter] <= pulse:
            st.wake_iter += 1
        nxt = self._member_wakes[st.wake_iter] \
            if st.wake_iter < len(self._member_wakes) else None
        if st.parent is None and not st.done:
            rn = self._next_root_wake(st, pulse, win)
            if rn is not None and (nxt is None or rn < nxt):
                nxt = rn
        return nxt

    def _next_root_wake(self, st: NodeState, pulse: int, win: Window) -> Optional[int]:
        rl = st.rl
        if win.phase < self.phases and rl is not None and (
                rl.isolated or rl.early_spanning or rl.active is False):
            if win.phase + 1 < self.phases:
                return self.schedule.start(win.phase + 1, "h-probe")
            return self.schedule.start(self.phases, "s2-depth")
        idx, _ = self.schedule.window_at(pulse)
        if idx + 1 < len(self.schedule.windows):
            return self.schedule.windows[idx + 1].start
        return None
