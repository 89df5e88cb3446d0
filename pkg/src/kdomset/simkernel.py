"""Deterministic lockstep message-passing engine.

Nodes are driven in synchronous pulses: everything sent at pulse t is
delivered at pulse t+1, ordered by sender id (stable for repeats). A node's
transition reads only its own state and inbox, so evaluation order within a
pulse cannot matter; a shuffle mode exists to demonstrate exactly that.

For efficiency the kernel only evaluates nodes that received messages or
asked to be woken at the current pulse (every node is evaluated at pulse 0).
A node that needs to act spontaneously at a later pulse must arm a wake-up;
skipped nodes are observationally identical to nodes fed an empty inbox.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Optional, Tuple

from .graph import Graph


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class Envelope:
    src: int
    dst: int
    pulse: int          # pulse at which the message was sent
    kind: str
    payload: Any
    size_words: int = 1


@dataclass(frozen=True)
class Send:
    dst: int
    kind: str
    payload: Any = None
    size_words: int = 1


@dataclass
class StepResult:
    sends: List[Send] = field(default_factory=list)
    wake: Optional[int] = None
    done: bool = False


class RunMetrics:
    """Pulse, message, and payload-word counters with a per-(phase, step)
    breakdown keyed by the protocol's label for the sending pulse."""

    def __init__(self):
        self.pulses = 0
        self.messages = 0
        self.words = 0
        self.per_phase: Dict[Tuple[Any, str], Dict[str, int]] = {}
        self.snapshots: Dict[int, Any] = {}

    def count(self, label: Tuple[Any, str], words: int) -> None:
        self.messages += 1
        self.words += words
        slot = self.per_phase.setdefault(label, {"messages": 0, "words": 0})
        slot["messages"] += 1
        slot["words"] += words

    def to_dict(self) -> dict:
        return {
            "pulses": self.pulses,
            "messages": self.messages,
            "words": self.words,
            "per_phase": {
                f"{phase}/{step}": dict(v)
                for (phase, step), v in sorted(self.per_phase.items(), key=lambda kv: str(kv[0]))
            },
        }


def deliver_order(envelopes: Iterable[Envelope]) -> List[Envelope]:
    """Inbox ordering: stable sort by sender id."""
    return sorted(envelopes, key=lambda e: e.src)


DEFAULT_LABEL = ("-", "-")


def run(g: Graph, protocol, pulse_cap: int,
        trace_sink: Optional[Callable[[dict], None]] = None,
        shuffle_seed: Optional[int] = None,
        snapshot_pulses: Optional[Dict[int, Callable[[Dict[int, Any]], Any]]] = None,
        ) -> Tuple[Dict[int, Any], RunMetrics]:
    """Drive a protocol over the graph until every node reports done.

    ``protocol`` must provide ``init_node(node, neighbors) -> state`` and
    ``on_pulse(state, pulse, inbox) -> StepResult``; an optional
    ``label(pulse)`` names the (phase, step) a pulse belongs to for message
    accounting. ``snapshot_pulses`` maps pulse numbers to functions applied
    to the full state map at the end of that pulse; their results are
    returned via ``metrics.snapshots``.
    """
    states: Dict[int, Any] = {v: protocol.init_node(v, g.neighbors(v)) for v in g.nodes}
    label_fn = getattr(protocol, "label", lambda pulse: DEFAULT_LABEL)
    metrics = RunMetrics()

    inboxes: Dict[int, List[Envelope]] = {}
    wake_heap: List[Tuple[int, int]] = []
    armed: set = set()
    done: Dict[int, bool] = {v: False for v in g.nodes}
    rng = random.Random(shuffle_seed) if shuffle_seed is not None else None
    adjacency = {v: set(g.neighbors(v)) for v in g.nodes}

    pulse = 0
    while True:
        if pulse > pulse_cap:
            raise SimulationError(f"pulse cap {pulse_cap} exceeded")
        if pulse == 0:
            due = list(g.nodes)
        else:
            due = set(inboxes)
            while wake_heap and wake_heap[0][0] == pulse:
                _, v = heapq.heappop(wake_heap)
                armed.discard((pulse, v))
                due.add(v)
            due = sorted(due)
        if rng is not None:
            rng.shuffle(due)

        current = inboxes
        inboxes = {}
        label = label_fn(pulse)
        outgoing: List[Envelope] = []
        for v in due:
            inbox = deliver_order(current.get(v, ()))
            result = protocol.on_pulse(states[v], pulse, inbox)
            for s in result.sends:
                if s.dst not in adjacency[v]:
                    raise SimulationError(
                        f"node {v} addressed non-neighbor {s.dst} at pulse {pulse}")
                env = Envelope(v, s.dst, pulse, s.kind, s.payload, s.size_words)
                outgoing.append(env)
                metrics.count(label, s.size_words)
            if result.wake is not None:
                if result.wake <= pulse:
                    raise SimulationError(f"node {v} armed a wake in the past")
                key = (result.wake, v)
                if key not in armed:
                    armed.add(key)
                    heapq.heappush(wake_heap, key)
            if result.done:
                done[v] = True

        for env in outgoing:
            inboxes.setdefault(env.dst, []).append(env)
        if trace_sink is not None:
            trace_sink({
                "pulse": pulse,
                "sends": [{"from": e.src, "to": e.dst, "kind": e.kind} for e in outgoing],
            })
        if snapshot_pulses and pulse in snapshot_pulses:
            metrics.snapshots[pulse] = snapshot_pulses[pulse](states)

        metrics.pulses = pulse + 1
        if not inboxes:
            if all(done.values()):
                break
            if not wake_heap:
                stuck = sorted(v for v, d in done.items() if not d)
                raise SimulationError(
                    f"deadlock: nodes {stuck[:5]} idle but not done at pulse {pulse}")
        pulse += 1

    return states, metrics
