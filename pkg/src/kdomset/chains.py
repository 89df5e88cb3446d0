"""Contraction of directed label chains by deterministic symmetry breaking.

After the early absorption steps of a phase, the remaining meta-nodes form
directed chains whose labels are strictly monotone. This module contracts
those chains:

  * an extremum pass absorbs every local minimum's (or maximum's) neighbors
    into it, with a deterministic rule for contested neighbors and a rescue
    rule for nodes stranded by edge eliminations;
  * a pivot pass compares the binary representations of each node's label
    and its (virtual) neighbor labels, picks the highest bit position where
    the label differs from exactly one side, and merges the edges whose two
    endpoints picked the same position.

Iterating pivot passes shrinks the label range roughly like an iterated
logarithm, so a handful of rounds empties any chain.

The engine is geometry-only: it tracks labels and up/down links and reports
merges through callbacks, so the centralized executor can bind them to
forest mutations and tests can bind them to plain set unions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Set, Tuple


class ChainError(RuntimeError):
    """Chain-structure precondition violated (signals an implementation bug)."""


def log_star(x: float) -> int:
    """Iterated base-2 logarithm: applications of log2 until the value is <= 1."""
    count = 0
    while x > 1:
        x = math.log2(x)
        count += 1
    return count


# ---------------------------------------------------------------------------
# Pivot computation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChainLabels:
    """Per-node pivot state for one round.

    ``up_virtual`` and ``down_virtual`` are the labels this node compares
    against on its upstream and downstream side; chain endpoints get a
    synthetic value one step beyond their own label so the strict ordering
    along the chain is preserved. ``diff_down`` holds the 1-indexed bit
    positions (from the least significant bit) where the label agrees with
    the upstream side but not the downstream side; ``diff_up`` is the
    mirror image. ``pivot`` is the highest member of their union.
    """

    label: int
    up_virtual: int
    down_virtual: int
    diff_down: frozenset
    diff_up: frozenset
    pivot: int


def virtual_labels(label: int, up_label: Optional[int],
                   down_label: Optional[int]) -> Tuple[int, int]:
    """Virtual (upstream, downstream) comparison labels for a chain node.

    At least one real neighbor label must be present, and the chain must be
    strictly monotone through this node.
    """
    if up_label is None and down_label is None:
        raise ChainError("chain node needs at least one neighbor")
    if up_label is None:
        up = label - 1 if down_label > label else label + 1
    else:
        up = up_label
    if down_label is None:
        down = label + 1 if up_label < label else label - 1
    else:
        down = down_label
    if not (up < label < down or up > label > down):
        raise ChainError(f"labels not strictly monotone: {up}, {label}, {down}")
    return up, down


def pivot_state(up_virtual: int, label: int, down_virtual: int) -> ChainLabels:
    """Bit-position comparison of a strictly monotone label triple."""
    if not (up_virtual < label < down_virtual or up_virtual > label > down_virtual):
        raise ChainError(
            f"pivot needs a strictly monotone triple, got {up_virtual}, {label}, {down_virtual}")
    width = max(up_virtual, label, down_virtual).bit_length()
    diff_down = set()
    diff_up = set()
    for p in range(1, width + 1):
        bit = 1 << (p - 1)
        same_up = (up_virtual & bit) == (label & bit)
        same_down = (label & bit) == (down_virtual & bit)
        if same_up and not same_down:
            diff_down.add(p)
        elif not same_up and same_down:
            diff_up.add(p)
    if not diff_down and not diff_up:
        raise ChainError("no distinguishing bit position; labels were not distinct")
    pivot = max(diff_down | diff_up)
    return ChainLabels(label, up_virtual, down_virtual,
                       frozenset(diff_down), frozenset(diff_up), pivot)


def node_pivot(label: int, up_label: Optional[int],
               down_label: Optional[int]) -> ChainLabels:
    """Pivot state of a chain node, labels shifted by +1 before decomposition.

    The uniform shift keeps virtual labels nonnegative when a chain head
    carries label 0, and preserves the strict orderings the pivot argument
    relies on.
    """
    up, down = virtual_labels(
        label + 1,
        None if up_label is None else up_label + 1,
        None if down_label is None else down_label + 1,
    )
    return pivot_state(up, label + 1, down)


# ---------------------------------------------------------------------------
# Chain state and contraction passes
# ---------------------------------------------------------------------------

# Merge callback: (absorbed_node, surviving_node, via_pair). ``via_pair`` is
# the meta-pair whose recorded host edge the merge crosses; for rescues it is
# the pair of the eliminated meta-edge, whose survivor-side endpoint now lies
# inside the surviving node's tree.
MergeFn = Callable[[int, int, Tuple[int, int]], None]
IsolateFn = Callable[[int], None]


@dataclass
class ChainState:
    """Mutable link structure of the active chain nodes."""

    down: Dict[int, Optional[int]] = field(default_factory=dict)
    up: Dict[int, Optional[int]] = field(default_factory=dict)
    label: Dict[int, int] = field(default_factory=dict)

    @classmethod
    def from_edges(cls, labels: Dict[int, int], edges: Dict[int, int]) -> "ChainState":
        st = cls(label=dict(labels))
        st.down = {x: None for x in labels}
        st.up = {x: None for x in labels}
        for src, dst in edges.items():
            st.down[src] = dst
            st.up[dst] = src
        return st

    def alive(self) -> List[int]:
        return sorted(x for x in self.label
                      if self.down[x] is not None or self.up[x] is not None)

    def neighbors(self, x: int) -> Set[int]:
        return {n for n in (self.up[x], self.down[x]) if n is not None}

    def drop(self, x: int) -> None:
        self.label.pop(x, None)
        self.down.pop(x, None)
        self.up.pop(x, None)

    def unlink(self, a: int, b: int) -> None:
        if self.down.get(a) == b:
            self.down[a] = None
        if self.up.get(a) == b:
            self.up[a] = None
        if self.down.get(b) == a:
            self.down[b] = None
        if self.up.get(b) == a:
            self.up[b] = None


def _rescue_stranded(st: ChainState, candidates: List[int],
                     gone: Dict[int, Dict[int, Tuple[int, bool]]],
                     on_merge: MergeFn) -> None:
    """Merge every stranded node into the merged node that claimed a former
    neighbor: the downstream side takes precedence over the upstream side."""
    for t in sorted(candidates):
        if t not in st.label or st.neighbors(t):
            continue
        notices = gone.get(t)
        if not notices:
            raise ChainError(f"node {t} stranded without an eliminated edge")
        chosen = None
        for g, (target, was_down) in sorted(notices.items()):
            if was_down:
                chosen = (g, target)
                break
        if chosen is None:
            g, (target, _) = sorted(notices.items())[0]
            chosen = (g, target)
        g, target = chosen
        on_merge(t, target, (t, g))
        st.drop(t)


def extremum_pass(st: ChainState, find_minima: bool,
                  on_merge: MergeFn, on_isolate: IsolateFn) -> None:
    """One absorption round for local minima (or maxima).

    Every extremum absorbs its neighbors; when two extrema claim the same
    node, the one with the smaller label wins for minima (larger for maxima),
    with the smaller node id breaking exact label ties. The loser keeps its
    other absorption, and any node left with no incident edges joins the
    merged node that absorbed its former neighbor.
    """
    alive = st.alive()
    labels = st.label

    def is_extreme(x: int) -> bool:
        nbrs = st.neighbors(x)
        if not nbrs:
            return False
        for nb in nbrs:
            if labels[nb] == labels[x]:
                raise ChainError(f"equal labels across edge ({x},{nb})")
            if (labels[nb] < labels[x]) == find_minima:
                return False
        return True

    extrema = [x for x in alive if is_extreme(x)]
    claims: Dict[int, List[int]] = {}
    for x in extrema:
        for nb in sorted(st.neighbors(x)):
            claims.setdefault(nb, []).append(x)

    if find_minima:
        rank = lambda c: (labels[c], c)
        pick = min
    else:
        rank = lambda c: (-labels[c], c)
        pick = min
    winner = {y: pick(cl, key=rank) for y, cl in claims.items()}

    absorbed = set(claims)
    gone: Dict[int, Dict[int, Tuple[int, bool]]] = {}
    absorbed_any: Set[int] = set()

    for y in sorted(claims):
        w = winner[y]
        absorbed_any.add(w)
        on_merge(y, w, (y, w))
        # every other incident edge of y is eliminated to isolate w's node
        for t in sorted(st.neighbors(y)):
            if t == w or t in absorbed:
                continue
            was_down = st.down.get(t) == y
            gone.setdefault(t, {})[y] = (w, was_down)

    for y in sorted(claims):
        for t in list(st.neighbors(y)):
            st.unlink(y, t)
        st.drop(y)
    for w in sorted(absorbed_any):
        for t in list(st.neighbors(w)):
            st.unlink(w, t)
        st.drop(w)
        on_isolate(w)

    _rescue_stranded(st, [t for t in gone if t in st.label], gone, on_merge)


def pivot_merge_pass(st: ChainState, states: Dict[int, ChainLabels],
                     on_merge: MergeFn, on_isolate: IsolateFn) -> None:
    """Merge every chain edge whose endpoints computed the same pivot.

    The upstream endpoint combines into the downstream one; the merged node
    is isolated by eliminating its outer edges, and stranded neighbors are
    rescued into it.
    """
    pairs = []
    in_pair: Set[int] = set()
    for x in st.alive():
        y = st.down.get(x)
        if y is None or y not in states:
            continue
        if states[x].pivot == states[y].pivot:
            p = states[x].pivot
            if p not in states[x].diff_down or p not in states[y].diff_up:
                raise ChainError(f"pivot match on edge ({x},{y}) violates the side pattern")
            if x in in_pair or y in in_pair:
                raise ChainError(f"pivot pairs are not disjoint around edge ({x},{y})")
            pairs.append((x, y))
            in_pair.update((x, y))

    gone: Dict[int, Dict[int, Tuple[int, bool]]] = {}
    for x, y in pairs:
        on_merge(x, y, (x, y))
        w = st.up.get(x)
        if w is not None and w not in in_pair:
            gone.setdefault(w, {})[x] = (y, True)
        z = st.down.get(y)
        if z is not None and z not in in_pair:
            gone.setdefault(z, {})[y] = (y, False)

    for x, y in pairs:
        for t in list(st.neighbors(x)):
            st.unlink(x, t)
        st.drop(x)
        for t in list(st.neighbors(y)):
            st.unlink(y, t)
        st.drop(y)
        on_isolate(y)

    _rescue_stranded(st, [t for t in gone if t in st.label], gone, on_merge)


def contract_chains(st: ChainState, on_merge: MergeFn, on_isolate: IsolateFn,
                    iteration_cap: Optional[int] = None) -> int:
    """Run pivot rounds until no chain node remains; returns the round count.

    Entry labels are the node identities of the chains (strictly monotone,
    length >= 2); each round replaces the labels of the survivors with their
    pivots. A round is: pivot merges, then a minima pass, then a maxima pass
    on the pivot labels. Exceeding the iteration cap raises, since the label
    range provably collapses within ``log*`` of the initial range.
    """
    if iteration_cap is None:
        top = max(st.label.values(), default=0)
        iteration_cap = log_star(top + 1) + 3
    rounds = 0
    while st.alive():
        rounds += 1
        if rounds > iteration_cap:
            raise ChainError(f"chain contraction exceeded {iteration_cap} rounds")
        states = {}
        for x in st.alive():
            up, down = st.up[x], st.down[x]
            states[x] = node_pivot(
                st.label[x],
                None if up is None else st.label[up],
                None if down is None else st.label[down],
            )
        pivot_merge_pass(st, states, on_merge, on_isolate)
        pivots = {x: states[x].pivot for x in st.alive()}
        st.label.update(pivots)
        extremum_pass(st, True, on_merge, on_isolate)
        extremum_pass(st, False, on_merge, on_isolate)
    return rounds
