"""The evaluation corpus: a fixed grid of generated instances shared by the
benchmark sweep and the acceptance suite.

Deterministic kinds span sizes 4..2000 per kind; random graphs get 20 seeds
at desk sizes and a couple of seeds at the largest size. k values are
filtered to the valid 1 <= k <= n-1 range per instance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Tuple

from .graph import Graph, generate

K_VALUES = (1, 2, 3, 7, 15)

SMALL = [
    ("path", {"n": 4}, 1),
    ("path", {"n": 8}, 1),
    ("path", {"n": 16}, 1),
    ("path", {"n": 50}, 1),
    ("path", {"n": 200}, 1),
    ("cycle", {"n": 4}, 1),
    ("cycle", {"n": 8}, 1),
    ("cycle", {"n": 16}, 1),
    ("cycle", {"n": 50}, 1),
    ("cycle", {"n": 200}, 1),
    ("star", {"n": 4}, 1),
    ("star", {"n": 8}, 1),
    ("star", {"n": 16}, 1),
    ("star", {"n": 50}, 1),
    ("star", {"n": 200}, 1),
    ("balanced-tree", {"branching": 2, "height": 2}, 1),   # 7 nodes
    ("balanced-tree", {"branching": 2, "height": 3}, 1),   # 15
    ("balanced-tree", {"branching": 2, "height": 5}, 1),   # 63
    ("balanced-tree", {"branching": 3, "height": 4}, 1),   # 121
    ("grid", {"rows": 2, "cols": 2}, 1),
    ("grid", {"rows": 3, "cols": 5}, 1),
    ("grid", {"rows": 7, "cols": 7}, 1),
    ("grid", {"rows": 10, "cols": 20}, 1),
    ("gnm-connected", {"n": 10, "m": 15}, 20),
    ("gnm-connected", {"n": 16, "m": 24}, 20),
    ("gnm-connected", {"n": 50, "m": 80}, 20),
    ("gnm-connected", {"n": 200, "m": 340}, 3),
]

LARGE = [
    ("path", {"n": 2000}, 1),
    ("cycle", {"n": 2000}, 1),
    ("star", {"n": 2000}, 1),
    ("balanced-tree", {"branching": 2, "height": 10}, 1),  # 2047
    ("grid", {"rows": 40, "cols": 50}, 1),
    ("gnm-connected", {"n": 2000, "m": 3000}, 2),
]

LARGE_K = (1, 3, 15)


@dataclass(frozen=True)
class Instance:
    kind: str
    params: Tuple[Tuple[str, int], ...]
    k: int
    seed: int
    tier: str

    @property
    def name(self) -> str:
        ps = ",".join(f"{key}={val}" for key, val in self.params)
        return f"{self.kind}({ps})/k={self.k}/seed={self.seed}"

    def graph(self) -> Graph:
        return generate(self.kind, seed=self.seed, **dict(self.params))


def _expand(rows, k_values, tier) -> List[Instance]:
    out = []
    for kind, params, seeds in rows:
        n = _node_count(kind, params)
        for k in k_values:
            if k > n - 1:
                continue
            for seed in range(seeds):
                out.append(Instance(kind, tuple(sorted(params.items())),
                                    k, seed, tier))
    return out


def _node_count(kind: str, params: Dict[str, int]) -> int:
    if kind == "balanced-tree":
        b, h = params["branching"], params["height"]
        return h + 1 if b == 1 else (b ** (h + 1) - 1) // (b - 1)
    if kind == "grid":
        return params["rows"] * params["cols"]
    return params["n"]


def corpus(tier: str = "all") -> List[Instance]:
    """Instances of the requested tier: 'small' (n <= 200), 'large'
    (n = 2000, reduced k set), or 'all'."""
    items: List[Instance] = []
    if tier in ("small", "all"):
        items.extend(_expand(SMALL, K_VALUES, "small"))
    if tier in ("large", "all"):
        items.extend(_expand(LARGE, LARGE_K, "large"))
    if not items:
        raise ValueError(f"unknown corpus tier {tier!r}")
    return items
