"""Command-line interface: generate graphs, run either executor, verify
output sets, query the brute-force oracle, compare the two executors, and
sweep the benchmark corpus.

Exit codes: 0 success, 1 verification failure, 2 usage or input error.
Identical invocations produce byte-identical outputs; reports carry the
configuration and seed but never wall-clock values.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from typing import Optional

from .corpus import corpus
from .dominate import POLICIES
from .forest import dump_forest
from .graph import Graph, GraphError, format_edgelist, generate, parse_edgelist
from .partition import PartitionError
from .runner import run_central, run_distributed
from .verify import (VerificationReport, VerifyError, brute_force_min_kdom,
                     check_bounds, compare_runs, verify_domination,
                     verify_forest, verify_size_bound)

USAGE_ERROR = 2
VERIFY_ERROR = 1

GEN_PARAM_FLAGS = ("n", "m", "rows", "cols", "branching", "height")


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="kdomset", description=__doc__)
    sub = top.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="write a generated graph as an edge list")
    gen.add_argument("--type", required=True, dest="kind")
    for flag in GEN_PARAM_FLAGS:
        gen.add_argument(f"--{flag}", type=int)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", help="output path (default stdout)")

    def add_source(p):
        p.add_argument("--graph", help="edge-list file")
        p.add_argument("--gen", dest="genspec",
                       help="generator spec, e.g. gnm-connected:n=50,m=80")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--k", type=int, required=True)

    run_p = sub.add_parser("run", help="run one executor and verify the output")
    add_source(run_p)
    run_p.add_argument("--mode", choices=("central", "sim"), default="central")
    run_p.add_argument("--policy", choices=POLICIES, default="guarded")
    run_p.add_argument("--pulse-cap", type=int)
    run_p.add_argument("--check", action="store_true",
                       help="sim mode: also run the central executor and "
                            "require identical output")
    run_p.add_argument("--trace", help="trace file (steps for central, "
                                       "pulse lines for sim)")
    run_p.add_argument("--forest-out", help="write the final forest as "
                                            "'node parent root' lines")
    run_p.add_argument("--out", help="report JSON path (default stdout)")

    ver = sub.add_parser("verify", help="check a dominating-set file")
    add_source(ver)
    ver.add_argument("--dom", required=True, help="JSON array of node ids")

    orc = sub.add_parser("oracle", help="exact minimum via brute force")
    add_source(orc)
    orc.add_argument("--cap", type=int, default=16)

    cmp_p = sub.add_parser("compare", help="run both executors, require equality")
    add_source(cmp_p)
    cmp_p.add_argument("--policy", choices=POLICIES, default="guarded")

    bench = sub.add_parser("bench", help="sweep the built-in corpus to CSV")
    bench.add_argument("--tier", choices=("small", "large", "all"), default="small")
    bench.add_argument("--policy", choices=POLICIES, default="guarded")
    bench.add_argument("--out", help="CSV path (default stdout)")
    return top


def load_graph(args) -> Graph:
    if getattr(args, "graph", None) and getattr(args, "genspec", None):
        raise GraphError("give either --graph or --gen, not both")
    if getattr(args, "graph", None):
        with open(args.graph) as fh:
            return parse_edgelist(fh.read())
    if getattr(args, "genspec", None):
        kind, _, rest = args.genspec.partition(":")
        params = {}
        if rest:
            for item in rest.split(","):
                key, _, val = item.partition("=")
                if not val:
                    raise GraphError(f"bad generator spec item {item!r}")
                params[key] = int(val)
        return generate(kind, seed=args.seed, **params)
    raise GraphError("a graph source is required (--graph or --gen)")


def check_params(g: Graph, k: int) -> None:
    if k < 1 or k > g.n - 1:
        raise GraphError(f"k must satisfy 1 <= k <= n-1 (k={k}, n={g.n})")
    if not g.is_connected():
        raise GraphError("input graph is disconnected")


def write_text(path: Optional[str], text: str) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_gen(args) -> int:
    params = {f: getattr(args, f) for f in GEN_PARAM_FLAGS
              if getattr(args, f) is not None}
    g = generate(args.kind, seed=args.seed, **params)
    write_text(args.out, format_edgelist(g))
    return 0


def cmd_run(args) -> int:
    g = load_graph(args)
    check_params(g, args.k)
    config = {
        "source": args.graph or args.genspec,
        "n": g.n, "m": g.m, "k": args.k,
        "mode": args.mode, "policy": args.policy, "seed": args.seed,
        "pulse_cap": args.pulse_cap,
    }
    trace_lines = []
    if args.mode == "central":
        result = run_central(g, args.k, args.policy)
        dom = result.dominating.members
        forest = result.forest
        trace = result.trace
        metrics = None
        per_tree = {
            str(root): {
                "class_index": choice.class_index,
                "augmented": choice.augmented,
                "size": len(choice.members),
                "tree_size": len(forest.members[root]),
            }
            for root, choice in result.dominating.per_tree.items()
        }
        if args.trace:
            trace_lines = [json.dumps(d, sort_keys=True) for d in trace.to_dicts()]
        equivalence = None
    else:
        sink = (lambda rec: trace_lines.append(json.dumps(rec, sort_keys=True))) \
            if args.trace else None
        result = run_distributed(g, args.k, args.policy,
                                 pulse_cap=args.pulse_cap, trace_sink=sink)
        dom = result.dominating
        forest = result.forest
        trace = None
        metrics = result.metrics.to_dict()
        per_tree = {
            str(root): {
                "class_index": choice[0],
                "augmented": choice[1],
                "tree_size": len(forest.members[root]),
            }
            for root, choice in sorted(result.per_tree_choice.items())
        }
        equivalence = None
        if args.check:
            central = run_central(g, args.k, args.policy)
            equivalence, _msg = compare_runs(central.outputs(), result.outputs())

    ok, witness, far = verify_domination(g, dom, args.k)
    report = VerificationReport(
        dominates=ok, farthest_node=witness, farthest_distance=far,
        size=len(dom), size_bound=g.n // (args.k + 1),
        size_ok=verify_size_bound(len(dom), g.n, args.k),
        guarded_slack=len(forest.members),
        policy=args.policy,
        forest=verify_forest(trace, forest, g, args.k) if trace else None,
        equivalence=equivalence,
        metrics_ok=None if metrics is None else check_bounds(
            metrics["pulses"], metrics["messages"], g.n, g.m, args.k),
    )
    doc = {
        "config": config,
        "dominating_set": sorted(dom),
        "per_tree": per_tree,
        "metrics": metrics,
        "verification": report.to_dict(),
    }
    write_text(args.out, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    if args.trace:
        with open(args.trace, "w") as fh:
            fh.write("\n".join(trace_lines) + ("\n" if trace_lines else ""))
    if args.forest_out:
        with open(args.forest_out, "w") as fh:
            fh.write(dump_forest(forest))
    if not report.ok:
        reasons = []
        if not report.dominates:
            reasons.append("domination failed")
        if args.policy == "literal" and not report.size_ok:
            reasons.append("size bound failed")
        if report.forest is not None and not report.forest.ok:
            reasons.append("forest invariants failed")
        if equivalence is False:
            reasons.append("executor outputs diverged")
        print("verification failed: " + "; ".join(reasons), file=sys.stderr)
        return VERIFY_ERROR
    return 0


def cmd_verify(args) -> int:
    g = load_graph(args)
    check_params(g, args.k)
    with open(args.dom) as fh:
        dom = set(json.load(fh))
    ok, witness, far = verify_domination(g, dom, args.k)
    size_ok = verify_size_bound(len(dom), g.n, args.k)
    print(json.dumps({
        "dominates": ok,
        "farthest": {"node": witness, "distance": far},
        "size": len(dom),
        "size_bound": g.n // (args.k + 1),
        "size_ok": size_ok,
    }, sort_keys=True))
    return 0 if ok else VERIFY_ERROR


def cmd_oracle(args) -> int:
    g = load_graph(args)
    check_params(g, args.k)
    size, witness = brute_force_min_kdom(g, args.k, cap=args.cap)
    print(json.dumps({"optimal_size": size, "witness": sorted(witness)},
                     sort_keys=True))
    return 0


def cmd_compare(args) -> int:
    g = load_graph(args)
    check_params(g, args.k)
    central = run_central(g, args.k, args.policy)
    dist = run_distributed(g, args.k, args.policy)
    equal, msg = compare_runs(central.outputs(), dist.outputs())
    print(json.dumps({"equal": equal, "detail": msg}, sort_keys=True))
    return 0 if equal else VERIFY_ERROR


def cmd_bench(args) -> int:
    rows = []
    failures = 0
    for inst in corpus(args.tier):
        g = inst.graph()
        central = run_central(g, inst.k, args.policy)
        dist = run_distributed(g, inst.k, args.policy)
        equal, _ = compare_runs(central.outputs(), dist.outputs())
        dom = dist.dominating
        ok, _, _ = verify_domination(g, dom, inst.k)
        metrics = dist.metrics
        bounds = check_bounds(metrics.pulses, metrics.messages, g.n, g.m, inst.k)
        heights = {r: central.forest.tree_height(r) for r in central.forest.members}
        row = {
            "name": inst.name, "kind": inst.kind, "n": g.n, "m": g.m,
            "k": inst.k, "seed": inst.seed, "policy": args.policy,
            "size": len(dom), "size_bound": g.n // (inst.k + 1),
            "dominates": ok,
            "size_ok": verify_size_bound(len(dom), g.n, inst.k),
            "equal": equal,
            "pulses": metrics.pulses, "messages": metrics.messages,
            "words": metrics.words,
            "trees": len(central.forest.members),
            "max_height": max(heights.values()),
            "time_ok": bounds["time"], "msg_ok": bounds["messages"],
        }
        rows.append(row)
        gate = ok if args.policy == "guarded" else row["size_ok"]
        if not (gate and equal):
            failures += 1
    out = sys.stdout if not args.out else open(args.out, "w", newline="")
    try:
        writer = csv.DictWriter(out, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if args.out:
            out.close()
    return VERIFY_ERROR if failures else 0


COMMANDS = {
    "gen": cmd_gen,
    "run": cmd_run,
    "verify": cmd_verify,
    "oracle": cmd_oracle,
    "compare": cmd_compare,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (GraphError, PartitionError, VerifyError, OSError,
            json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
