"""congestbench command line: single-configuration runs and bandwidth sweeps.

Single runs write one CSV row in the same schema the sweep uses for that
problem; `sweep` produces rows.csv, summary.json, figure.dat, and a
rendered figure.png in the output directory.
"""

from __future__ import annotations

import argparse
import sys

from .apsp import run_apsp
from .distk import (
    build_reduction,
    bridge_bits,
    random_pointer_instance,
    run_distance_k,
    solve_pointer_instance,
)
from .engine import BandwidthConfig
from .graphs import generate, load_graph, save_graph
from .mst import run_mst
from .oracles import apsp_oracle, hop_limited_distances, mst_oracle
from .sssp import bounded_hop_mssp, sample_skeleton
from .sweep import CSV_SCHEMAS, sweep


def _write_row(path, schema, row):
    with open(path, "w", encoding="ascii", newline="\n") as f:
        f.write(schema + "\n")
        f.write(",".join(str(row[c]) for c in schema.split(",")) + "\n")


def _cfg(args, g=None, mode="strict"):
    w = args.word_bits or (g.word_bits() if g is not None else None)
    return BandwidthConfig(capacity_bits=args.bandwidth_bits, word_bits=w, mode=mode)


def cmd_gen(args):
    params = {}
    if args.kind == "grid":
        params = {"rows": args.rows or args.n, "cols": args.cols or args.n}
    elif args.kind == "erdos-renyi":
        params = {"n": args.n, "p": args.p}
    elif args.kind == "tree-plus-chords":
        params = {"n": args.n, "chords": args.chords}
    else:
        params = {"n": args.n}
    g = generate(args.kind, seed=args.seed, weighted=args.weighted, **params)
    save_graph(g, args.out)
    print(f"wrote {args.out}: {g}")


def cmd_apsp(args):
    g = load_graph(args.graph)
    cfg = _cfg(args, g)
    table, trace = run_apsp(g, cfg, seed=args.seed)
    correct = int(table == apsp_oracle(g))
    rc = cfg.resolve(g)
    row = {
        "n": g.n,
        "D": g.diameter(),
        "B": rc.capacity_bits,
        "X": rc.words_per_round,
        "rounds_used": trace.rounds_used,
        "correct": correct,
    }
    _write_row(args.csv, CSV_SCHEMAS["apsp"], row)
    print(f"apsp: rounds={trace.rounds_used} correct={bool(correct)}")
    return 0 if correct else 1


def cmd_mst(args):
    g = load_graph(args.graph)
    cfg = _cfg(args, g)
    res = run_mst(g, cfg, seed=args.seed)
    correct = int(res.edge_union == mst_oracle(g))
    rc = cfg.resolve(g)
    row = {
        "n": g.n,
        "D": g.diameter(),
        "B": rc.capacity_bits,
        "X": rc.words_per_round,
        "k": res.k,
        "fragments": res.fragment_count,
        "rounds_fragment": res.rounds_fragment,
        "rounds_pipeline": res.rounds_pipeline_path,
        "rounds_total": res.trace.rounds_used,
        "correct": correct,
    }
    _write_row(args.csv, CSV_SCHEMAS["mst"], row)
    print(
        f"mst: k={res.k} fragments={res.fragment_count} "
        f"rounds={res.trace.rounds_used} correct={bool(correct)}"
    )
    return 0 if correct else 1


def cmd_mssp(args):
    g = load_graph(args.graph)
    cfg = _cfg(args, g, mode="queue")
    skeleton = sample_skeleton(g, g.nodes[0], args.sources, seed=args.seed)
    res = bounded_hop_mssp(g, skeleton, args.hops, cfg, seed=args.seed)
    oracle = hop_limited_distances(g, skeleton.members, args.hops)
    correct = int(
        all(
            res.distances[v][s] == oracle[(s, v)]
            for v in g.nodes
            for s in skeleton.members
        )
    )
    rc = cfg.resolve(g)
    row = {
        "n": g.n,
        "alpha": args.sources,
        "h": args.hops,
        "B": rc.capacity_bits,
        "X": rc.words_per_round,
        "delta": res.delta,
        "rounds_used": res.trace.rounds_used,
        "max_edge_words": res.max_edge_words,
        "overflow_words": res.overflow_words,
        "correct": correct,
    }
    _write_row(args.csv, CSV_SCHEMAS["mssp"], row)
    print(
        f"mssp: rounds={res.trace.rounds_used} overflow_words={res.overflow_words} "
        f"correct={bool(correct)}"
    )
    return 0 if correct else 1


def cmd_distk(args):
    pi = random_pointer_instance(args.pointers, args.seed)
    inst = build_reduction(pi)
    w = args.word_bits or inst.graph.word_bits()
    cfg = BandwidthConfig(capacity_bits=args.bandwidth_bits, word_bits=w)
    answer, trace = run_distance_k(
        inst.graph, inst.overlay, inst.start, args.k, cfg, seed=args.seed, diameter=3
    )
    correct = int(answer == solve_pointer_instance(pi, args.k))
    row = {
        "p": args.pointers,
        "n": inst.graph.n,
        "k": args.k,
        "B": cfg.capacity_bits,
        "X": cfg.capacity_bits // w,
        "rounds_used": trace.rounds_used,
        "bridge_bits": bridge_bits(inst, trace),
        "correct": correct,
    }
    _write_row(args.csv, CSV_SCHEMAS["distk"], row)
    print(
        f"distk: answer={answer} rounds={trace.rounds_used} "
        f"bridge_bits={row['bridge_bits']} correct={bool(correct)}"
    )
    return 0 if correct else 1


def _sweep_entry(args):
    bandwidths = [int(b) for b in args.bandwidth_bits.split(",")]
    seeds = [int(s) for s in args.seeds.split(",")]
    w = args.word_bits
    if w is None:
        raise SystemExit("sweep requires --word-bits so X = B // w is well defined")
    if any(b % w for b in bandwidths):
        raise SystemExit("each bandwidth must be a multiple of --word-bits")
    x_list = [b // w for b in bandwidths]
    report = sweep(
        args.problem,
        x_list=x_list,
        seeds=seeds,
        graph_kind=args.graph_kind,
        n=args.n,
        er_p=args.p,
        chords=args.chords,
        alpha=args.alpha,
        hops=args.hops,
        pointers=args.pointers,
        chain_k=args.k,
        word_bits=w,
        out_dir=args.out,
        render=not args.no_plot,
    )
    print(
        f"sweep {args.problem}: beta={report.beta:.3f} class={report.label} "
        f"-> {args.out}/rows.csv"
    )
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="congestbench",
        description="Bandwidth-parametric CONGEST algorithm benchmarks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a graph file")
    p.add_argument("--kind", required=True,
                   choices=["path", "star", "grid", "erdos-renyi", "tree-plus-chords"])
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--rows", type=int)
    p.add_argument("--cols", type=int)
    p.add_argument("--p", type=float, default=0.1)
    p.add_argument("--chords", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--weighted", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    for name, func in (("apsp", cmd_apsp), ("mst", cmd_mst)):
        p = sub.add_parser(name, help=f"run {name} on a graph file")
        p.add_argument("--graph", required=True)
        p.add_argument("--bandwidth-bits", type=int, required=True)
        p.add_argument("--word-bits", type=int)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--csv", required=True)
        p.set_defaults(func=func)

    p = sub.add_parser("mssp", help="bounded-hop multi-source shortest paths")
    p.add_argument("--graph", required=True)
    p.add_argument("--sources", type=int, required=True, help="skeleton size alpha")
    p.add_argument("--hops", type=int, required=True)
    p.add_argument("--bandwidth-bits", type=int, required=True)
    p.add_argument("--word-bits", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", required=True)
    p.set_defaults(func=cmd_mssp)

    p = sub.add_parser("distk", help="Distance_k on a pointer reduction instance")
    p.add_argument("--pointers", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--bandwidth-bits", type=int, required=True)
    p.add_argument("--word-bits", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", required=True)
    p.set_defaults(func=cmd_distk)

    p = sub.add_parser("sweep", help="bandwidth sweep with classification")
    p.add_argument("--problem", required=True, choices=["apsp", "mst", "mssp", "distk"])
    p.add_argument("--graph-kind", default="erdos-renyi",
                   choices=["path", "star", "grid", "erdos-renyi", "tree-plus-chords"])
    p.add_argument("--n", type=int, default=128)
    p.add_argument("--p", type=float, default=0.1)
    p.add_argument("--chords", type=int, default=0)
    p.add_argument("--alpha", type=int, default=8)
    p.add_argument("--hops", type=int, default=8)
    p.add_argument("--pointers", type=int, default=64)
    p.add_argument("--k", type=int, default=8)
    p.add_argument("--bandwidth-bits", required=True,
                   help="comma-separated capacities, e.g. 8,16,32,64")
    p.add_argument("--word-bits", type=int, required=True)
    p.add_argument("--seeds", required=True, help="comma-separated, e.g. 1,2,3")
    p.add_argument("--out", required=True)
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=_sweep_entry)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args) or 0


if __name__ == "__main__":
    sys.exit(main())
