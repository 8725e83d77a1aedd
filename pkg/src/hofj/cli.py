"""``hofj`` command line: prepare, compare, sweep-m, sweep-iters, example-tree, gen-opinions, sparsify."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys

import numpy as np

from . import harness
from .graph_core import write_id_map
from .opinions import GenSpec, generate_innate, generate_resistance, read_vector, write_vector
from .polynomial import DENSE_NODE_CAP, OpinionState, PolynomialSpec
from .sparsifier import SparsifierConfig, build_sparsifier, export_sparsifier

log = logging.getLogger("hofj")


def _emit(lines, out):
    if out:
        with open(out, "a") as fh:
            for line in lines:
                fh.write(line + "\n")
    else:
        for line in lines:
            print(line)


def _load(args):
    g, stats = harness.prepare(args.graph, directed=args.directed)
    log.info("%s: n'=%d m'=%d", args.graph, g.n, g.m)
    return g, stats


def _common(p, beta=True):
    p.add_argument("graph", help="edge list file (u v [w])")
    p.add_argument("--directed", action="store_true", help="read lines as arcs (see load_edge_list)")
    if beta:
        p.add_argument("--beta", default="0.5,0.5", help="comma-separated polynomial coefficients")
    p.add_argument("--mode", default="literal-uniform",
                   choices=["literal-uniform", "weight-proportional"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--seeds", type=int, default=1, help="number of consecutive seeds from --seed")
    p.add_argument("--distribution", default="uniform", choices=["uniform", "exponential", "power-law"])
    p.add_argument("--x-min", type=float, default=1.0)
    p.add_argument("--single-thread", action="store_true")
    p.add_argument("--out", help="append JSON lines here instead of stdout")


def cmd_prepare(args) -> int:
    g, stats = _load(args)
    if args.id_map:
        write_id_map(g, args.id_map)
    if args.save:
        with open(args.save, "w") as fh:
            for a, b, w in zip(g.src, g.dst, g.weight):
                fh.write(f"{a} {b} {w:.17g}\n")
    print(f"n'={g.n} m'={g.m}")
    _emit([json.dumps(stats)], args.out)
    return 0


def cmd_compare(args) -> int:
    g, _ = _load(args)
    spec = PolynomialSpec.parse(args.beta)
    seeds = list(range(args.seed, args.seed + args.seeds))
    states = None
    if args.innate:
        s = read_vector(args.innate)
        alpha = read_vector(args.resistance) if args.resistance else generate_resistance(g.n, args.seed)
        states = [OpinionState(s, alpha)] * len(seeds)
    reports = harness.compare(
        g, spec, dataset=args.graph, distribution=args.distribution, k=args.M_multiplier,
        iters=args.iters, seeds=seeds, mode=args.mode, x_min=args.x_min, max_nodes=args.dense_cap,
        states=states, threads_single=args.single_thread,
    )
    _emit([r.to_json() for r in reports], args.out)
    if args.max_sigma is not None:
        sig = [r.mae_sigma for r in reports if r.solver == "approx" and r.mae_sigma is not None]
        if sig and max(sig) > args.max_sigma:
            print(f"FAIL: max sigma {max(sig):.3e} > {args.max_sigma}", file=sys.stderr)
            return 1
    return 0


def _plot(xs, ys, xlabel, path, logx=False):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(4, 3))
    ax.plot(xs, ys, marker="o")
    if logx:
        ax.set_xscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel("mean absolute error")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def cmd_sweep_m(args) -> int:
    g, _ = _load(args)
    spec = PolynomialSpec.parse(args.beta)
    ks = [float(k) for k in args.k.split(",")]
    seeds = list(range(args.seed, args.seed + args.seeds))
    reports, medians = harness.sweep_M(g, spec, ks=ks, seeds=seeds, dataset=args.graph,
                                       iters=args.iters, mode=args.mode,
                                       distribution=args.distribution,
                                       threads_single=args.single_thread)
    _emit([r.to_json() for r in reports], args.out)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "M", "median_sigma", "median_seconds"])
            for k in ks:
                w.writerow([k, harness.budget(g, spec, k), *medians[k]])
    if args.plot:
        _plot(ks, [medians[k][0] for k in ks], "k (M = k T m)", args.plot, logx=True)
    sig = [medians[k][0] for k in ks]
    for k in ks:
        print(f"k={k:g} median sigma={medians[k][0]:.4e} median time={medians[k][1]:.3f}s")
    if not harness.non_increasing(sig):
        print("FAIL: median sigma is not non-increasing in M", file=sys.stderr)
        return 1
    print("PASS: median sigma non-increasing in M")
    return 0


def cmd_sweep_iters(args) -> int:
    g, _ = _load(args)
    spec = PolynomialSpec.parse(args.beta)
    grid = [int(t) for t in args.grid.split(",")]
    seeds = list(range(args.seed, args.seed + args.seeds))
    rows = harness.sweep_iters(g, spec, grid=grid, seeds=seeds, k=args.M_multiplier,
                               mode=args.mode, distribution=args.distribution)
    _emit([json.dumps(r) for r in rows], args.out)
    med = {t: float(np.median([r["sigma"] for r in rows if r["t"] == t])) for t in sorted(set(grid))}
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "median_sigma"])
            w.writerows(med.items())
    if args.plot:
        _plot(list(med), list(med.values()), "iterations", args.plot)
    for t, v in med.items():
        print(f"t={t} median sigma={v:.4e}")
    if 50 in med and 100 in med:
        gap = abs(med[100] - med[50])
        ok = gap <= 1e-6
        print(f"{'PASS' if ok else 'FAIL'}: |sigma(100) - sigma(50)| = {gap:.2e}")
        return 0 if ok else 1
    return 0


def cmd_example_tree(args) -> int:
    ok = True
    for res in harness.example_tree():
        red, yellow, blue = res.per_class
        status = "PASS" if res.passed else "FAIL"
        ok &= res.passed
        print(f"{status} {res.name:13s} beta={res.beta} red={red:.3f} yellow={yellow:.3f} "
              f"blue={blue:.3f} sum(rounded)={res.displayed_total:.3f} sum(exact)={res.total:.4f} "
              f"expected={res.expected} / {res.expected_total}")
        for d in res.diffs:
            print(f"    {d}")
    return 0 if ok else 1


def cmd_gen_opinions(args) -> int:
    spec = GenSpec(args.distribution, args.n, seed=args.seed, x_min=args.x_min, alpha_pl=args.alpha_pl)
    write_vector(generate_innate(spec), args.innate_out)
    if args.resistance_out:
        write_vector(generate_resistance(args.n, args.seed), args.resistance_out)
    return 0


def cmd_sparsify(args) -> int:
    g, _ = _load(args)
    spec = PolynomialSpec.parse(args.beta)
    cfg = SparsifierConfig(M=harness.budget(g, spec, args.M_multiplier), sampling_mode=args.mode,
                           seed=args.seed, workers=args.workers)
    out = build_sparsifier(g, spec, cfg)
    export_sparsifier(out, args.output)
    print(json.dumps(out.diagnostics()))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hofj", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="load an edge list and keep its largest connected component")
    _common(p, beta=False)
    p.add_argument("--id-map", help="write 'compact original' id pairs here")
    p.add_argument("--save", help="write the prepared graph as an edge list")
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("compare", help="exact vs approximate equilibrium")
    _common(p)
    p.add_argument("--M-multiplier", type=float, default=10.0, help="M = k * T * m")
    p.add_argument("--iters", type=int, default=100)
    p.add_argument("--dense-cap", type=int, default=DENSE_NODE_CAP)
    p.add_argument("--innate", help="single-column innate opinion file")
    p.add_argument("--resistance", help="single-column resistance file")
    p.add_argument("--max-sigma", type=float, help="exit non-zero if any sigma exceeds this")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep-m", help="accuracy vs sparsifier budget")
    _common(p)
    p.set_defaults(seeds=5)
    p.add_argument("--k", default=",".join(str(k) for k in harness.M_GRID))
    p.add_argument("--iters", type=int, default=100)
    p.add_argument("--csv")
    p.add_argument("--plot", help="write a PNG of median sigma vs k")
    p.set_defaults(func=cmd_sweep_m)

    p = sub.add_parser("sweep-iters", help="accuracy vs number of iterations")
    _common(p)
    p.set_defaults(seeds=5)
    p.add_argument("--grid", default="0,1,2,5,10,20,50,100")
    p.add_argument("--M-multiplier", type=float, default=10.0)
    p.add_argument("--csv")
    p.add_argument("--plot")
    p.set_defaults(func=cmd_sweep_iters)

    p = sub.add_parser("example-tree", help="ten-node tree check against reference values")
    p.set_defaults(func=cmd_example_tree)

    p = sub.add_parser("gen-opinions", help="write innate opinions (and resistances)")
    p.add_argument("n", type=int)
    p.add_argument("innate_out")
    p.add_argument("--resistance-out")
    p.add_argument("--distribution", default="uniform", choices=["uniform", "exponential", "power-law"])
    p.add_argument("--x-min", type=float, default=1.0)
    p.add_argument("--alpha-pl", type=float, default=2.5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gen_opinions)

    p = sub.add_parser("sparsify", help="build and export a sparsifier")
    _common(p)
    p.add_argument("output", help="edge list path; diagnostics go to <output>.json")
    p.add_argument("--M-multiplier", type=float, default=10.0)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sparsify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
