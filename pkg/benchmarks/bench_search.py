"""Benchmark: compiled vs pure search kernel, and a full-scale solve.

Usage:
    python benchmarks/bench_search.py [--vertices N] [--edges M] [--queries K]
    python benchmarks/bench_search.py --full   # end-to-end modulus at scale

The synthetic instance mimics a messaging network: directed, epoch-second
timestamps, a handful of contacts per edge.
"""

import argparse
import time

import numpy as np

import tempmod as tm
from tempmod._search import run_search_compiled, run_search_pure
from tempmod.paths import SearchContext


def synthetic_graph(rng, n_vertices, n_edges, t0=1_082_000_000,
                    span=16_700_000):
    verts = [f"v{i}" for i in range(n_vertices)]
    pairs = set()
    while len(pairs) < n_edges:
        u, v = rng.integers(0, n_vertices, 2)
        if u != v:
            pairs.add((int(u), int(v)))
    edges = []
    for i, (u, v) in enumerate(sorted(pairs)):
        k = 1 + min(int(rng.geometric(0.4)), 8)
        ts = tuple(sorted(set(float(int(x))
                              for x in rng.uniform(t0, t0 + span, k))))
        edges.append(tm.EdgeRecord(f"e{i}", verts[u], verts[v], 1.0, ts))
    return tm.TemporalGraph(verts, edges, directed=True)


def bench_kernels(args):
    rng = np.random.default_rng(args.seed)
    g = synthetic_graph(rng, args.vertices, args.edges)
    print(f"instance: {len(g.vertices)} vertices, {len(g.edges)} edges, "
          f"{g.num_contacts()} edge-time pairs")
    cfg = tm.PenaltyConfig("mul-edge", tm.PhiSpec("exp", 1e-7, t0=1_082_000_000))
    ctx = SearchContext(g, cfg)
    n_edges = len(g.edges)
    queries = [(int(a), int(b)) for a, b in
               rng.integers(0, len(g.vertices), (args.queries, 2)) if a != b]
    rho = rng.uniform(0.0, 1e-3, n_edges)
    a = np.zeros(n_edges)

    kernels = [("pure", run_search_pure)]
    if run_search_compiled is not None:
        kernels.append(("compiled", run_search_compiled))
    else:
        print("compiled kernel not built; benchmarking pure only")

    times = {}
    for name, kern in kernels:
        tic = time.perf_counter()
        labels = 0
        for s, t in queries:
            out = kern(len(g.vertices), ctx.vptr, ctx.arc_head, ctx.arc_edge,
                       ctx.tptr, ctx.times, ctx.phis, s, t, a, rho)
            labels += len(out[0])
        dt = time.perf_counter() - tic
        times[name] = dt
        print(f"{name:9s} {1000 * dt / len(queries):8.2f} ms/query "
              f"({labels} labels total)")
    if len(times) == 2:
        print(f"speedup: {times['pure'] / times['compiled']:.1f}x")


def bench_full(args):
    rng = np.random.default_rng(args.seed)
    g = synthetic_graph(rng, args.vertices, args.edges)
    s, t = g.vertices[0], g.vertices[1]
    t0 = min(e.times[0] for e in g.edges if e.tail == s)
    phi = tm.PhiSpec("exp", 1e-7, t0=t0)
    for mode in ("mul-edge", "mul-object"):
        spec = tm.FamilySpec(s, t, 2.0, tm.PenaltyConfig(mode, phi))
        tic = time.perf_counter()
        res = tm.modulus(g, spec, 1e-4)
        print(f"{mode}: modulus={res.value:.4f} iterations={res.iterations} "
              f"active={len(res.active_paths)} "
              f"time={time.perf_counter() - tic:.1f}s "
              f"[{tm.active_backend()} kernel]")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--vertices", type=int, default=1900)
    ap.add_argument("--edges", type=int, default=20000)
    ap.add_argument("--queries", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--full", action="store_true",
                    help="run a full modulus solve instead of kernel queries")
    args = ap.parse_args()
    if args.full:
        bench_full(args)
    else:
        bench_kernels(args)


if __name__ == "__main__":
    main()
