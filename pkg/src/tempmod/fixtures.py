"""Built-in fixture graphs for the golden examples and randomized checks."""

from __future__ import annotations

import math

import numpy as np

from .penalty import PenaltyConfig, PhiSpec
from .solver import FamilySpec
from .tempgraph import EdgeRecord, TemporalGraph


def multiedge_graph(times: list[float], weights: list[float] | None = None) -> TemporalGraph:
    """Parallel edges a--b, edge i available only at times[i]."""
    weights = weights or [1.0] * len(times)
    edges = [EdgeRecord(f"e{i}", "a", "b", w, (t,))
             for i, (t, w) in enumerate(zip(times, weights))]
    return TemporalGraph(["a", "b"], edges, directed=False)


def path_graph(times: list[float]) -> TemporalGraph:
    """A single path a--...--b, hop i available only at times[i]."""
    n = len(times)
    verts = ["a"] + [f"x{i}" for i in range(1, n)] + ["b"]
    edges = [EdgeRecord(f"e{i}", verts[i], verts[i + 1], 1.0, (times[i],))
             for i in range(n)]
    return TemporalGraph(verts, edges, directed=False)


def glued_paths_graph(k: int, times: list[float]) -> TemporalGraph:
    """k disjoint copies of a path with the given hop times, glued at a and b."""
    r = len(times)
    verts = ["a", "b"]
    edges = []
    for i in range(k):
        prev = "a"
        for j in range(r):
            nxt = "b" if j == r - 1 else f"x{i}_{j}"
            if nxt != "b":
                verts.append(nxt)
            edges.append(EdgeRecord(f"p{i}e{j}", prev, nxt, 1.0, (times[j],)))
            prev = nxt
    return TemporalGraph(verts, edges, directed=False)


def paw_graph() -> TemporalGraph:
    """Triangle a-b-t with a tail s-a; times 1, 2, 3 on the long route, 4 on
    the shortcut a-t.  Two time-respecting s-to-t paths exist."""
    return TemporalGraph(["s", "a", "b", "t"], [
        EdgeRecord("sa", "s", "a", 1.0, (1.0,)),
        EdgeRecord("ab", "a", "b", 1.0, (2.0,)),
        EdgeRecord("bt", "b", "t", 1.0, (3.0,)),
        EdgeRecord("at", "a", "t", 1.0, (4.0,)),
    ], directed=False)


def paw_phi(alpha: float = 2.0) -> PhiSpec:
    """Exponential penalty with value 1 at time 3 and ``alpha`` at time 4."""
    return PhiSpec("exp", math.log(alpha), t0=3.0)


def decreasing_times_graph() -> TemporalGraph:
    """Path a--b--c whose times decrease: no time-respecting a-to-c path."""
    return TemporalGraph(["a", "b", "c"], [
        EdgeRecord("ab", "a", "b", 1.0, (2.0,)),
        EdgeRecord("bc", "b", "c", 1.0, (1.0,)),
    ], directed=False)


def static_penalty() -> PenaltyConfig:
    return PenaltyConfig("mul-edge", PhiSpec("const", 1.0))


def random_instance(rng: np.random.Generator, *, max_vertices: int = 8,
                    max_edge_time_pairs: int = 15):
    """A small random temporal graph with a (graph, source, target, mode, p,
    penalty) tuple suitable for oracle-equivalence checks.

    Mode and exponent cycle deterministically with the rng stream; the
    source/target pair is redrawn a few times to bias toward nonempty
    families.
    """
    n = int(rng.integers(3, max_vertices + 1))
    verts = [f"v{i}" for i in range(n)]
    directed = bool(rng.integers(0, 2))
    budget = int(rng.integers(4, max_edge_time_pairs + 1))
    edges = []
    total = 0
    eid = 0
    while total < budget:
        u, v = rng.choice(n, 2, replace=False)
        ntimes = int(rng.integers(1, 4))
        times = tuple(sorted(rng.choice(np.arange(1.0, 11.0), ntimes, replace=False)))
        w = float(rng.uniform(0.5, 2.0))
        edges.append(EdgeRecord(f"e{eid}", verts[u], verts[v], w, times))
        eid += 1
        total += ntimes
    g = TemporalGraph(verts, edges, directed=directed)

    mode = ("mul-edge", "add-edge", "mul-object", "add-object")[int(rng.integers(0, 4))]
    p = (1.5, 2.0, 3.0)[int(rng.integers(0, 3))]
    if mode.startswith("mul"):
        phi = PhiSpec("affine", float(rng.uniform(0.0, 0.8)))
    else:
        phi = PhiSpec("exp0", float(rng.uniform(0.002, 0.03)))
    cfg = PenaltyConfig(mode, phi)

    from .paths import SearchContext
    ctx = SearchContext(g, cfg)
    s, t = (verts[i] for i in rng.choice(n, 2, replace=False))
    for _ in range(3):
        if ctx.query(s, t, np.zeros(len(edges))) is not None:
            break
        s, t = (verts[i] for i in rng.choice(n, 2, replace=False))

    return g, FamilySpec(s, t, p, cfg)
