"""Time-respecting paths: representation, exhaustive enumeration, and the
minimum-length oracle used by the modulus solver.

A time-respecting path is a chained sequence of (edge, time) steps with
strictly increasing times, each time drawn from its edge's availability set,
and no edge used twice.  The enumerator is the brute-force oracle; the
search oracle finds a family member of minimum penalized length for a given
density without enumerating.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from typing import Mapping, NamedTuple, Optional

import numpy as np

from . import penalty as _pen
from ._search import get_kernel
from ._search_py import run_search as _run_search_pure
from .penalty import PenaltyConfig, SINGULAR_EPS
from .tempgraph import TemporalGraph


class PathStep(NamedTuple):
    edge: str
    time: float
    forward: bool


@dataclass(frozen=True)
class TemporalPath:
    """An ordered sequence of (edge, time, direction) steps from source to target."""

    source: str
    target: str
    steps: tuple[PathStep, ...]

    def __post_init__(self):
        if not self.steps:
            raise ValueError("a temporal path needs at least one step")
        ts = [s.time for s in self.steps]
        if any(a >= b for a, b in zip(ts, ts[1:])):
            raise ValueError(f"step times must strictly increase, got {ts}")
        ids = [s.edge for s in self.steps]
        if len(set(ids)) != len(ids):
            raise ValueError(f"an edge appears more than once: {ids}")

    def edge_ids(self) -> tuple[str, ...]:
        return tuple(s.edge for s in self.steps)

    @property
    def edge_set(self) -> frozenset[str]:
        """The projection to the aggregated graph (the set of edges used)."""
        return frozenset(s.edge for s in self.steps)

    @property
    def arrival_time(self) -> float:
        return self.steps[-1].time

    @property
    def hops(self) -> int:
        return len(self.steps)

    def time_of(self, edge_id: str) -> Optional[float]:
        for s in self.steps:
            if s.edge == edge_id:
                return s.time
        return None

    def validate_in(self, g: TemporalGraph) -> None:
        """Check chaining, edge membership and time availability against g."""
        at = self.source
        for s in self.steps:
            e = g.edges[g.edge_index[s.edge]]
            if s.forward:
                dep, arr = e.tail, e.head
            else:
                if g.directed:
                    raise ValueError(f"edge {s.edge} traversed backwards in a directed graph")
                dep, arr = e.head, e.tail
            if dep != at:
                raise ValueError(f"step on {s.edge} departs from {dep}, expected {at}")
            if s.time not in e.times:
                raise ValueError(f"time {s.time} not available on edge {s.edge}")
            at = arr
        if at != self.target:
            raise ValueError(f"path ends at {at}, expected {self.target}")


@dataclass
class EnumeratedFamily:
    paths: list[TemporalPath]
    truncated: bool = False


def _sorted_arcs(g: TemporalGraph) -> dict[str, list[tuple[str, str, bool]]]:
    """Outgoing arcs per vertex as (edge id, head, forward), sorted by edge id."""
    arcs: dict[str, list[tuple[str, str, bool]]] = {v: [] for v in g.vertices}
    for e in g.edges:
        arcs[e.tail].append((e.id, e.head, True))
        if not g.directed:
            arcs[e.head].append((e.id, e.tail, False))
    for v in arcs:
        arcs[v].sort()
    return arcs


def enumerate_trp(g: TemporalGraph, s: str, t: str, max_hops: int,
                  max_count: int = 100000, *,
                  allow_vertex_revisit: bool = False) -> EnumeratedFamily:
    """All time-respecting s-to-t paths with at most ``max_hops`` steps.

    Paths are vertex-simple by default; ``allow_vertex_revisit`` admits
    walks that reuse vertices (but never edges).  The extra members are
    implied constraints for the modulus problem, so the solver value does
    not depend on the choice.  Paths come out in lexicographic order of
    their (edge id, time) step sequences.  If more than ``max_count`` paths
    exist the list is cut off and the result is flagged as truncated.
    """
    if s == t:
        raise ValueError("source and target must differ")
    if s not in g.vertex_index or t not in g.vertex_index:
        raise ValueError("source/target not in graph")

    arcs = _sorted_arcs(g)
    by_id = {e.id: e for e in g.edges}
    out = EnumeratedFamily([])
    steps: list[PathStep] = []
    used_edges: set[str] = set()
    visited: set[str] = {s}

    def extend(v: str, last_t: float) -> bool:
        """DFS; returns False once the enumeration budget is exhausted."""
        if v == t and steps:
            if len(out.paths) >= max_count:
                out.truncated = True
                return False
            out.paths.append(TemporalPath(s, t, tuple(steps)))
            if not allow_vertex_revisit:
                return True  # no extension can end at t again
        if len(steps) >= max_hops:
            return True
        for edge_id, head, forward in arcs[v]:
            if edge_id in used_edges:
                continue
            if not allow_vertex_revisit and head in visited:
                continue
            times = by_id[edge_id].times
            for k in range(bisect_right(times, last_t), len(times)):
                steps.append(PathStep(edge_id, times[k], forward))
                used_edges.add(edge_id)
                if not allow_vertex_revisit:
                    visited.add(head)
                ok = extend(head, times[k])
                if not allow_vertex_revisit:
                    visited.discard(head)
                used_edges.discard(edge_id)
                steps.pop()
                if not ok:
                    return False
        return True

    extend(s, 0.0)
    return out


class SearchContext:
    """Prebuilt arc table for repeated minimum-length queries on one graph.

    Construction evaluates phi once per (edge, time) pair; queries then only
    depend on the density.  In add-object mode, edge-time pairs whose phi
    reaches 1 are dropped here: no feasible family member can use them.
    """

    def __init__(self, g: TemporalGraph, cfg: PenaltyConfig):
        self.graph = g
        self.cfg = cfg
        n_edges = len(g.edges)

        tptr = np.zeros(n_edges + 1, dtype=np.int32)
        times: list[float] = []
        phis: list[float] = []
        prune = cfg.mode == "add-object"
        for i, e in enumerate(g.edges):
            for t in e.times:
                ph = cfg.phi(t)
                if prune and ph >= 1.0 - SINGULAR_EPS:
                    continue
                times.append(t)
                phis.append(ph)
            tptr[i + 1] = len(times)
        self.tptr = tptr
        self.times = np.asarray(times)
        self.phis = np.asarray(phis)

        arcs = []  # (tail index, edge id, forward, head index, edge index)
        for i, e in enumerate(g.edges):
            if tptr[i] == tptr[i + 1]:
                continue
            ti, hi = g.vertex_index[e.tail], g.vertex_index[e.head]
            arcs.append((ti, e.id, 0, hi, i))
            if not g.directed:
                arcs.append((hi, e.id, 1, ti, i))
        arcs.sort()

        n = len(g.vertices)
        vptr = np.zeros(n + 1, dtype=np.int32)
        self.arc_head = np.asarray([a[3] for a in arcs], dtype=np.int32)
        self.arc_edge = np.asarray([a[4] for a in arcs], dtype=np.int32)
        self.arc_forward = np.asarray([a[2] == 0 for a in arcs], dtype=bool)
        for a in arcs:
            vptr[a[0] + 1] += 1
        np.cumsum(vptr, out=vptr)
        self.vptr = vptr

    def query(self, s: str, t: str, rho_full: np.ndarray, *,
              dominance: bool = True) -> Optional[tuple[TemporalPath, float]]:
        """Cheapest time-respecting s-to-t path under ``rho_full``, or None."""
        g, cfg = self.graph, self.cfg
        if s == t:
            raise ValueError("source and target must differ")
        n_edges = len(g.edges)
        mode = cfg.mode
        rho_full = np.ascontiguousarray(rho_full, dtype=np.float64)
        if mode == "mul-edge":
            a = np.zeros(n_edges)
            b = rho_full
        elif mode == "add-edge":
            a = rho_full
            b = np.ones(n_edges)
        else:
            a = rho_full
            b = np.zeros(n_edges)

        kernel = _run_search_pure if not dominance else get_kernel()
        kwargs = {} if dominance else {"dominance": False, "expand_all": True}
        vert, tau, cost, hops, parent, arc, tidx, target_ids = kernel(
            len(g.vertices), self.vptr, self.arc_head, self.arc_edge,
            self.tptr, self.times, self.phis,
            g.vertex_index[s], g.vertex_index[t], a, b, **kwargs)
        if len(target_ids) == 0:
            return None

        best = None
        best_key = None
        for i in target_ids:
            i = int(i)
            if mode == "mul-object":
                value = self.phis[tidx[i]] * cost[i]
            elif mode == "add-object":
                value = cost[i] / (1.0 - self.phis[tidx[i]])
            else:
                value = cost[i]
            key = (value, int(hops[i]), tau[i])
            if best_key is None or key < best_key:
                best_key = key
                best = i

        steps = []
        arrivals = []
        i = best
        while parent[i] >= 0:
            ai = int(arc[i])
            steps.append(PathStep(g.edges[self.arc_edge[ai]].id,
                                  float(self.times[tidx[i]]),
                                  bool(self.arc_forward[ai])))
            arrivals.append(g.vertices[vert[i]])
            i = int(parent[i])
        steps.reverse()
        arrivals.reverse()

        erased = _loop_erase(s, steps, arrivals)
        if len(erased) < len(steps):
            # The argmin label traced a walk with a vertex revisit (possible
            # only on zero-cost plateaus); erasing the loop cannot increase
            # the length, so the erased path is still a family minimizer.
            path = TemporalPath(s, t, tuple(erased))
            rho_map = {e.id: rho_full[k] for k, e in enumerate(g.edges)}
            return path, _pen.search_length(path, rho_map, cfg)
        return TemporalPath(s, t, tuple(steps)), float(best_key[0])


def _loop_erase(source: str, steps: list[PathStep],
                arrivals: list[str]) -> list[PathStep]:
    """Erase vertex revisits from a walk, keeping step order and times.

    The result is a vertex-simple (hence edge-simple) path with the same
    endpoints; since step costs are nonnegative its length never exceeds
    the walk's.
    """
    verts = [source]
    kept: list[PathStep] = []
    pos = {source: 0}
    for st, arr in zip(steps, arrivals):
        if arr in pos:
            j = pos[arr]
            for v in verts[j + 1:]:
                del pos[v]
            del verts[j + 1:]
            del kept[j:]
        else:
            kept.append(st)
            verts.append(arr)
            pos[arr] = len(verts) - 1
    return kept


def min_length_trp(g: TemporalGraph, s: str, t: str, rho: Mapping[str, float],
                   cfg: PenaltyConfig, *,
                   dominance: bool = True) -> Optional[tuple[TemporalPath, float]]:
    """Minimize the penalized length over all time-respecting s-to-t paths.

    Returns the minimizing path and its length (the raw additive form in
    add-edge mode, the usage-matrix form otherwise), or None when the family
    is empty.  Ties go to fewer hops, then earlier arrival.
    """
    ctx = SearchContext(g, cfg)
    rho_full = np.array([rho.get(e.id, 0.0) for e in g.edges], dtype=float)
    if np.any(rho_full < 0):
        raise ValueError("density must be nonnegative")
    return ctx.query(s, t, rho_full, dominance=dominance)
