"""Pure-Python time-respecting shortest-path kernel.

Label-setting search over (vertex, arrival-time) states with Pareto
dominance on (arrival, accumulated cost).  The compiled kernel in
``_search_cy`` implements the identical algorithm; both must produce
identical label streams so results are backend-independent.

Step cost of traversing edge e at time t is ``a[e] + b[e] * phi(t)``, which
covers all penalty modes (per-object modes use b = 0 and apply the penalty
to the accumulated total afterwards).
"""

from __future__ import annotations

import heapq
from bisect import bisect_right

import numpy as np


def run_search(n, vptr, arc_head, arc_edge, tptr, times, phis,
               source, target, step_a, step_b,
               dominance: bool = True, expand_all: bool = False):
    """Explore all time-respecting paths from ``source``, cheapest first.

    Returns per-label arrays (vertex, arrival, cost, hops, parent, arc,
    time-index) plus the indices of the surviving labels at ``target``,
    ordered by arrival time.  With ``dominance=False`` (and usually
    ``expand_all=True``) every reachable label is kept; that mode is an
    exhaustive oracle for small instances only.
    """
    vptr = list(vptr)
    arc_head = list(arc_head)
    arc_edge = list(arc_edge)
    tptr = list(tptr)
    times = list(times)
    phis = list(phis)
    step_a = list(step_a)
    step_b = list(step_b)

    vert = [source]
    tau = [0.0]
    cost = [0.0]
    hops = [0]
    parent = [-1]
    arc = [-1]
    tidx = [-1]
    alive = [True]

    # Per-vertex Pareto frontier: label ids ordered by strictly increasing
    # arrival with strictly decreasing cost (ftau mirrors the arrivals).
    frontier: list[list[int]] = [[] for _ in range(n)]
    ftau: list[list[float]] = [[] for _ in range(n)]
    frontier[source].append(0)
    ftau[source].append(0.0)

    heap: list[tuple[float, float, int]] = [(0.0, 0.0, 0)]

    def new_label(v, t_new, c_new, h_new, par, a_idx, k):
        idx = len(vert)
        vert.append(v)
        tau.append(t_new)
        cost.append(c_new)
        hops.append(h_new)
        parent.append(par)
        arc.append(a_idx)
        tidx.append(k)
        alive.append(True)
        heapq.heappush(heap, (t_new, c_new, idx))
        return idx

    def insert(v, t_new, c_new, h_new, par, a_idx, k):
        front = frontier[v]
        fts = ftau[v]
        pos = bisect_right(fts, t_new)
        if pos > 0:
            j = front[pos - 1]
            if cost[j] < c_new or (cost[j] == c_new and tau[j] < t_new):
                return
            if cost[j] == c_new and tau[j] == t_new:
                if hops[j] <= h_new:
                    return
                # Equal state with fewer hops replaces the old label.
                alive[j] = False
                del front[pos - 1], fts[pos - 1]
                pos -= 1
            elif tau[j] == t_new:
                # Same arrival, strictly higher cost: old label is dominated.
                alive[j] = False
                del front[pos - 1], fts[pos - 1]
                pos -= 1
        while pos < len(front) and cost[front[pos]] >= c_new:
            alive[front[pos]] = False
            del front[pos], fts[pos]
        idx = new_label(v, t_new, c_new, h_new, par, a_idx, k)
        front.insert(pos, idx)
        fts.insert(pos, t_new)

    def insert_all(v, t_new, c_new, h_new, par, a_idx, k):
        idx = new_label(v, t_new, c_new, h_new, par, a_idx, k)
        frontier[v].append(idx)

    add = insert if dominance else insert_all

    while heap:
        t_cur, c_cur, idx = heapq.heappop(heap)
        if not alive[idx]:
            continue
        v = vert[idx]
        if v == target:
            continue  # extensions of a target arrival never improve on it
        h_cur = hops[idx]
        for a_idx in range(vptr[v], vptr[v + 1]):
            e = arc_edge[a_idx]
            lo, hi = tptr[e], tptr[e + 1]
            k = bisect_right(times, t_cur, lo, hi)
            if k >= hi:
                continue
            last = hi if expand_all else k + 1
            for kk in range(k, last):
                c_new = c_cur + step_a[e] + step_b[e] * phis[kk]
                add(arc_head[a_idx], times[kk], c_new, h_cur + 1, idx, a_idx, kk)

    target_ids = [i for i in frontier[target] if alive[i]]
    return (np.asarray(vert, dtype=np.int32), np.asarray(tau), np.asarray(cost),
            np.asarray(hops, dtype=np.int32), np.asarray(parent, dtype=np.int32),
            np.asarray(arc, dtype=np.int32), np.asarray(tidx, dtype=np.int32),
            np.asarray(target_ids, dtype=np.int32))
