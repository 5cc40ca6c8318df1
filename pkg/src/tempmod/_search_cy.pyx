# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled time-respecting shortest-path kernel.

Mirrors ``_search_py.run_search`` exactly: identical dominance rules, heap
ordering and tie-breaking, so both backends return identical label streams.
Only the dominance-enabled fast path is compiled; the exhaustive testing
mode lives in the pure kernel.
"""

from libcpp.vector cimport vector

import numpy as np


cdef struct HeapItem:
    double tau
    double cost
    long seq


cdef inline bint _less(HeapItem a, HeapItem b) noexcept:
    if a.tau != b.tau:
        return a.tau < b.tau
    if a.cost != b.cost:
        return a.cost < b.cost
    return a.seq < b.seq


cdef inline void _heap_push(vector[HeapItem]& heap, HeapItem item) noexcept:
    cdef size_t i = heap.size()
    cdef size_t parent
    heap.push_back(item)
    while i > 0:
        parent = (i - 1) >> 1
        if _less(heap[i], heap[parent]):
            heap[i] = heap[parent]
            heap[parent] = item
            i = parent
        else:
            break


cdef inline HeapItem _heap_pop(vector[HeapItem]& heap) noexcept:
    cdef HeapItem top = heap[0]
    cdef HeapItem last = heap[heap.size() - 1]
    heap.pop_back()
    cdef size_t n = heap.size()
    if n == 0:
        return top
    cdef size_t i = 0
    cdef size_t child
    while True:
        child = 2 * i + 1
        if child >= n:
            break
        if child + 1 < n and _less(heap[child + 1], heap[child]):
            child += 1
        if _less(heap[child], last):
            heap[i] = heap[child]
            i = child
        else:
            break
    heap[i] = last
    return top


cdef inline int _bisect_right(double[:] arr, double x, int lo, int hi) noexcept:
    cdef int mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if x < arr[mid]:
            hi = mid
        else:
            lo = mid + 1
    return lo


def run_search(int n, vptr_in, arc_head_in, arc_edge_in, tptr_in, times_in,
               phis_in, int source, int target, step_a_in, step_b_in):
    cdef int[:] vptr = np.ascontiguousarray(vptr_in, dtype=np.int32)
    cdef int[:] arc_head = np.ascontiguousarray(arc_head_in, dtype=np.int32)
    cdef int[:] arc_edge = np.ascontiguousarray(arc_edge_in, dtype=np.int32)
    cdef int[:] tptr = np.ascontiguousarray(tptr_in, dtype=np.int32)
    cdef double[:] times = np.ascontiguousarray(times_in, dtype=np.float64)
    cdef double[:] phis = np.ascontiguousarray(phis_in, dtype=np.float64)
    cdef double[:] step_a = np.ascontiguousarray(step_a_in, dtype=np.float64)
    cdef double[:] step_b = np.ascontiguousarray(step_b_in, dtype=np.float64)

    cdef vector[int] vert, hops, parent, arc, tidx
    cdef vector[double] tau, cost
    cdef vector[char] alive
    cdef vector[vector[int]] frontier = vector[vector[int]](n)
    cdef vector[HeapItem] heap

    vert.push_back(source)
    tau.push_back(0.0)
    cost.push_back(0.0)
    hops.push_back(0)
    parent.push_back(-1)
    arc.push_back(-1)
    tidx.push_back(-1)
    alive.push_back(1)
    frontier[source].push_back(0)

    cdef HeapItem item
    item.tau = 0.0
    item.cost = 0.0
    item.seq = 0
    _heap_push(heap, item)

    cdef int idx, v, h_cur, a_idx, e, k, j, pos, w, new_idx
    cdef int lo, hi
    cdef double t_cur, c_cur, t_new, c_new
    cdef vector[int]* front

    while heap.size() > 0:
        item = _heap_pop(heap)
        idx = <int>item.seq
        if not alive[idx]:
            continue
        v = vert[idx]
        if v == target:
            continue  # extensions of a target arrival never improve on it
        t_cur = tau[idx]
        c_cur = cost[idx]
        h_cur = hops[idx]
        for a_idx in range(vptr[v], vptr[v + 1]):
            e = arc_edge[a_idx]
            lo = tptr[e]
            hi = tptr[e + 1]
            k = _bisect_right(times, t_cur, lo, hi)
            if k >= hi:
                continue
            t_new = times[k]
            c_new = c_cur + step_a[e] + step_b[e] * phis[k]
            w = arc_head[a_idx]

            # Frontier insert with Pareto dominance on (arrival, cost);
            # equal states keep the fewer-hop label.
            front = &frontier[w]
            pos = 0
            hi = <int>front.size()
            while pos < hi:
                j = (pos + hi) >> 1
                if t_new < tau[front[0][j]]:
                    hi = j
                else:
                    pos = j + 1
            if pos > 0:
                j = front[0][pos - 1]
                if cost[j] < c_new or (cost[j] == c_new and tau[j] < t_new):
                    continue
                if cost[j] == c_new and tau[j] == t_new:
                    if hops[j] <= h_cur + 1:
                        continue
                    alive[j] = 0
                    front.erase(front.begin() + (pos - 1))
                    pos -= 1
                elif tau[j] == t_new:
                    alive[j] = 0
                    front.erase(front.begin() + (pos - 1))
                    pos -= 1
            while pos < <int>front.size() and cost[front[0][pos]] >= c_new:
                alive[front[0][pos]] = 0
                front.erase(front.begin() + pos)

            new_idx = <int>vert.size()
            vert.push_back(w)
            tau.push_back(t_new)
            cost.push_back(c_new)
            hops.push_back(h_cur + 1)
            parent.push_back(idx)
            arc.push_back(a_idx)
            tidx.push_back(k)
            alive.push_back(1)
            front.insert(front.begin() + pos, new_idx)
            item.tau = t_new
            item.cost = c_new
            item.seq = new_idx
            _heap_push(heap, item)

    target_ids = [frontier[target][j] for j in range(frontier[target].size())
                  if alive[frontier[target][j]]]

    cdef size_t m = vert.size()
    vert_a = np.empty(m, dtype=np.int32)
    tau_a = np.empty(m, dtype=np.float64)
    cost_a = np.empty(m, dtype=np.float64)
    hops_a = np.empty(m, dtype=np.int32)
    parent_a = np.empty(m, dtype=np.int32)
    arc_a = np.empty(m, dtype=np.int32)
    tidx_a = np.empty(m, dtype=np.int32)
    cdef int[:] vert_v = vert_a
    cdef double[:] tau_v = tau_a
    cdef double[:] cost_v = cost_a
    cdef int[:] hops_v = hops_a
    cdef int[:] parent_v = parent_a
    cdef int[:] arc_v = arc_a
    cdef int[:] tidx_v = tidx_a
    cdef size_t i
    for i in range(m):
        vert_v[i] = vert[i]
        tau_v[i] = tau[i]
        cost_v[i] = cost[i]
        hops_v[i] = hops[i]
        parent_v[i] = parent[i]
        arc_v[i] = arc[i]
        tidx_v[i] = tidx[i]

    return (vert_a, tau_a, cost_a, hops_a, parent_a, arc_a, tidx_a,
            np.asarray(target_ids, dtype=np.int32))
