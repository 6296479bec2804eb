"""Compiled branch-and-bound kernel for the lattice oracle.

The oracle fixes one "free" coordinate ``j`` whose stress value is solved from
the budget ``sum f A = 1``.  The remaining coordinates run over lattice values
and are split into two halves: the outer half is enumerated directly and the
inner half (at most two coordinates) is pre-enumerated, sorted by its mass
contribution and indexed by a max segment tree.  For each outer combination
the tree is searched depth first, pruning nodes whose upper bound cannot beat
the incumbent.  The bound uses that the free coordinate's contribution is
convex in the total mass, so over an interval it peaks at an endpoint.
"""

import math

import numpy as np
from numba import njit

_LOG2 = math.log(2.0)
_TOL = 1e-12


@njit(cache=True)
def _free_term(total_mass, f_j):
    a = (1.0 - total_mass) / f_j
    return f_j * a * math.log(a) / _LOG2


@njit(cache=True)
def search_free_coordinate(
    outer_mass,
    outer_gain,
    outer_counts,
    inner_mass,
    inner_gain,
    node_start,
    node_end,
    node_max,
    f_j,
    window_lo,
    window_hi,
    best,
):
    """Maximize outer + inner gain + free-coordinate term over the lattice.

    Returns ``(best, outer_index_vector, inner_index, leaves, nodes)``;
    ``inner_index`` is -1 when nothing beat the incoming ``best``.
    """
    k1 = outer_counts.size
    n2 = inner_mass.size
    idx = np.zeros(k1, dtype=np.int64)
    best_outer = np.zeros(k1, dtype=np.int64)
    best_inner = -1
    leaves = 0
    nodes = 0
    stack = np.empty(128, dtype=np.int64)
    while True:
        p1 = 0.0
        g1 = 0.0
        for c in range(k1):
            p1 += outer_mass[c, idx[c]]
            g1 += outer_gain[c, idx[c]]
        lo_need = window_lo - p1
        hi_need = window_hi - p1
        if inner_mass[0] <= hi_need + _TOL and inner_mass[n2 - 1] >= lo_need - _TOL:
            top = 0
            stack[top] = 1
            top += 1
            while top > 0:
                top -= 1
                node = stack[top]
                s = node_start[node]
                if s >= n2:
                    continue
                e = min(node_end[node], n2)
                nodes += 1
                lo_p = max(inner_mass[s], lo_need)
                hi_p = min(inner_mass[e - 1], hi_need)
                if lo_p > hi_p + _TOL:
                    continue
                lo_p = min(max(lo_p, lo_need), hi_need)
                hi_p = min(max(hi_p, lo_need), hi_need)
                edge = max(_free_term(p1 + lo_p, f_j), _free_term(p1 + hi_p, f_j))
                if g1 + node_max[node] + edge <= best + _TOL:
                    continue
                if e - s == 1:
                    leaves += 1
                    p = inner_mass[s]
                    if p < lo_need - _TOL or p > hi_need + _TOL:
                        continue
                    p = min(max(p, lo_need), hi_need)
                    value = g1 + inner_gain[s] + _free_term(p1 + p, f_j)
                    if value > best:
                        best = value
                        best_inner = s
                        for c in range(k1):
                            best_outer[c] = idx[c]
                else:
                    stack[top] = 2 * node + 1
                    stack[top + 1] = 2 * node
                    top += 2
        # odometer over the outer lattice
        c = 0
        while c < k1:
            idx[c] += 1
            if idx[c] < outer_counts[c]:
                break
            idx[c] = 0
            c += 1
        if c == k1:
            break
    return best, best_outer, best_inner, leaves, nodes


def build_tree(values):
    """Max segment tree over ``values`` with per-node leaf ranges."""
    n = values.size
    size = 1
    while size < n:
        size *= 2
    node_max = np.full(2 * size, -np.inf)
    node_max[size : size + n] = values
    for i in range(size - 1, 0, -1):
        node_max[i] = max(node_max[2 * i], node_max[2 * i + 1])
    node_start = np.zeros(2 * size, dtype=np.int64)
    node_end = np.zeros(2 * size, dtype=np.int64)
    node_start[size:] = np.arange(size)
    node_end[size:] = np.arange(size) + 1
    for i in range(size - 1, 0, -1):
        node_start[i] = node_start[2 * i]
        node_end[i] = node_end[2 * i + 1]
    return node_start, node_end, node_max
