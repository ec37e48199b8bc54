"""numba kernels for exhaustive sweeps over graph corpora."""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def parse_graph6_fixed(buf, n, line_len):
    """Neighbor bitmasks from a block of graph6 lines, all on ``n <= 62`` vertices.

    ``buf`` is the raw bytes (uint8) of ``count`` lines of ``line_len`` bytes
    including the newline.
    """
    count = buf.shape[0] // line_len
    nbr = np.zeros((count, n), dtype=np.int64)
    for g in range(count):
        base = g * line_len + 1
        k = 0
        for j in range(1, n):
            for i in range(j):
                byte = buf[base + k // 6] - 63
                if (byte >> (5 - k % 6)) & 1:
                    nbr[g, i] |= 1 << j
                    nbr[g, j] |= 1 << i
                k += 1
    return nbr


@njit(cache=True)
def adjacency_stack(nbr):
    count, n = nbr.shape
    A = np.zeros((count, n, n))
    for g in range(count):
        for i in range(n):
            for j in range(n):
                if (nbr[g, i] >> j) & 1:
                    A[g, i, j] = 1.0
    return A


@njit(cache=True)
def lemma_slacks(nbr, deg, rho2, side):
    """Worst slack of ``b' >= b / (rho^2 (1 - b) + b)`` per graph.

    ``side[g, 0] < 0`` selects the whole-graph check, otherwise ``side[g, i]``
    in {0, 1} and subsets are taken inside each side.
    """
    count, n = nbr.shape
    full = 1 << n
    low = np.zeros(full, dtype=np.int64)
    for mask in range(1, full):
        i = 0
        while not (mask >> i) & 1:
            i += 1
        low[mask] = i
    vol = np.zeros(full)
    nb = np.zeros(full, dtype=np.int64)
    out = np.empty(count)
    for g in range(count):
        r2 = rho2[g]
        for mask in range(1, full):
            i = low[mask]
            prev = mask & (mask - 1)
            vol[mask] = vol[prev] + deg[g, i]
            nb[mask] = nb[prev] | nbr[g, i]
        worst = np.inf
        if side[g, 0] < 0:
            total = vol[full - 1]
            for mask in range(1, full):
                b = vol[mask] / total
                bp = vol[nb[mask]] / total
                s = bp - b / (r2 * (1.0 - b) + b)
                if s < worst:
                    worst = s
        else:
            for s_id in range(2):
                own = 0
                for i in range(n):
                    if side[g, i] == s_id:
                        own |= 1 << i
                other = (full - 1) ^ own
                vs = vol[own]
                vo = vol[other]
                sub = own
                while sub:
                    b = vol[sub] / vs
                    bp = vol[nb[sub]] / vo
                    s = bp - b / (r2 * (1.0 - b) + b)
                    if s < worst:
                        worst = s
                    sub = (sub - 1) & own
        out[g] = worst
    return out


@njit(cache=True)
def bipartition_sides(nbr):
    """BFS 2-coloring per graph: ``side[g, i]`` in {0, 1}, or all -1 if an odd cycle exists."""
    count, n = nbr.shape
    side = np.full((count, n), -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    for g in range(count):
        ok = True
        for s in range(n):
            if side[g, s] >= 0:
                continue
            side[g, s] = 0
            head, tail = 0, 1
            queue[0] = s
            while head < tail and ok:
                v = queue[head]
                head += 1
                for u in range(n):
                    if (nbr[g, v] >> u) & 1:
                        if side[g, u] < 0:
                            side[g, u] = 1 - side[g, v]
                            queue[tail] = u
                            tail += 1
                        elif side[g, u] == side[g, v]:
                            ok = False
                            break
        if not ok:
            for i in range(n):
                side[g, i] = -1
    return side
