"""Bipartite matchings: Hopcroft-Karp, exact perfect-matching counts and a round-based local scheme."""

from __future__ import annotations

import csv
import io
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import NoDisjointMatchings, NotBipartite, NotRegularBipartite, TooLarge
from .graph import Graph, bipartition
from .labels import Labeling
from .structures import UNMATCHED, Matching

INF = float("inf")
COUNT_MAX_VERTICES = 48


def _sides(g: Graph, sides=None) -> tuple:
    if sides is not None:
        return tuple(sides)
    wit = bipartition(g, require_connected=False)
    if not wit.present:
        raise NotBipartite("matching routines need a bipartite graph")
    return wit.side


def hopcroft_karp(g: Graph, sides=None) -> Matching:
    """Maximum matching of a bipartite (multi)graph.

    ``sides[v]`` in {1, 2} may be supplied; otherwise a 2-colouring is computed.
    """
    side = _sides(g, sides)
    left = [v for v in range(g.n) if side[v] == 1]
    mate = [UNMATCHED] * g.n
    medge = [UNMATCHED] * g.n
    dist = [INF] * g.n
    adj = g.adj

    def bfs() -> bool:
        queue = deque()
        for u in left:
            if mate[u] == UNMATCHED:
                dist[u] = 0
                queue.append(u)
            else:
                dist[u] = INF
        found = False
        while queue:
            u = queue.popleft()
            for w, _ in adj[u]:
                x = mate[w]
                if x == UNMATCHED:
                    found = True
                elif dist[x] == INF:
                    dist[x] = dist[u] + 1
                    queue.append(x)
        return found

    def dfs(root: int) -> bool:
        # iterative DFS along the BFS layering
        stack = [(root, iter(adj[root]))]
        path = []
        while stack:
            u, it = stack[-1]
            advanced = False
            for w, e in it:
                x = mate[w]
                if x == UNMATCHED:
                    path.append((u, w, e))
                    for uu, ww, ee in path:
                        mate[uu], mate[ww] = ww, uu
                        medge[uu] = medge[ww] = ee
                    return True
                if dist[x] == dist[u] + 1:
                    path.append((u, w, e))
                    stack.append((x, iter(adj[x])))
                    advanced = True
                    break
            if not advanced:
                dist[u] = INF
                stack.pop()
                if path:
                    path.pop()
        return False

    while bfs():
        for u in left:
            if mate[u] == UNMATCHED:
                dfs(u)
    return Matching(tuple(mate), tuple(medge))


def deficiency(g: Graph, sides=None) -> int:
    """Number of vertices left uncovered by a maximum matching."""
    return g.n - 2 * hopcroft_karp(g, sides).size


def enumerate_perfect_matchings(g: Graph, cap: int = COUNT_MAX_VERTICES) -> int:
    """Exact number of perfect matchings.

    Recursion on the lowest uncovered vertex, memoised on the set of covered
    vertices.  Works for any graph, the memo keeps bipartite inputs cheap.
    """
    if g.n > cap:
        raise TooLarge(f"perfect matching count limited to {cap} vertices, got {g.n}")
    if g.n % 2:
        return 0
    nbr = [0] * g.n
    for u, v in g.edges:
        if u != v:
            nbr[u] |= 1 << v
            nbr[v] |= 1 << u
    full = (1 << g.n) - 1
    memo = {full: 1}

    def count(mask: int) -> int:
        if mask in memo:
            return memo[mask]
        free = ~mask & full
        v = (free & -free).bit_length() - 1
        options = nbr[v] & free
        total = 0
        while options:
            low = options & -options
            total += count(mask | (1 << v) | low)
            options ^= low
        memo[mask] = total
        return total

    import sys
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, g.n + 100))
    try:
        return count(0)
    finally:
        sys.setrecursionlimit(limit)


# local augmenting scheme

@dataclass
class RoundStats:
    """One row per round: ``(round, max path length, flips, unmatched fraction)``."""

    rows: list = field(default_factory=list)

    def unmatched(self) -> list:
        return [r[3] for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["round", "path_len", "flips", "unmatched_frac"])
        for k, length, flips, frac in self.rows:
            w.writerow([k, length, flips, repr(float(frac))])
        return buf.getvalue()


def _label_array(g: Graph, labels, seed: int) -> np.ndarray:
    if labels is None:
        return Labeling(seed).array(g.n)
    if isinstance(labels, Labeling):
        return labels.array(g.n)
    return np.asarray(labels, dtype=float)


def local_matching_rounds(g: Graph, labels=None, k_max: int = 12, seed: int = 0,
                          sides=None) -> tuple:
    """Round-based augmenting scheme driven by vertex labels.

    Round ``k`` repeatedly augments along paths of length at most ``2k - 1``.
    Each free vertex of side 1 proposes one shortest augmenting path (breadth
    first, neighbors scanned in label order, ties between endpoints broken by
    path priority); proposals are accepted greedily in priority order
    ``(min label on path, labels along path)`` while vertex-disjoint, and all
    accepted paths are flipped.  Returns ``(Matching, RoundStats)``.
    """
    side = _sides(g, sides)
    lab = _label_array(g, labels, seed)
    n = g.n
    # neighbor lists sorted by label so scans are label driven, not id driven
    adj = [sorted(g.adj[v], key=lambda we: (lab[we[0]], we[0])) for v in range(n)]
    mate = [UNMATCHED] * n
    medge = [UNMATCHED] * n
    left = [v for v in range(n) if side[v] == 1]
    stats = RoundStats()
    n_unmatched = n

    def propose(u: int, depth: int):
        parent = {u: None}
        frontier = [u]
        for _ in range(depth):
            ends = []
            nxt = []
            for x in frontier:
                for w, e in adj[x]:
                    if w in parent or e == medge[x]:
                        continue
                    parent[w] = (x, e)
                    y = mate[w]
                    if y == UNMATCHED:
                        ends.append(w)
                    elif y not in parent:
                        parent[y] = (w, medge[w])
                        nxt.append(y)
            if ends:
                best = None
                for w in ends:
                    verts, edges = [w], []
                    x = w
                    while parent[x] is not None:
                        x, e = parent[x]
                        verts.append(x)
                        edges.append(e)
                    verts.reverse()
                    edges.reverse()
                    key = (min(lab[v] for v in verts), tuple(lab[v] for v in verts))
                    if best is None or key < best[0]:
                        best = (key, verts, edges)
                return best
            if not nxt:
                return None
            frontier = nxt
        return None

    for k in range(1, k_max + 1):
        flips = 0
        while n_unmatched:
            proposals = []
            for u in left:
                if mate[u] == UNMATCHED:
                    p = propose(u, k)
                    if p is not None:
                        proposals.append(p)
            if not proposals:
                break
            proposals.sort(key=lambda p: p[0])
            used = set()
            for _, verts, edges in proposals:
                if any(v in used for v in verts):
                    continue
                used.update(verts)
                # verts alternate side1, side2, side1, ...; edges at even positions enter the matching
                for i in range(0, len(verts), 2):
                    a, b, e = verts[i], verts[i + 1], edges[i]
                    mate[a], mate[b] = b, a
                    medge[a] = medge[b] = e
                flips += 1
                n_unmatched -= 2
        stats.rows.append((k, 2 * k - 1, flips, n_unmatched / n if n else 0.0))
    return Matching(tuple(mate), tuple(medge)), stats


def two_disjoint_perfect_matchings(g: Graph) -> tuple:
    """Two edge-disjoint perfect matchings of a regular bipartite graph of degree >= 2."""
    wit = bipartition(g, require_connected=False)
    deg = g.degrees
    if not wit.present or g.n == 0 or deg.min() != deg.max() or deg[0] < 2:
        raise NotRegularBipartite("need a bipartite regular graph of degree >= 2")
    m1 = hopcroft_karp(g, wit.side)
    if not m1.is_perfect():
        raise NoDisjointMatchings("no perfect matching found")
    used = set(m1.edge_ids())
    rest = [e for e in range(g.m) if e not in used]
    sub = g.edge_subgraph(rest)
    m2s = hopcroft_karp(sub, wit.side)
    if not m2s.is_perfect():
        raise NoDisjointMatchings("no second perfect matching after removing the first")
    m2 = Matching(m2s.partner, tuple(rest[e] if e != UNMATCHED else UNMATCHED for e in m2s.edge))
    return m1, m2


def odd_component_certificate(g: Graph, cut) -> dict:
    """Tutte-style obstruction to a perfect matching.

    Removing ``cut`` leaves components; a perfect matching must match every
    odd component to a distinct cut vertex.  The bipartite graph (odd
    components vs cut vertices) is matched exactly; a positive deficiency
    proves that ``g`` has no perfect matching.
    """
    cut = sorted(set(int(v) for v in cut))
    in_cut = np.zeros(g.n, dtype=bool)
    in_cut[cut] = True
    keep = [e for e, (u, v) in enumerate(g.edges) if not in_cut[u] and not in_cut[v]]
    comps = [c for c in g.edge_subgraph(keep).components() if not in_cut[c[0]]]
    odd = [c for c in comps if len(c) % 2]
    comp_of = {}
    for i, c in enumerate(odd):
        for v in c:
            comp_of[v] = i
    cut_index = {v: len(odd) + j for j, v in enumerate(cut)}
    edges = set()
    for u, v in g.edges:
        for a, b in ((u, v), (v, u)):
            if a in comp_of and b in cut_index:
                edges.add((comp_of[a], cut_index[b]))
    h = Graph(len(odd) + len(cut), sorted(edges))
    sides = tuple([1] * len(odd) + [2] * len(cut))
    mm = hopcroft_karp(h, sides)
    return {"odd_components": len(odd), "cut_size": len(cut),
            "matched": mm.size, "deficiency": len(odd) - mm.size}
