"""Orientations, edge colorings and Schreier decorations, and the conversions between them."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (DegenerateClass, InvalidInput, NoDisjointMatchings, NotBalanced,
                     NotBipartite, NotEvenRegular, NotRegularBipartite, OddDegree)
from .graph import Graph, bipartition
from .labels import seed_rng
from .matching import hopcroft_karp, two_disjoint_perfect_matchings
from .star import StarGraph, matching_to_orientation
from .structures import (UNMATCHED, EdgeColoring, Matching, Orientation, SchreierDecoration,
                         UnorderedDecoration, verify_balanced, verify_coloring, verify_schreier)

__all__ = [
    "Orientation", "EdgeColoring", "SchreierDecoration", "UnorderedDecoration",
    "verify_balanced", "verify_coloring", "verify_schreier", "euler_orient",
    "konig_edge_coloring", "schreier_decorate_finite", "star_conversions",
    "in_out_subtree_decomposition", "pair_unordered_colors",
    "alternating_constraint_propagation", "lift_schreier", "forget_colors", "forget_order",
    "coloring_to_matching", "coloring_to_schreier", "schreier_to_matching",
    "schreier_to_coloring", "matching_to_schreier", "SubtreeDecomposition", "Propagation",
]


def euler_orient(g: Graph) -> Orientation:
    """Balanced orientation along Hierholzer closed trails, component by component."""
    for v in range(g.n):
        if g.degree(v) % 2:
            raise OddDegree(v, g.degree(v))
    head = [UNMATCHED] * g.m
    ptr = [0] * g.n
    for s in range(g.n):
        if ptr[s] == len(g.adj[s]):
            continue
        stack = [s]
        while stack:
            v = stack[-1]
            adj = g.adj[v]
            while ptr[v] < len(adj) and head[adj[ptr[v]][1]] != UNMATCHED:
                ptr[v] += 1
            if ptr[v] == len(adj):
                stack.pop()
                continue
            u, e = adj[ptr[v]]
            head[e] = u
            stack.append(u)
    return Orientation(tuple(head))


def forget_colors(sd: SchreierDecoration) -> Orientation:
    return sd.orientation


def forget_order(sd: SchreierDecoration) -> UnorderedDecoration:
    """Merge the last two colors into one unordered class (label ``d - 2``)."""
    if sd.d < 2:
        raise InvalidInput("forgetting the order of two colors needs d >= 2")
    return UnorderedDecoration(sd.orientation, tuple(min(c, sd.d - 2) for c in sd.color), sd.d)


# König colorings

def konig_edge_coloring(g: Graph, sides=None) -> EdgeColoring:
    """Proper ``Delta``-edge-coloring of a bipartite (multi)graph.

    The graph is padded to a ``Delta``-regular bipartite multigraph; each
    color class is a perfect matching of what is left, found by Hopcroft-Karp.
    """
    if sides is None:
        wit = bipartition(g, require_connected=False)
        if not wit.present:
            raise NotBipartite("König coloring needs a bipartite graph")
        sides = wit.side
    if g.m == 0:
        return EdgeColoring((), 0)
    k = int(g.degrees.max())
    left = [v for v in range(g.n) if sides[v] == 1]
    right = [v for v in range(g.n) if sides[v] == 2]
    size = max(len(left), len(right))
    pad_left = list(range(g.n, g.n + size - len(left)))
    pad_right = list(range(g.n + len(pad_left), g.n + len(pad_left) + size - len(right)))
    left += pad_left
    right += pad_right
    n = g.n + len(pad_left) + len(pad_right)
    deg = np.zeros(n, dtype=np.int64)
    deg[: g.n] = g.degrees
    lstubs = [v for v in left for _ in range(k - deg[v])]
    rstubs = [v for v in right for _ in range(k - deg[v])]
    edges = list(g.edges) + list(zip(lstubs, rstubs))
    side_all = [0] * n
    for v in left:
        side_all[v] = 1
    for v in right:
        side_all[v] = 2
    color = [UNMATCHED] * g.m
    alive = list(range(len(edges)))
    for c in range(k):
        h = Graph(n, [edges[e] for e in alive])
        mm = hopcroft_karp(h, side_all)
        if not mm.is_perfect():
            raise InvalidInput("regular completion lost its perfect matching")
        taken = set(mm.edge_ids())
        for local in taken:
            e = alive[local]
            if e < g.m:
                color[e] = c
        alive = [e for i, e in enumerate(alive) if i not in taken]
    return EdgeColoring(tuple(color), k)


def _regular_degree(g: Graph) -> int:
    deg = g.degrees
    if g.n == 0 or deg.min() != deg.max() or deg[0] % 2 or deg[0] == 0:
        raise NotEvenRegular("need a 2d-regular graph with d >= 1")
    return int(deg[0])


def schreier_decorate_finite(g: Graph, orientation: Optional[Orientation] = None) -> SchreierDecoration:
    """Euler orientation, then a König d-coloring of the tail/head double."""
    d = _regular_degree(g) // 2
    o = euler_orient(g) if orientation is None else orientation
    double = Graph(2 * g.n, [(o.tail(g, e), g.n + o.head[e]) for e in range(g.m)])
    col = konig_edge_coloring(double, tuple([1] * g.n + [2] * g.n))
    return SchreierDecoration(o, col.color, d)


# conversions on the star graph

def _check_star_regular(sg: StarGraph) -> int:
    try:
        return _regular_degree(sg.base) // 2
    except NotEvenRegular as exc:
        raise InvalidInput(f"base graph: {exc}") from exc


def coloring_to_matching(sg: StarGraph, col: EdgeColoring, c: int = 0) -> Matching:
    """Item 1 to item 2: one color class."""
    return Matching.from_edges(sg.star, [e for e, x in enumerate(col.color) if x == c])


def schreier_to_matching(sg: StarGraph, sd: SchreierDecoration, c: int = 0,
                         direction: str = "VE") -> Matching:
    """Item 3 to item 2: the color-``c`` edges going ``A_V -> A_E`` (or ``A_E -> A_V``)."""
    into_edge_side = direction == "VE"
    ids = [e for e, x in enumerate(sd.color)
           if x == c and sg.is_edge_type(sd.orientation.head[e]) == into_edge_side]
    return Matching.from_edges(sg.star, ids)


def schreier_to_coloring(sg: StarGraph, sd: SchreierDecoration) -> EdgeColoring:
    """Item 3 to item 1: color ``i`` becomes ``2i + 1`` on ``A_E -> A_V`` edges and ``2i`` otherwise."""
    out = []
    for e, x in enumerate(sd.color):
        toward_v = not sg.is_edge_type(sd.orientation.head[e])
        out.append(2 * x + 1 if toward_v else 2 * x)
    return EdgeColoring(tuple(out), 2 * sd.d)


def coloring_to_schreier(sg: StarGraph, col: EdgeColoring) -> SchreierDecoration:
    """Item 1 to item 3, the inverse of :func:`schreier_to_coloring`."""
    head = []
    for e, x in enumerate(col.color):
        a, b = sg.star.edges[e]        # a is the edge-type end (edge vertices come first)
        head.append(b if x % 2 else a)
    return SchreierDecoration(Orientation(tuple(head)), tuple(x // 2 for x in col.color), col.k // 2)


def _kdd_colors(rng: np.random.Generator, d: int, pi=None, fixed: int = 0) -> np.ndarray:
    """Random proper coloring ``gamma((alpha(i) + beta(j)) mod d)`` of K_{d,d}.

    With ``pi`` given, the perfect matching ``i -> pi[i]`` is forced into color ``fixed``.
    """
    alpha = rng.permutation(d)
    gamma = rng.permutation(d)
    if pi is None:
        beta = rng.permutation(d)
    else:
        s = int(rng.integers(d))
        beta = np.empty(d, dtype=np.int64)
        for i in range(d):
            beta[pi[i]] = (s - alpha[i]) % d
        j = int(np.flatnonzero(gamma == fixed)[0])
        gamma[j], gamma[s] = gamma[s], gamma[j]
    return gamma[(alpha[:, None] + beta[None, :]) % d]


def matching_to_schreier(sg: StarGraph, M: Matching, seed: int = 0, matched_color: int = 0) -> SchreierDecoration:
    """Item 2 to item 3 by two rounds of random K_{d,d} colorings.

    First round, around each ``v``: the copies of ``v`` and the edge vertices
    matched to them, oriented ``A_E -> A_V``, with the matching itself in
    ``matched_color``.  Second round: the copies of ``v`` and the edge
    vertices of edges leaving ``v``, oriented ``A_V -> A_E``.
    """
    g = sg.base
    d = _check_star_regular(sg)
    o = matching_to_orientation(sg, M)
    star = sg.star
    head = [UNMATCHED] * star.m
    color = [UNMATCHED] * star.m
    outgoing = [[] for _ in range(g.n)]
    for e in range(g.m):
        outgoing[o.tail(g, e)].append(e)
    for v in range(g.n):
        copies = list(sg.copies(v))
        inc = sorted(M.partner[a] for a in copies)
        pos = {x: j for j, x in enumerate(inc)}
        pi = [pos[M.partner[a]] for a in copies]
        table = _kdd_colors(seed_rng(seed, v, 0), d, pi, matched_color)
        for i, a in enumerate(copies):
            for j, x in enumerate(inc):
                e = star.edge_id(x, a)
                head[e], color[e] = a, int(table[i, j])
        outs = sorted(outgoing[v])
        table = _kdd_colors(seed_rng(seed, v, 1), d)
        for i, a in enumerate(copies):
            for j, x in enumerate(outs):
                e = star.edge_id(x, a)
                head[e], color[e] = x, int(table[i, j])
    return SchreierDecoration(Orientation(tuple(head)), tuple(color), d)


def star_conversions(sg: StarGraph, obj, seed: int = 0, color: int = 0) -> dict:
    """All three decorations of G* from any one of them.

    Returns ``{"coloring", "matching", "schreier"}``.  The matching is taken
    as color class ``color`` (from a coloring) or as the color-``color``
    ``A_V -> A_E`` edges (from a Schreier decoration).
    """
    d = _check_star_regular(sg)
    star = sg.star
    if isinstance(obj, EdgeColoring):
        bad = verify_coloring(star, obj)
        if bad or obj.k != 2 * d:
            raise InvalidInput(bad[0] if bad else f"expected {2 * d} colors, got {obj.k}")
        sd = coloring_to_schreier(sg, obj)
        return {"coloring": obj, "matching": coloring_to_matching(sg, obj, color), "schreier": sd}
    if isinstance(obj, Matching):
        bad = obj.check(star)
        if bad or not obj.is_perfect():
            raise InvalidInput(bad[0] if bad else "matching is not perfect")
        sd = matching_to_schreier(sg, obj, seed, color)
        return {"coloring": schreier_to_coloring(sg, sd), "matching": obj, "schreier": sd}
    if isinstance(obj, SchreierDecoration):
        bad = verify_schreier(star, obj)
        if bad:
            raise InvalidInput(bad[0])
        return {"coloring": schreier_to_coloring(sg, obj),
                "matching": schreier_to_matching(sg, obj, color), "schreier": obj}
    raise InvalidInput(f"cannot convert {type(obj).__name__}")


# tree constructions

def _roles(g: Graph, o: Orientation):
    ins = [[] for _ in range(g.n)]
    outs = [[] for _ in range(g.n)]
    for e, h in enumerate(o.head):
        ins[h].append(e)
        outs[g.other(e, h)].append(e)
    return ins, outs


@dataclass(frozen=True)
class SubtreeDecomposition:
    component: tuple        # edge -> component id
    per_vertex: tuple       # vertex -> number of distinct components meeting it

    @property
    def count(self) -> int:
        return len(set(self.component))


def in_out_subtree_decomposition(g: Graph, o: Orientation, vertices=None) -> SubtreeDecomposition:
    """Group edges sharing a vertex where both are incoming or both outgoing.

    Balance is required at ``vertices`` (all vertices by default, the
    interior for a ball).  On trees each balanced vertex meets exactly two
    components, its in-tree and its out-tree.
    """
    bad = verify_balanced(g, o, vertices)
    if bad:
        v, i, out = bad[0]
        raise NotBalanced(v, i, out)
    parent = list(range(g.m))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    ins, outs = _roles(g, o)
    for v in range(g.n):
        for group in (ins[v], outs[v]):
            for e in group[1:]:
                a, b = find(group[0]), find(e)
                if a != b:
                    parent[max(a, b)] = min(a, b)
    roots = [find(e) for e in range(g.m)]
    relabel = {}
    comp = tuple(relabel.setdefault(r, len(relabel)) for r in roots)
    per_vertex = tuple(len({comp[e] for _, e in g.adj[v]}) for v in range(g.n))
    return SubtreeDecomposition(comp, per_vertex)


def _signed_two_coloring(n_nodes: int, equal_pairs, unequal_pairs, start_color=None):
    """2-color nodes under equality / inequality constraints; ``None`` on contradiction."""
    nbrs = [[] for _ in range(n_nodes)]
    for a, b in equal_pairs:
        nbrs[a].append((b, 0))
        nbrs[b].append((a, 0))
    for a, b in unequal_pairs:
        nbrs[a].append((b, 1))
        nbrs[b].append((a, 1))
    col = [UNMATCHED] * n_nodes
    for s in range(n_nodes):
        if col[s] != UNMATCHED:
            continue
        col[s] = 0 if start_color is None else int(start_color[s])
        queue = deque([s])
        while queue:
            a = queue.popleft()
            for b, flip in nbrs[a]:
                want = col[a] ^ flip
                if col[b] == UNMATCHED:
                    col[b] = want
                    queue.append(b)
                elif col[b] != want:
                    return None
    return col


def pair_unordered_colors(g: Graph, ud: UnorderedDecoration, seed: int = 0,
                          max_tries: int = 64) -> SchreierDecoration:
    """Split the unordered class ``{d-2, d-1}`` into two Schreier colors.

    Every vertex pairs its two incoming class edges with its two outgoing
    ones by a random bijection drawn from ``(seed, vertex, attempt)``; paired
    edges share a color and the two edges on the same side of a vertex
    differ.  On a finite graph these constraints can clash, so up to
    ``max_tries`` fresh pairings are drawn; after that the pairing is read off
    a direct 2-coloring of the in/in and out/out constraints.
    """
    d = ud.d
    cls = d - 2
    ins, outs = _roles(g, ud.orientation)
    cin = [[e for e in ins[v] if ud.color[e] == cls] for v in range(g.n)]
    cout = [[e for e in outs[v] if ud.color[e] == cls] for v in range(g.n)]
    for v in range(g.n):
        if len(cin[v]) != 2 or len(cout[v]) != 2:
            raise DegenerateClass(f"vertex {v} has {len(cin[v])} incoming and {len(cout[v])} "
                                  f"outgoing edges in the unordered class")
    class_edges = [e for e in range(g.m) if ud.color[e] == cls]
    idx = {e: i for i, e in enumerate(class_edges)}
    unequal = []
    for v in range(g.n):
        unequal.append((idx[cin[v][0]], idx[cin[v][1]]))
        unequal.append((idx[cout[v][0]], idx[cout[v][1]]))
    col = None
    for attempt in range(max_tries):
        equal = []
        for v in range(g.n):
            flip = int(seed_rng(seed, v, attempt).integers(2))
            equal.append((idx[cin[v][0]], idx[cout[v][flip]]))
            equal.append((idx[cin[v][1]], idx[cout[v][1 - flip]]))
        col = _signed_two_coloring(len(class_edges), equal, unequal)
        if col is not None:
            break
    if col is None:
        coins = seed_rng(seed, g.n, max_tries).integers(2, size=len(class_edges))
        col = _signed_two_coloring(len(class_edges), [], unequal, coins)
        if col is None:
            raise InvalidInput("the unordered class admits no Schreier completion")
    color = list(ud.color)
    for e, c in zip(class_edges, col):
        color[e] = cls + c
    return SchreierDecoration(ud.orientation, tuple(color), d)


@dataclass(frozen=True)
class Propagation:
    forced: dict            # edge -> color in {0, 1}
    contradiction: bool
    conflict: Optional[tuple] = None   # (edge, required color, existing color)


def alternating_constraint_propagation(g: Graph, o: Orientation, seed_edge: int,
                                       seed_color: int = 0) -> Propagation:
    """Colors forced by one edge in a 2-color Schreier decoration respecting ``o``.

    At a vertex with two incoming (outgoing) edges, coloring one of them
    forces the other one's color.  Propagates breadth first along
    orientation-alternating paths; vertices without exactly two edges in the
    relevant role (ball boundary) do not propagate.
    """
    ins, outs = _roles(g, o)
    forced = {seed_edge: int(seed_color)}
    queue = deque([seed_edge])
    while queue:
        e = queue.popleft()
        h = o.head[e]
        t = g.other(e, h)
        for group in (ins[h], outs[t]):
            if len(group) != 2:
                continue
            f = group[0] if group[1] == e else group[1]
            want = 1 - forced[e]
            if f in forced:
                if forced[f] != want:
                    return Propagation(forced, True, (f, want, forced[f]))
                continue
            forced[f] = want
            queue.append(f)
    return Propagation(forced, False)


def lift_schreier(g: Graph, seed: int = 0) -> SchreierDecoration:
    """Schreier decoration of a bipartite (2d+2)-regular graph, d >= 1.

    Remove two disjoint perfect matchings, decorate the 2d-regular rest with
    colors ``0..d-1``, keep the color-0 edges and decorate everything else
    (including the two matchings) anew with colors ``1..d``.  ``seed`` picks
    the Euler start rotation of the second decoration.
    """
    deg = g.degrees
    if g.n == 0 or deg.min() != deg.max() or deg[0] % 2 or deg[0] < 4:
        raise NotEvenRegular("need a bipartite (2d+2)-regular graph with d >= 1")
    try:
        m1, m2 = two_disjoint_perfect_matchings(g)
    except NotRegularBipartite as exc:
        raise NoDisjointMatchings(str(exc)) from exc
    removed = set(m1.edge_ids()) | set(m2.edge_ids())
    rest = [e for e in range(g.m) if e not in removed]
    first = schreier_decorate_finite(g.edge_subgraph(rest))
    keep = [rest[i] for i, c in enumerate(first.color) if c == 0]
    keep_set = set(keep)
    others = [e for e in range(g.m) if e not in keep_set]
    sub = g.edge_subgraph(others)
    second = schreier_decorate_finite(sub, _rotated_euler(sub, seed))
    head = [UNMATCHED] * g.m
    color = [UNMATCHED] * g.m
    local_first = {e: i for i, e in enumerate(rest)}
    for e in keep:
        i = local_first[e]
        head[e] = first.orientation.head[i]
        color[e] = 0
    for i, e in enumerate(others):
        head[e] = second.orientation.head[i]
        color[e] = second.color[i] + 1
    return SchreierDecoration(Orientation(tuple(head)), tuple(color), int(deg[0]) // 2)


def _rotated_euler(g: Graph, seed: int) -> Orientation:
    """Euler orientation, reversed on a seeded subset of components."""
    o = euler_orient(g)
    if seed == 0:
        return o
    comp_of = [0] * g.n
    for i, c in enumerate(g.components()):
        for v in c:
            comp_of[v] = i
    flip = seed_rng(seed, 0).integers(2, size=g.n)
    head = [g.other(e, h) if flip[comp_of[h]] else h for e, h in enumerate(o.head)]
    return Orientation(tuple(head))
