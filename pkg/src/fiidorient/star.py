"""The star transform G -> G* and the matching / balanced orientation correspondence.

G* has a vertex ``x_e`` for every edge of G and ``deg(v)/2`` copies
``v_0, v_1, ...`` of every vertex; ``x_uv`` is joined to all copies of ``u``
and of ``v``.  A perfect matching of G* orients every edge towards the
endpoint whose copy its edge vertex is matched to, and this orientation is
balanced.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .errors import NotBalanced, NotPerfect, OddDegree, TooLarge
from .graph import Graph
from .labels import seed_rng
from .matching import enumerate_perfect_matchings
from .structures import UNMATCHED, Matching, Orientation, verify_balanced

COUNT_MAX_EDGES = 12


@dataclass(frozen=True)
class StarGraph:
    """``star`` numbers edge vertices ``0..m-1`` first, then copies in ``(v, i)`` order.

    ``kind[x]`` is ``("e", e)`` or ``("v", v, i)``; ``first_copy[v]`` is the
    star index of ``v_0``.
    """

    base: Graph
    star: Graph
    kind: tuple
    first_copy: tuple

    def edge_vertex(self, e: int) -> int:
        return e

    def copy_vertex(self, v: int, i: int) -> int:
        return self.first_copy[v] + i

    def copies(self, v: int) -> range:
        return range(self.first_copy[v], self.first_copy[v] + self.base.degree(v) // 2)

    def base_vertex(self, x: int) -> int:
        return self.kind[x][1]

    def is_edge_type(self, x: int) -> bool:
        return x < self.base.m

    def sides(self) -> tuple:
        """1 for edge-type vertices, 2 for vertex-type copies."""
        return tuple(1 if x < self.base.m else 2 for x in range(self.star.n))

    def kind_map(self) -> list:
        return [list(k) for k in self.kind]


def build_star(g: Graph) -> StarGraph:
    for v in range(g.n):
        if g.degree(v) % 2:
            raise OddDegree(v, g.degree(v))
    kind = [("e", e) for e in range(g.m)]
    first = []
    for v in range(g.n):
        first.append(len(kind))
        kind.extend(("v", v, i) for i in range(g.degree(v) // 2))
    edges = []
    for e, (u, v) in enumerate(g.edges):
        for w in (u, v):
            edges.extend((e, first[w] + i) for i in range(g.degree(w) // 2))
    return StarGraph(base=g, star=Graph(len(kind), edges), kind=tuple(kind), first_copy=tuple(first))


def matching_to_orientation(sg: StarGraph, M: Matching) -> Orientation:
    if len(M.partner) != sg.star.n or UNMATCHED in M.partner:
        raise NotPerfect("matching does not cover every vertex of the star graph")
    head = []
    for e in range(sg.base.m):
        x = M.partner[e]
        if sg.is_edge_type(x) or not sg.star.has_edge(e, x):
            raise NotPerfect(f"edge vertex {e} matched to a non-neighbor {x}")
        head.append(sg.base_vertex(x))
    return Orientation(tuple(head))


def orientation_to_matching(sg: StarGraph, o: Orientation, rule: str = "canonical",
                            seed: int = 0) -> Matching:
    """Perfect matching of G* inducing ``o``.

    ``rule="canonical"``: the incoming edges of ``v`` in edge order go to
    ``v_0, v_1, ...``.  ``rule="random"``: a uniformly random bijection per
    vertex, drawn from ``(seed, v)``.
    """
    g = sg.base
    bad = verify_balanced(g, o)
    if bad:
        v, i, out = bad[0]
        raise NotBalanced(v, i, out)
    incoming = [[] for _ in range(g.n)]
    for e, h in enumerate(o.head):
        incoming[h].append(e)
    pairs = []
    for v in range(g.n):
        es = incoming[v]
        if rule == "random":
            es = [es[i] for i in seed_rng(seed, v).permutation(len(es))]
        elif rule != "canonical":
            raise ValueError(f"unknown assignment rule {rule!r}")
        pairs.extend((e, sg.copy_vertex(v, i)) for i, e in enumerate(es))
    return Matching.from_edges(sg.star, [sg.star.edge_id(a, b) for a, b in pairs])


def balanced_orientations(g: Graph):
    """All balanced orientations as an ``(count, m)`` array of heads (brute force over 2^m)."""
    if g.m > COUNT_MAX_EDGES + 8:
        raise TooLarge(f"orientation enumeration limited to {COUNT_MAX_EDGES + 8} edges")
    m = g.m
    masks = np.arange(1 << m, dtype=np.int64)
    bits = (masks[:, None] >> np.arange(m)) & 1           # bit e set: edge e points to its larger end
    ends = np.array(g.edges, dtype=np.int64).reshape(m, 2)
    heads = np.where(bits == 1, ends[:, 1], ends[:, 0])
    indeg = np.zeros((len(masks), g.n), dtype=np.int64)
    for e in range(m):
        indeg[masks, heads[:, e]] += 1
    ok = np.all(2 * indeg == g.degrees[None, :], axis=1)
    return heads[ok]


@dataclass(frozen=True)
class CorrespondenceCount:
    balanced: int
    perfect_matchings: int
    factor: int

    @property
    def holds(self) -> bool:
        return self.perfect_matchings == self.balanced * self.factor


def count_correspondence(g: Graph) -> CorrespondenceCount:
    """Both sides of ``#PM(G*) = #BalOr(G) * prod_v (deg(v)/2)!`` by brute force."""
    if g.m > COUNT_MAX_EDGES:
        raise TooLarge(f"brute-force counts limited to {COUNT_MAX_EDGES} edges, got {g.m}")
    sg = build_star(g)
    bal = len(balanced_orientations(g)) if g.m else 1
    pm = enumerate_perfect_matchings(sg.star)
    factor = 1
    for v in range(g.n):
        factor *= factorial(g.degree(v) // 2)
    return CorrespondenceCount(balanced=bal, perfect_matchings=pm, factor=factor)
