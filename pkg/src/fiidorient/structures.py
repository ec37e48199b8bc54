"""Decoration types shared by the matching, star and decoration modules."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .graph import Graph

UNMATCHED = -1


@dataclass(frozen=True)
class Matching:
    """``partner[v]`` is the matched vertex or -1; ``edge[v]`` the edge id used."""

    partner: tuple
    edge: tuple

    @classmethod
    def empty(cls, n: int) -> "Matching":
        return cls((UNMATCHED,) * n, (UNMATCHED,) * n)

    @classmethod
    def from_edges(cls, g: Graph, edge_ids) -> "Matching":
        partner = [UNMATCHED] * g.n
        edge = [UNMATCHED] * g.n
        for e in edge_ids:
            u, v = g.edges[e]
            if partner[u] != UNMATCHED or partner[v] != UNMATCHED:
                raise ValueError(f"edge {e} meets an already matched vertex")
            partner[u], partner[v] = v, u
            edge[u] = edge[v] = e
        return cls(tuple(partner), tuple(edge))

    @property
    def size(self) -> int:
        return sum(1 for v, u in enumerate(self.partner) if u != UNMATCHED and v < u)

    def edge_ids(self) -> list:
        return sorted({e for e in self.edge if e != UNMATCHED})

    def unmatched(self) -> list:
        return [v for v, u in enumerate(self.partner) if u == UNMATCHED]

    def is_perfect(self) -> bool:
        return UNMATCHED not in self.partner

    def check(self, g: Graph) -> list:
        """Violations of the involution / host-edge invariants."""
        bad = []
        for v, u in enumerate(self.partner):
            if u == UNMATCHED:
                continue
            if self.partner[u] != v:
                bad.append(f"partner not involutive at {v}")
            e = self.edge[v]
            if e == UNMATCHED or set(g.edges[e]) != {u, v}:
                bad.append(f"pair {v}-{u} is not edge {e}")
        return bad


@dataclass(frozen=True)
class Orientation:
    """``head[e]`` is the endpoint edge ``e`` points to."""

    head: tuple

    def tail(self, g: Graph, e: int) -> int:
        return g.other(e, self.head[e])

    def pairs(self, g: Graph) -> list:
        """Serialized form: list of ``[tail, head]``."""
        return [[self.tail(g, e), h] for e, h in enumerate(self.head)]

    def indegrees(self, g: Graph) -> np.ndarray:
        return np.bincount(np.asarray(self.head, dtype=np.int64), minlength=g.n) if self.head else np.zeros(g.n, dtype=np.int64)


@dataclass(frozen=True)
class EdgeColoring:
    color: tuple
    k: int

    def classes(self) -> list:
        out = [[] for _ in range(self.k)]
        for e, c in enumerate(self.color):
            out[c].append(e)
        return out


@dataclass(frozen=True)
class SchreierDecoration:
    """Orientation plus colors ``0..d-1``: one in- and one out-edge of each color per vertex."""

    orientation: Orientation
    color: tuple
    d: int

    def to_dict(self, g: Graph) -> dict:
        return {"d": self.d,
                "arcs": self.orientation.pairs(g),
                "colors": list(self.color)}


@dataclass(frozen=True)
class UnorderedDecoration:
    """Schreier decoration whose two last colors are merged into one class.

    ``color[e]`` is in ``0..d-2``; ``d - 2`` marks the unordered class.
    """

    orientation: Orientation
    color: tuple
    d: int


def verify_balanced(g: Graph, o: Orientation, vertices=None) -> list:
    """``(v, indeg, outdeg)`` for every vertex where the two differ."""
    indeg = o.indegrees(g)
    deg = g.degrees
    vs = range(g.n) if vertices is None else vertices
    return [(int(v), int(indeg[v]), int(deg[v] - indeg[v])) for v in vs if 2 * indeg[v] != deg[v]]


def verify_coloring(g: Graph, c: EdgeColoring) -> list:
    bad = []
    for v in range(g.n):
        seen = {}
        for _, e in g.adj[v]:
            col = c.color[e]
            if not 0 <= col < c.k:
                bad.append(f"edge {e} has color {col} outside 0..{c.k - 1}")
            if col in seen:
                bad.append(f"edges {seen[col]} and {e} share color {col} at {v}")
            seen[col] = e
    return bad


def verify_schreier(g: Graph, sd: SchreierDecoration, vertices=None) -> list:
    """Violations of the one-in-one-out-per-color rule (optionally only at ``vertices``)."""
    bad = []
    vs = range(g.n) if vertices is None else vertices
    for v in vs:
        ins = [0] * sd.d
        outs = [0] * sd.d
        for _, e in g.adj[v]:
            c = sd.color[e]
            if not 0 <= c < sd.d:
                bad.append(f"edge {e} has color {c} outside 0..{sd.d - 1}")
                continue
            if sd.orientation.head[e] == v:
                ins[c] += 1
            else:
                outs[c] += 1
        for c in range(sd.d):
            if ins[c] != 1 or outs[c] != 1:
                bad.append(f"vertex {v} color {c}: in={ins[c]} out={outs[c]}")
    return bad
