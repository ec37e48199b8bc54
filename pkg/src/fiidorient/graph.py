"""Finite graphs, implicit infinite graphs and ball extraction."""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Hashable, Optional, Sequence

import numpy as np

from .errors import (BallTooLarge, DisconnectedInput, GenerationFailed,
                     InvalidGraph, UnsupportedParams)

DEFAULT_BALL_CAP = 10**6


class Graph:
    """Finite undirected graph with canonical edge indices.

    ``edges[e]`` is the unordered pair with index ``e``; pairs are stored as
    ``(min, max)``.  ``adj[v]`` lists ``(neighbor, edge index)`` in edge order.
    Construction does not reject loops or multi-edges, use
    :func:`validate_graph` (or :meth:`check`) for that.
    """

    __slots__ = ("n", "edges", "adj", "_edge_index", "_deg")

    def __init__(self, n: int, edges: Sequence[Sequence[int]] = ()):
        self.n = int(n)
        self.edges = tuple((min(int(u), int(v)), max(int(u), int(v))) for u, v in edges)
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.n)]
        for e, (u, v) in enumerate(self.edges):
            if not (0 <= u < self.n and 0 <= v < self.n):
                continue
            adj[u].append((v, e))
            if u != v:
                adj[v].append((u, e))
        self.adj = tuple(tuple(a) for a in adj)
        self._edge_index = None
        self._deg = None

    @property
    def m(self) -> int:
        return len(self.edges)

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"

    def __eq__(self, other):
        return isinstance(other, Graph) and self.n == other.n and self.edges == other.edges

    def __hash__(self):
        return hash((self.n, self.edges))

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    @property
    def degrees(self) -> np.ndarray:
        if self._deg is None:
            self._deg = np.array([len(a) for a in self.adj], dtype=np.int64)
        return self._deg

    def neighbors(self, v: int) -> list[int]:
        return [u for u, _ in self.adj[v]]

    def edge_id(self, u: int, v: int) -> int:
        """Index of the edge ``uv``; raises ``KeyError`` if absent."""
        if self._edge_index is None:
            self._edge_index = {uv: e for e, uv in enumerate(self.edges)}
        return self._edge_index[(min(u, v), max(u, v))]

    def has_edge(self, u: int, v: int) -> bool:
        try:
            self.edge_id(u, v)
        except KeyError:
            return False
        return True

    def other(self, e: int, v: int) -> int:
        a, b = self.edges[e]
        return b if v == a else a

    def adjacency_matrix(self, sparse: bool = False):
        rows = [u for u, v in self.edges] + [v for u, v in self.edges]
        cols = [v for u, v in self.edges] + [u for u, v in self.edges]
        if sparse:
            import scipy.sparse as sps
            return sps.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(self.n, self.n))
        A = np.zeros((self.n, self.n))
        np.add.at(A, (rows, cols), 1.0)
        return A

    def components(self) -> list[list[int]]:
        seen = [False] * self.n
        comps = []
        for s in range(self.n):
            if seen[s]:
                continue
            seen[s] = True
            comp = [s]
            queue = deque([s])
            while queue:
                v = queue.popleft()
                for u, _ in self.adj[v]:
                    if not seen[u]:
                        seen[u] = True
                        comp.append(u)
                        queue.append(u)
            comps.append(sorted(comp))
        return comps

    def is_connected(self) -> bool:
        return self.n > 0 and len(self.components()) == 1

    def edge_subgraph(self, edge_ids) -> "Graph":
        """Spanning subgraph on the given edges (vertex set unchanged, edges renumbered)."""
        return Graph(self.n, [self.edges[e] for e in edge_ids])

    def check(self) -> "Graph":
        problems = validate_graph(self)
        if problems:
            raise InvalidGraph("; ".join(problems))
        return self

    # serialization

    def to_dict(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.edges]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "Graph":
        if "n" not in data or "edges" not in data:
            raise InvalidGraph("graph JSON needs keys 'n' and 'edges'")
        return cls(data["n"], [tuple(e) for e in data["edges"]])

    @classmethod
    def from_json(cls, text: str) -> "Graph":
        return cls.from_dict(json.loads(text))

    def to_dot(self, name: str = "G", edge_attrs: Optional[dict] = None, directed_heads=None) -> str:
        """DOT text.  ``directed_heads[e]`` (if given) draws edge ``e`` as an arc into that vertex."""
        kind = "digraph" if directed_heads is not None else "graph"
        arrow = "->" if directed_heads is not None else "--"
        lines = [f"{kind} {name} {{"]
        for v in range(self.n):
            lines.append(f"  {v};")
        for e, (u, v) in enumerate(self.edges):
            if directed_heads is not None and directed_heads[e] == u:
                u, v = v, u
            attr = ""
            if edge_attrs and e in edge_attrs:
                attr = " [" + ", ".join(f'{k}="{val}"' for k, val in edge_attrs[e].items()) + "]"
            lines.append(f"  {u} {arrow} {v}{attr};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def validate_graph(g: Graph) -> list[str]:
    """Human-readable list of violated invariants; empty iff ``g`` is a valid simple graph."""
    problems = []
    seen = set()
    for e, (u, v) in enumerate(g.edges):
        if not (0 <= u < g.n and 0 <= v < g.n):
            problems.append(f"edge {e} out of range: {u}-{v}")
            continue
        if u == v:
            problems.append(f"loop at {u}")
            continue
        if (u, v) in seen:
            problems.append(f"multi-edge {u}-{v}")
        seen.add((u, v))
    return problems


# constructors

def cycle_graph(n: int) -> Graph:
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def path_graph(n: int) -> Graph:
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def complete_graph(n: int) -> Graph:
    return Graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def complete_bipartite(a: int, b: int) -> Graph:
    return Graph(a + b, [(i, a + j) for i in range(a) for j in range(b)])


def circulant_graph(n: int, offsets: Sequence[int]) -> Graph:
    pairs = set()
    for s in offsets:
        for i in range(n):
            u, v = i, (i + s) % n
            if u != v:
                pairs.add((min(u, v), max(u, v)))
    return Graph(n, sorted(pairs))


def disjoint_union(*graphs: Graph) -> Graph:
    edges, offset = [], 0
    for g in graphs:
        edges.extend((u + offset, v + offset) for u, v in g.edges)
        offset += g.n
    return Graph(offset, edges)


# bipartition

@dataclass(frozen=True)
class BipartitionWitness:
    """``side[v]`` in {1, 2}, or ``side is None`` when the graph has an odd cycle."""

    side: Optional[tuple] = None

    @property
    def present(self) -> bool:
        return self.side is not None

    def part(self, s: int) -> list[int]:
        return [v for v, x in enumerate(self.side) if x == s]


def bipartition(g: Graph, require_connected: bool = True) -> BipartitionWitness:
    """Breadth-first 2-colouring.  Disconnected input raises unless ``require_connected`` is off."""
    if require_connected and not g.is_connected():
        raise DisconnectedInput(f"graph with {g.n} vertices is not connected")
    side = [0] * g.n
    for s in range(g.n):
        if side[s]:
            continue
        side[s] = 1
        queue = deque([s])
        while queue:
            v = queue.popleft()
            for u, _ in g.adj[v]:
                if side[u] == 0:
                    side[u] = 3 - side[v]
                    queue.append(u)
                elif side[u] == side[v]:
                    return BipartitionWitness(None)
    return BipartitionWitness(tuple(side))


# implicit graphs

@dataclass(frozen=True)
class LazyGraph:
    """Implicit, possibly infinite, locally finite graph.

    ``neighbors(x)`` returns the neighbor encodings of ``x`` in a fixed order,
    ``orbit(x)`` the automorphism orbit id in ``range(len(reps))`` and
    ``reps[i]`` is a representative of orbit ``i``.  ``radial_degree``, when
    set, marks a tree in which the degree of a vertex at distance ``j`` from a
    root depends only on ``(orbit(root), j)``.
    """

    name: str
    neighbors: Callable[[Hashable], list]
    orbit: Callable[[Hashable], int]
    reps: tuple
    max_degree: int
    radial_degree: Optional[Callable[[int, int], int]] = None
    params: dict = field(default_factory=dict)

    @property
    def t(self) -> int:
        return len(self.reps)

    @classmethod
    def from_graph(cls, g: Graph, orbits: Optional[Sequence[int]] = None, name: str = "finite") -> "LazyGraph":
        """Wrap a finite graph.  Without ``orbits`` every vertex is its own orbit."""
        orb = tuple(range(g.n)) if orbits is None else tuple(int(o) for o in orbits)
        reps = {}
        for v, o in enumerate(orb):
            reps.setdefault(o, v)
        if sorted(reps) != list(range(len(reps))):
            raise UnsupportedParams("orbit ids must be 0..t-1")
        nbrs = [tuple(g.neighbors(v)) for v in range(g.n)]
        return cls(name=name,
                   neighbors=lambda v: list(nbrs[v]),
                   orbit=lambda v: orb[v],
                   reps=tuple(reps[o] for o in range(len(reps))),
                   max_degree=int(g.degrees.max()) if g.n else 0,
                   params={"graph": g})


def tree_neighbors(code: int, k: int) -> list[int]:
    """Neighbors of a vertex of T_k encoded as a reduced word (see :func:`builtin_lazy`)."""
    base = k + 1
    last = code % base
    out = []
    for c in range(1, base):
        out.append(code // base if c == last else code * base + c)
    return out


def tree_depth(code: int, k: int) -> int:
    d = 0
    while code:
        code //= k + 1
        d += 1
    return d


def _tree_lazy(k: int) -> LazyGraph:
    # T_k as the Cayley graph of the free product of k copies of Z/2: a vertex is a
    # reduced word in letters 1..k stored as an integer in base k+1, root = 0.
    return LazyGraph(name=f"tree:{k}",
                     neighbors=lambda x: tree_neighbors(x, k),
                     orbit=lambda x: 0,
                     reps=(0,),
                     max_degree=k,
                     radial_degree=lambda root_orbit, j: k,
                     params={"kind": "tree", "k": k})


def _biregular_lazy(a: int, b: int) -> LazyGraph:
    def deg(x):
        return a if len(x) % 2 == 0 else b

    def neighbors(x):
        out = [x[:-1]] if x else []
        nchild = deg(x) - (1 if x else 0)
        out.extend(x + (c,) for c in range(nchild))
        return out

    return LazyGraph(name=f"biregular:{a},{b}",
                     neighbors=neighbors,
                     orbit=lambda x: len(x) % 2,
                     reps=((), (0,)),
                     max_degree=max(a, b),
                     radial_degree=lambda root_orbit, j: (a, b)[(root_orbit + j) % 2],
                     params={"kind": "biregular", "a": a, "b": b})


def _pendant_lazy(d: int) -> LazyGraph:
    # T_{2d} with two pendant copies of K_{2d+5} minus the edge {0, 1} at every tree
    # vertex, joined through the two endpoints of the missing edge.
    # Encodings: tree vertex (code, -1, -1); clique vertex (code, j, i), j in {0,1}.
    k = 2 * d
    size = 2 * d + 5

    def neighbors(x):
        code, j, i = x
        if j < 0:
            out = [(c, -1, -1) for c in tree_neighbors(code, k)]
            out.extend((code, jj, ii) for jj in (0, 1) for ii in (0, 1))
            return out
        out = []
        if i < 2:
            out.append((code, -1, -1))
        for ii in range(size):
            if ii == i or (i < 2 and ii < 2):
                continue
            out.append((code, j, ii))
        return out

    def orbit(x):
        if x[1] < 0:
            return 0
        return 1 if x[2] < 2 else 2

    return LazyGraph(name=f"pendant:{d}",
                     neighbors=neighbors,
                     orbit=orbit,
                     reps=((0, -1, -1), (0, 0, 0), (0, 0, 2)),
                     max_degree=2 * d + 4,
                     params={"kind": "pendant", "d": d})


def builtin_lazy(kind: str, *params: int) -> LazyGraph:
    """Built-in implicit graphs.

    ``tree k``      the k-regular tree (``k = 2`` is the bi-infinite path), one orbit
    ``biregular a b``  the (a, b)-biregular tree, two orbits
    ``pendant d``   T_{2d} with two pendant near-cliques per vertex, three orbits
    """
    if kind == "tree":
        (k,) = params
        if k < 2:
            raise UnsupportedParams(f"tree degree must be >= 2, got {k}")
        return _tree_lazy(int(k))
    if kind == "path":
        return _tree_lazy(2)
    if kind == "biregular":
        a, b = params
        if a < 2 or b < 2 or a == b:
            raise UnsupportedParams(f"biregular tree needs distinct degrees >= 2, got {a},{b}")
        return _biregular_lazy(int(a), int(b))
    if kind == "pendant":
        (d,) = params
        if d < 1:
            raise UnsupportedParams(f"pendant construction needs d >= 1, got {d}")
        return _pendant_lazy(int(d))
    raise UnsupportedParams(f"unknown builtin kind {kind!r}")


# balls

@dataclass(frozen=True)
class Ball:
    """Induced ball around ``encodings[0]``.

    ``depth[i]`` is the distance of local vertex ``i`` from the center and
    ``ambient_degree[i]`` its degree in the ambient graph.
    """

    graph: Graph
    encodings: tuple
    depth: np.ndarray
    ambient_degree: np.ndarray
    radius: int

    @property
    def center(self) -> int:
        return 0

    def index(self) -> dict:
        return {x: i for i, x in enumerate(self.encodings)}

    def interior(self) -> np.ndarray:
        return np.flatnonzero(self.depth < self.radius)


def ball(lg: LazyGraph, root, radius: int, cap: int = DEFAULT_BALL_CAP) -> Ball:
    if radius < 0:
        raise UnsupportedParams("radius must be >= 0")
    index = {root: 0}
    order = [root]
    depth = [0]
    nbr_cache = []
    head = 0
    while head < len(order):
        x = order[head]
        nb = lg.neighbors(x)
        nbr_cache.append(nb)
        if depth[head] < radius:
            for y in nb:
                if y not in index:
                    index[y] = len(order)
                    order.append(y)
                    depth.append(depth[head] + 1)
                    if len(order) > cap:
                        raise BallTooLarge(f"ball of radius {radius} exceeds {cap} vertices")
        head += 1
    edges = []
    for i, nb in enumerate(nbr_cache):
        for y in nb:
            j = index.get(y)
            if j is not None and i < j:
                edges.append((i, j))
    edges.sort()
    return Ball(graph=Graph(len(order), edges),
                encodings=tuple(order),
                depth=np.array(depth, dtype=np.int64),
                ambient_degree=np.array([len(nb) for nb in nbr_cache], dtype=np.int64),
                radius=radius)


# random instances

def random_regular_bipartite(n: int, k: int, seed: int, max_restarts: int = 1000) -> Graph:
    """Simple k-regular bipartite graph on ``n + n`` vertices (left ``0..n-1``).

    Configuration-model pairing of stubs; pairs that would duplicate an edge
    are dissolved and their stubs re-paired until the graph is simple.
    """
    if n < 1 or k < 1 or k > n:
        raise UnsupportedParams(f"need 1 <= k <= n, got n={n}, k={k}")
    if 2 * k > n:
        # dense case: sample the (n - k)-regular complement instead
        drop = set(random_regular_bipartite(n, n - k, seed, max_restarts).edges) if k < n else set()
        return Graph(2 * n, [(i, j) for i in range(n) for j in range(n, 2 * n) if (i, j) not in drop])
    rng = np.random.default_rng(seed)
    left = np.repeat(np.arange(n), k)
    for _ in range(max_restarts):
        right = np.repeat(np.arange(n, 2 * n), k)
        rng.shuffle(right)
        stalled = 0
        while True:
            keys = left * (2 * n) + right
            order = np.argsort(keys, kind="stable")
            dup = np.zeros(len(keys), dtype=bool)
            dup[order[1:]] = keys[order[1:]] == keys[order[:-1]]
            bad = np.flatnonzero(dup)
            if len(bad) == 0:
                edges = sorted(zip(left.tolist(), right.tolist()))
                return Graph(2 * n, edges)
            # re-pair the offending stubs together with an equal number of random good ones
            pool = np.union1d(bad, rng.choice(len(keys), size=min(len(keys), 2 * len(bad) + 2), replace=False))
            right[pool] = rng.permutation(right[pool])
            stalled += 1
            if stalled > 200:
                break
    raise GenerationFailed(f"no simple {k}-regular bipartite pairing after {max_restarts} restarts")


def connected_or_raise(g: Graph) -> None:
    if not g.is_connected():
        raise DisconnectedInput(f"graph with {g.n} vertices is not connected")
