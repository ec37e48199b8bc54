"""Factor-of-iid harness: block factors, locality and equivariance tests, radial samplers
for balanced orientations and Schreier decorations, and correlation-decay estimation.
"""

from __future__ import annotations

import csv
import io
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import InvalidAutomorphism, NotTreeBall, UnsupportedParams
from .graph import Ball, Graph, LazyGraph, ball
from .labels import Labeling, key_of, seed_rng, splitmix64
from .quotient import mt_spectrum, orbit_structure, transition_matrix
from .spectral import kesten_rho, radial_return_probabilities
from .structures import Orientation, SchreierDecoration


# block factors

@dataclass
class View:
    """Rooted labeled ball handed to a factor rule.

    ``label_of`` and ``neighbors`` reach the whole ambient graph; a rule
    that uses them beyond the ball is not a block factor of its radius, which
    is what :func:`locality_test` detects.
    """

    root: object
    encodings: tuple
    depth: np.ndarray
    graph: Graph
    labels: np.ndarray
    label_of: Callable
    neighbors: Callable


@dataclass(frozen=True)
class BlockFactor:
    """``rule(view)`` computed from the labeled ball of radius ``radius``.

    ``radius=None`` means the whole (finite) component.  With
    ``vertex_output`` set the output is a nested tuple of vertex encodings,
    moved along by automorphisms in :func:`equivariance_test`.
    ``vectorized(codes, salts, labeling)``, when present, evaluates the rule
    on the regular tree for many vertex codes at once.
    """

    radius: Optional[int]
    rule: Callable
    name: str = "factor"
    vertex_output: bool = False
    vectorized: Optional[Callable] = None


def make_view(lg: LazyGraph, root, radius: Optional[int], label_of: Callable,
              cap: int = 10**6) -> View:
    r = radius
    if r is None:
        g = lg.params.get("graph")
        r = g.n if g is not None else 0
    b = ball(lg, root, r, cap=cap)
    labels = np.array([label_of(x) for x in b.encodings])
    return View(root=root, encodings=b.encodings, depth=b.depth, graph=b.graph,
                labels=labels, label_of=label_of, neighbors=lg.neighbors)


def evaluate(bf: BlockFactor, lg: LazyGraph, root, label_of: Callable):
    return bf.rule(make_view(lg, root, bf.radius, label_of))


def _tree_neighbor_codes(codes: np.ndarray, k: int) -> list:
    base = k + 1
    last = codes % base
    return [np.where(last == c, codes // base, codes * base + c) for c in range(1, base)]


def _sample_labels(lab: Labeling, codes: np.ndarray, salts: np.ndarray) -> np.ndarray:
    return lab.uniform(codes.astype(np.uint64) ^ salts)


def constant_factor(value: float = 1.0) -> BlockFactor:
    return BlockFactor(0, lambda view: value, "constant",
                       vectorized=lambda codes, salts, lab, k: np.full(len(codes), float(value)))


def root_label_factor() -> BlockFactor:
    """Label at the root (radius 0)."""
    return BlockFactor(0, lambda view: float(view.labels[0]), "root_label",
                       vectorized=lambda codes, salts, lab, k: _sample_labels(lab, codes, salts))


def neighbor_count_factor(threshold: float = 0.5) -> BlockFactor:
    """Number of neighbors whose label exceeds ``threshold`` (radius 1)."""

    def rule(view):
        return float(sum(1 for i in range(1, len(view.encodings)) if view.labels[i] > threshold))

    def vec(codes, salts, lab, k):
        out = np.zeros(len(codes))
        for nb in _tree_neighbor_codes(codes, k):
            out += _sample_labels(lab, nb, salts) > threshold
        return out

    return BlockFactor(1, rule, "neighbor_count", vectorized=vec)


def far_label_factor(radius: int) -> BlockFactor:
    """Declares radius ``radius`` but reads a label at distance ``radius + 1``."""

    def rule(view):
        boundary = [x for x, dd in zip(view.encodings, view.depth) if dd == radius]
        x = boundary[0]
        inside = set(view.encodings)
        outside = [y for y in view.neighbors(x) if y not in inside]
        return float(view.label_of(outside[0])) if outside else 0.0

    return BlockFactor(radius, rule, "far_label")


def vertex_id_factor() -> BlockFactor:
    """Reads the vertex name itself, which no equivariant rule can do."""
    return BlockFactor(0, lambda view: key_of(view.root) % 2, "vertex_id")


def euler_factor(g: Graph) -> BlockFactor:
    """Out-neighbors of the root in the Hierholzer orientation of the whole graph."""
    from .decorations import euler_orient
    o = euler_orient(g)

    def rule(view):
        v = view.root
        return tuple(sorted(o.head[e] for _, e in g.adj[v] if o.head[e] != v))

    return BlockFactor(None, rule, "euler", vertex_output=True)


def matching_factor(k_max: int) -> BlockFactor:
    """Partner of the root after ``k_max`` rounds of the local matching scheme on its ball."""
    from .matching import local_matching_rounds

    def rule(view):
        m, _ = local_matching_rounds(view.graph, labels=view.labels, k_max=k_max)
        p = m.partner[0]
        return view.encodings[p] if p >= 0 else None

    return BlockFactor(3 * k_max, rule, f"matching_k{k_max}", vertex_output=True)


@dataclass
class TestReport:
    passed: bool
    trials: int
    failures: list = field(default_factory=list)


def locality_test(bf: BlockFactor, lg: LazyGraph, trials: int = 20, seed: int = 0,
                  root=None) -> TestReport:
    """Re-randomize every label outside ``B(root, R)`` and compare outputs."""
    root = lg.reps[0] if root is None else root
    failures = []
    for t in range(trials):
        lab = Labeling(seed).rerandomized(t)
        other = lab.rerandomized(10**6 + t)
        inside = set(ball(lg, root, bf.radius if bf.radius is not None else 0).encodings)

        def mixed(x, lab=lab, other=other, inside=inside):
            return lab.label(x) if x in inside else other.label(x)

        a = evaluate(bf, lg, root, lab.label)
        b = evaluate(bf, lg, root, mixed)
        if a != b:
            failures.append((t, a, b))
    return TestReport(not failures, trials, failures)


def _map_output(out, sigma):
    if out is None:
        return None
    if isinstance(out, (tuple, list)):
        return tuple(sorted(_map_output(x, sigma) for x in out)) if out and not isinstance(out[0], (tuple, list)) \
            else tuple(_map_output(x, sigma) for x in out)
    return sigma[out]


def check_automorphism(g: Graph, sigma) -> None:
    sigma = list(sigma)
    if sorted(sigma) != list(range(g.n)):
        raise InvalidAutomorphism("sigma is not a permutation of the vertices")
    for u, v in g.edges:
        if not g.has_edge(sigma[u], sigma[v]):
            raise InvalidAutomorphism(f"edge {u}-{v} is not mapped to an edge")


def equivariance_test(bf: BlockFactor, g: Graph, sigma, trials: int = 10, seed: int = 0,
                      vertices=None) -> TestReport:
    """Compare ``Phi(sigma . omega)(sigma v)`` with ``sigma . Phi(omega)(v)``."""
    check_automorphism(g, sigma)
    sigma = list(sigma)
    inv = [0] * g.n
    for v, s in enumerate(sigma):
        inv[s] = v
    lg = LazyGraph.from_graph(g)
    vs = range(g.n) if vertices is None else vertices
    failures = []
    for t in range(trials):
        lab = Labeling(seed).rerandomized(t)

        def moved(x, lab=lab):
            return lab.label(inv[x])

        for v in vs:
            a = evaluate(bf, lg, v, lab.label)
            b = evaluate(bf, lg, sigma[v], moved)
            want = _map_output(a, sigma) if bf.vertex_output else a
            got = _map_output(b, list(range(g.n))) if bf.vertex_output else b
            if want != got:
                failures.append((t, v, want, got))
    return TestReport(not failures, trials, failures)


# radial samplers

def _tree_ball_check(b: Ball) -> int:
    g = b.graph
    if g.m != g.n - 1 or not g.is_connected():
        raise NotTreeBall("input is not a tree")
    amb = np.asarray(b.ambient_degree)
    if len(set(amb.tolist())) != 1 or amb[0] % 2:
        raise NotTreeBall("ambient degree must be a constant 2d")
    for v in range(g.n):
        if b.depth[v] < b.radius and g.degree(v) != amb[v]:
            raise NotTreeBall(f"interior vertex {v} lacks neighbors")
    return int(amb[0]) // 2


def _radial_order(b: Ball):
    """Vertices by depth with their parent edge and outward edges."""
    g = b.graph
    parent_edge = [-1] * g.n
    for v in range(g.n):
        for u, e in g.adj[v]:
            if b.depth[u] == b.depth[v] - 1:
                parent_edge[v] = e
    order = sorted(range(g.n), key=lambda v: (b.depth[v], v))
    out = []
    for v in order:
        if b.depth[v] >= b.radius:
            continue
        kids = [e for u, e in g.adj[v] if b.depth[u] == b.depth[v] + 1]
        out.append((v, parent_edge[v], kids))
    return out


def sample_mu_bo(b: Ball, seed: int) -> Orientation:
    """Balanced orientation grown outwards from the root, uniform over extensions."""
    g = b.graph
    d = _tree_ball_check(b)
    head = [-1] * g.m
    for v, pe, kids in _radial_order(b):
        rng = seed_rng(seed, v)
        need_in = d - (1 if pe >= 0 and head[pe] == v else 0)
        chosen = set(rng.choice(len(kids), size=need_in, replace=False).tolist()) if kids else set()
        for i, e in enumerate(kids):
            head[e] = v if i in chosen else g.other(e, v)
    return Orientation(tuple(head))


def sample_mu_sch(b: Ball, seed: int) -> SchreierDecoration:
    """Schreier decoration grown outwards, each vertex filling its free (color, direction) slots uniformly."""
    g = b.graph
    d = _tree_ball_check(b)
    head = [-1] * g.m
    color = [-1] * g.m
    for v, pe, kids in _radial_order(b):
        rng = seed_rng(seed, v)
        slots = [(c, inc) for c in range(d) for inc in (True, False)]
        if pe >= 0:
            slots.remove((color[pe], head[pe] == v))
        perm = rng.permutation(len(slots))
        for e, j in zip(kids, perm):
            c, inc = slots[j]
            color[e] = c
            head[e] = v if inc else g.other(e, v)
    return SchreierDecoration(Orientation(tuple(head)), tuple(color), d)


# correlation decay

@dataclass
class DecayResult:
    ks: np.ndarray
    estimate: np.ndarray
    stderr: np.ndarray
    mean: float
    samples: int
    rho: Optional[float]
    rho_T: float
    seed: int
    rate: float = float("nan")

    @property
    def roots(self) -> np.ndarray:
        return np.abs(self.estimate) ** (1.0 / np.maximum(self.ks, 1))

    @property
    def reference(self) -> Optional[float]:
        return None if self.rho is None else max(self.rho, self.rho_T)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "estimate", "stderr", "kth_root"])
        for k, e, s, r in zip(self.ks, self.estimate, self.stderr, self.roots):
            w.writerow([int(k), repr(float(e)), repr(float(s)), repr(float(r))])
        return buf.getvalue()


def _fit_rate(ks, est, se) -> float:
    ok = np.abs(est) > 3 * se
    if ok.sum() < 2:
        return float("nan")
    slope = np.polyfit(ks[ok], np.log(np.abs(est[ok])), 1)[0]
    return float(np.exp(slope))


def _rho_reference(lg: LazyGraph) -> tuple:
    os_ = orbit_structure(lg)
    rho_T = mt_spectrum(transition_matrix(os_), os_.ptilde).rho_T
    rho = None
    if lg.params.get("kind") == "tree":
        rho = kesten_rho(lg.params["k"])
    return rho, rho_T


def correlation_decay(lg: LazyGraph, bf: BlockFactor, k_max: int, samples: int, seed: int,
                      ks=None, center_samples: int = 100_000, chunk: int = 1 << 17) -> DecayResult:
    """Monte Carlo ``<M^k f, f>`` for the factor ``f`` along random walks.

    Every sample draws a root (orbit by ``ptilde``), fresh labels and one walk
    of ``k_max`` steps, recording ``f(root) f(X_k)`` at each requested ``k``.
    ``f`` is centered by its empirical mean (per root orbit) estimated on
    ``center_samples`` independent samples.
    """
    ks = np.arange(1, k_max + 1) if ks is None else np.asarray(sorted(ks))
    rho, rho_T = _rho_reference(lg)
    if lg.params.get("kind") == "tree" and bf.vectorized is not None:
        return _decay_tree(lg.params["k"], bf, ks, samples, seed, center_samples, chunk, rho, rho_T)
    return _decay_generic(lg, bf, ks, samples, seed, center_samples, rho, rho_T)


def _salts(seed: int, stream: int, start: int, size: int) -> np.ndarray:
    idx = np.arange(start, start + size, dtype=np.uint64)
    return splitmix64(idx ^ np.uint64(key_of((seed, stream))))


def _decay_tree(k, bf, ks, samples, seed, center_samples, chunk, rho, rho_T) -> DecayResult:
    lab = Labeling(seed)
    mu = 0.0
    done = 0
    while done < center_samples:
        size = min(chunk, center_samples - done)
        mu += bf.vectorized(np.zeros(size, dtype=np.int64), _salts(seed, 1, done, size), lab, k).sum()
        done += size
    mu /= max(center_samples, 1)
    k_max = int(ks.max())
    want = np.zeros(k_max + 1, dtype=bool)
    want[ks] = True
    s1 = np.zeros(k_max + 1)
    s2 = np.zeros(k_max + 1)
    done = 0
    chunk_id = 0
    while done < samples:
        size = min(chunk, samples - done)
        rng = seed_rng(seed, 2, chunk_id)
        salts = _salts(seed, 2, done, size)
        code = np.zeros(size, dtype=np.int64)
        f0 = bf.vectorized(code, salts, lab, k) - mu
        base = k + 1
        for step in range(1, k_max + 1):
            c = rng.integers(1, base, size=size)
            code = np.where(code % base == c, code // base, code * base + c)
            if want[step]:
                prod = f0 * (bf.vectorized(code, salts, lab, k) - mu)
                s1[step] += prod.sum()
                s2[step] += (prod * prod).sum()
        done += size
        chunk_id += 1
    est = s1[ks] / samples
    var = np.maximum(s2[ks] / samples - est ** 2, 0.0)
    se = np.sqrt(var / samples)
    res = DecayResult(ks=ks, estimate=est, stderr=se, mean=float(mu), samples=samples,
                      rho=rho, rho_T=rho_T, seed=seed)
    res.rate = _fit_rate(ks, est, se)
    return res


def _decay_generic(lg, bf, ks, samples, seed, center_samples, rho, rho_T) -> DecayResult:
    os_ = orbit_structure(lg)
    pt = os_.ptilde_array()
    rng = seed_rng(seed, 3)

    def draw(stream, i):
        o = int(rng.choice(len(pt), p=pt))
        lab = Labeling(key_of((seed, stream, i)) & 0x7FFFFFFFFFFFFFFF)
        return o, lab

    sums = np.zeros(len(pt))
    counts = np.zeros(len(pt))
    for i in range(center_samples):
        o, lab = draw(1, i)
        sums[o] += evaluate(bf, lg, lg.reps[o], lab.label)
        counts[o] += 1
    mu = np.where(counts > 0, sums / np.maximum(counts, 1), 0.0)
    k_max = int(ks.max())
    prods = np.zeros((samples, len(ks)))
    for i in range(samples):
        o, lab = draw(2, i)
        x = lg.reps[o]
        f0 = evaluate(bf, lg, x, lab.label) - mu[o]
        j = 0
        for step in range(1, k_max + 1):
            nb = lg.neighbors(x)
            x = nb[int(rng.integers(len(nb)))]
            if j < len(ks) and step == ks[j]:
                prods[i, j] = f0 * (evaluate(bf, lg, x, lab.label) - mu[lg.orbit(x)])
                j += 1
    est = prods.mean(axis=0)
    se = prods.std(axis=0) / np.sqrt(max(samples, 1))
    res = DecayResult(ks=ks, estimate=est, stderr=se, mean=float(np.dot(pt, mu)),
                      samples=samples, rho=rho, rho_T=rho_T, seed=seed)
    res.rate = _fit_rate(ks, est, se)
    return res


def tree_distance_distribution(k: int, n_max: int) -> np.ndarray:
    """``P(dist(X_0, X_n) = j)`` for the simple random walk on T_k, shape ``(n_max + 1, n_max + 1)``."""
    out = np.zeros((n_max + 1, n_max + 1))
    dist = np.zeros(n_max + 2)
    dist[0] = 1.0
    out[0, : n_max + 1] = dist[: n_max + 1]
    for n in range(1, n_max + 1):
        new = np.zeros_like(dist)
        new[1] += dist[0]                          # from the root every step goes out
        new[:-1] += dist[1:] / k                   # one step back
        new[2:] += dist[1:-1] * (k - 1) / k        # k - 1 steps further out
        dist = new
        out[n] = dist[: n_max + 1]
    return out


def exact_neighbor_count_decay(k: int, ks, threshold: float = 0.5) -> np.ndarray:
    """Exact ``<M^n f, f>`` on T_k for the centered neighbor-count factor.

    ``Cov(f(x), f(y)) = |N(x) & N(y)| q(1-q)`` with ``q = P(label > threshold)``:
    ``k q(1-q)`` at distance 0 and ``q(1-q)`` at distance 2 in a tree.
    """
    ks = np.asarray(ks)
    q = 1.0 - threshold
    D = tree_distance_distribution(k, int(ks.max()))
    return q * (1 - q) * (k * D[ks, 0] + D[ks, 2])


def exact_root_label_decay(k: int, ks) -> np.ndarray:
    """Exact ``<M^n f, f>`` for the centered root label: ``p_n(o, o) / 12``."""
    ks = np.asarray(ks)
    p = radial_return_probabilities(lambda j: k, int(ks.max()))
    return p[ks] / 12.0
