"""Markov operator spectra, return probabilities, Cheeger constants and expansion checks.

Inner products are degree weighted, ``<f, g> = sum_v deg(v) f(v) g(v)``, the
one in which the Markov operator is self-adjoint.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sps

from .errors import DisconnectedInput, NotBipartite, OddDegree, TooLarge
from .graph import Ball, Graph, LazyGraph, bipartition

EXACT_SUBSETS_MAX_N = 14
ORACLE_MAX_N = 12


def markov_apply(g: Graph, f) -> np.ndarray:
    """``(Mf)(v)`` = average of ``f`` over the neighbors of ``v``; isolated vertices keep ``f(v)``."""
    f = np.asarray(f, dtype=float)
    out = f.copy()
    for v in range(g.n):
        if g.adj[v]:
            out[v] = sum(f[u] for u, _ in g.adj[v]) / len(g.adj[v])
    return out


@dataclass(frozen=True)
class VertexWeights:
    w: np.ndarray
    degree_biased: bool = False

    @classmethod
    def uniform(cls, g: Graph) -> "VertexWeights":
        return cls(np.full(g.n, 1.0 / g.n))

    def stationary(self, g: Graph) -> "VertexWeights":
        """Degree-biased version: ``w_st(v)`` proportional to ``deg(v) w(v)``."""
        x = g.degrees * self.w
        return VertexWeights(x / x.sum(), degree_biased=True)


@dataclass
class SpectralEstimate:
    rho: float
    method: str                 # "power" | "return_probability" | "exact" | "dirichlet"
    iterations: int = 0
    residual: float = float("nan")
    oracle: Optional[float] = None
    stderr: Optional[float] = None
    data: dict = field(default_factory=dict)


def _normalized_adjacency(g: Graph, degrees=None):
    d = np.asarray(g.degrees if degrees is None else degrees, dtype=float)
    A = g.adjacency_matrix(sparse=True)
    inv = sps.diags(1.0 / np.sqrt(d))
    return (inv @ A @ inv).tocsr(), d


def _excluded_directions(g: Graph, d: np.ndarray, exclude_bipartite_sign: bool) -> list:
    """Unit vectors (in symmetrized coordinates) spanning the excluded subspace."""
    q = np.sqrt(d)
    dirs = [q / np.linalg.norm(q)]
    if exclude_bipartite_sign:
        wit = bipartition(g)
        if not wit.present:
            raise NotBipartite("sign vector exclusion requested on a non-bipartite graph")
        s = q * np.where(np.array(wit.side) == 1, 1.0, -1.0)
        dirs.append(s / np.linalg.norm(s))
    return dirs


def exact_spectral_radius(g: Graph, exclude_bipartite_sign: bool = False) -> float:
    """Spectral radius of M off the constants (and off the sign vector) by full eigendecomposition."""
    if not g.is_connected():
        raise DisconnectedInput("spectral radius needs a connected graph")
    if exclude_bipartite_sign and not bipartition(g).present:
        raise NotBipartite("sign vector exclusion requested on a non-bipartite graph")
    d = g.degrees.astype(float)
    A = g.adjacency_matrix()
    S = A / np.sqrt(np.outer(d, d))
    lam = np.linalg.eigvalsh(S)           # ascending
    drop = 2 if exclude_bipartite_sign else 1
    rest = lam[:-1]                       # the eigenvalue 1 of the constants
    if exclude_bipartite_sign:
        rest = rest[1:]                   # the eigenvalue -1 of the sign vector
    if len(rest) == 0 or g.n <= drop:
        return 0.0
    return float(np.max(np.abs(rest)))


def spectral_radius_meanzero(g: Graph, exclude_bipartite_sign: bool = False, seed: int = 0,
                             tol: float = 1e-15, max_iter: int = 200_000) -> SpectralEstimate:
    """Power iteration with M^2 on the mean-zero subspace.

    Iterates in symmetrized coordinates ``psi = sqrt(deg) * f``, projecting off
    the constant vector (and off ``1_X1 - 1_X2`` when requested) every step.
    Graphs with at most 12 vertices also carry the exact value in ``oracle``.
    """
    if not g.is_connected():
        raise DisconnectedInput("spectral radius needs a connected graph")
    S, d = _normalized_adjacency(g)
    dirs = _excluded_directions(g, d, exclude_bipartite_sign)

    def project(x):
        for u in dirs:
            x = x - (u @ x) * u
        return x

    rng = np.random.default_rng(seed)
    x = project(rng.standard_normal(g.n))
    nx = np.linalg.norm(x)
    rq, it, resid = 0.0, 0, 0.0
    if nx > 1e-12:
        x /= nx
        prev = -1.0
        for it in range(1, max_iter + 1):
            y = project(S @ (S @ x))
            rq = float(x @ y)
            ny = np.linalg.norm(y)
            if ny < 1e-300:
                rq = 0.0
                break
            resid = float(np.linalg.norm(y - rq * x))
            x = y / ny
            if abs(rq - prev) <= tol and resid < 1e-6:
                break
            prev = rq
    est = SpectralEstimate(rho=float(np.sqrt(max(rq, 0.0))), method="power", iterations=it, residual=resid)
    if g.n <= ORACLE_MAX_N:
        est.oracle = exact_spectral_radius(g, exclude_bipartite_sign)
    return est


def dirichlet_spectral_radius(b: Ball, seed: int = 0, tol: float = 1e-13,
                              max_iter: int = 100_000) -> SpectralEstimate:
    """Spectral radius of the walk killed on leaving the ball.

    Uses ambient degrees, so ``(Mf)(v) = sum_{u ~ v in ball} f(u) / deg_ambient(v)``.
    For balls of a non-amenable graph this increases towards the ambient
    spectral radius as the radius grows.
    """
    S, _ = _normalized_adjacency(b.graph, b.ambient_degree)
    rng = np.random.default_rng(seed)
    x = np.abs(rng.standard_normal(b.graph.n)) + 1.0   # positive start: Perron vector side
    x /= np.linalg.norm(x)
    rq, prev, resid, it = 0.0, -1.0, 0.0, 0
    for it in range(1, max_iter + 1):
        y = S @ (S @ x)
        rq = float(x @ y)
        ny = np.linalg.norm(y)
        resid = float(np.linalg.norm(y - rq * x))
        x = y / ny
        if abs(rq - prev) <= tol:
            break
        prev = rq
    return SpectralEstimate(rho=float(np.sqrt(rq)), method="dirichlet", iterations=it, residual=resid)


def dirichlet_spectral_radius_exact(b: Ball) -> float:
    """Lanczos (ARPACK) value of the same killed operator, used as an oracle."""
    from scipy.sparse.linalg import eigsh
    S, _ = _normalized_adjacency(b.graph, b.ambient_degree)
    if b.graph.n <= 64:
        lam = np.linalg.eigvalsh(S.toarray())
        return float(np.max(np.abs(lam)))
    hi = eigsh(S, k=1, which="LA", return_eigenvectors=False)[0]
    lo = eigsh(S, k=1, which="SA", return_eigenvectors=False)[0]
    return float(max(abs(hi), abs(lo)))


# trees: exact return probabilities

def kesten_rho(k: int) -> float:
    """Spectral radius of the k-regular tree."""
    return 2.0 * np.sqrt(k - 1) / k


def radial_return_probabilities(degree_at, n_max: int, log: bool = False) -> np.ndarray:
    """Exact ``p_n(o, o)`` for ``n = 0..n_max`` on a radial tree.

    ``degree_at(j)`` is the degree of every vertex at distance ``j`` from the
    root.  The distance of the walk is a birth-death chain; it is iterated in
    symmetrized coordinates and renormalised every step, so with ``log`` (the
    natural logarithms are returned) long horizons do not underflow.
    """
    size = n_max + 2
    deg = np.array([degree_at(j) for j in range(size)], dtype=float)
    back = np.where(np.arange(size) > 0, 1.0 / deg, 0.0)
    fwd = 1.0 - back
    # K[j, j+1] = K[j+1, j] = sqrt(fwd_j back_{j+1}); u_j = dist_j / sqrt(pi_j), pi_0 = 1
    off = np.sqrt(fwd[:-1] * back[1:])
    u = np.zeros(size)
    u[0] = 1.0
    out = np.zeros(n_max + 1)
    scale = 0.0
    for n in range(1, n_max + 1):
        new = np.zeros_like(u)
        new[:-1] += off * u[1:]
        new[1:] += off * u[:-1]
        norm = np.abs(new).max()
        scale += np.log(norm)
        u = new / norm
        out[n] = np.log(u[0]) + scale if u[0] > 0 else -np.inf
    return out if log else np.exp(out)


def tree_return_probabilities(k: int, n_max: int) -> np.ndarray:
    return radial_return_probabilities(lambda j: k, n_max)


def tree_rho_from_recursion(k: int, n: int = 2000) -> float:
    """Spectral radius of T_k from the exact return probabilities.

    Uses ``p_{2n} ~ C rho^{2n} n^{-3/2}``: ``rho^2 = (p_{2n+2} / p_{2n}) ((n+1)/n)^{3/2}``
    up to ``O(n^-2)``.  For ``k = 2`` (the path) the exponent is ``1/2``.
    """
    lp = radial_return_probabilities(lambda j: k, 2 * n + 2, log=True)
    power = 0.5 if k == 2 else 1.5
    log_rho2 = lp[2 * n + 2] - lp[2 * n] + power * np.log((n + 1) / n)
    return float(np.exp(0.5 * log_rho2))


def return_probability_rho(lg: LazyGraph, root, n_max: int, samples: int, seed: int) -> SpectralEstimate:
    """Monte Carlo ``max_n p_n(root, root)^(1/n)`` over even ``n <= n_max``.

    Since ``p_n(x, x) <= rho^n`` this estimates the spectral radius from below.
    On radial trees only the distance from the root is simulated.
    """
    rng = np.random.default_rng(seed)
    hits = np.zeros(n_max + 1)
    if lg.radial_degree is not None:
        r0 = lg.orbit(root)
        deg = np.array([lg.radial_degree(r0, j) for j in range(n_max + 2)], dtype=float)
        chunk = 1 << 18
        done = 0
        while done < samples:
            size = min(chunk, samples - done)
            depth = np.zeros(size, dtype=np.int64)
            for n in range(1, n_max + 1):
                u = rng.random(size)
                toward = (depth > 0) & (u < 1.0 / deg[depth])
                depth = np.where(toward, depth - 1, depth + 1)
                hits[n] += np.count_nonzero(depth == 0)
            done += size
    else:
        cache = {}

        def nb(x):
            if x not in cache:
                cache[x] = lg.neighbors(x)
            return cache[x]

        for _ in range(samples):
            x = root
            for n in range(1, n_max + 1):
                opts = nb(x)
                x = opts[rng.integers(len(opts))]
                if x == root:
                    hits[n] += 1
    p = hits / samples
    p[0] = 1.0
    se = np.sqrt(p * (1 - p) / samples)
    evens = [n for n in range(2, n_max + 1, 2) if p[n] > 0]
    roots = {n: p[n] ** (1.0 / n) for n in evens}
    rho = max(roots.values()) if roots else 0.0
    return SpectralEstimate(rho=float(rho), method="return_probability", iterations=n_max,
                            data={"p": p, "stderr": se, "roots": roots, "samples": samples})


# subset sweeps

def _popcount_table(bits: int) -> np.ndarray:
    t = np.zeros(1 << bits, dtype=np.int64)
    for i in range(bits):
        t[1 << i: 1 << (i + 1)] = t[: 1 << i] + 1
    return t


def _subset_sums(values) -> np.ndarray:
    """``out[mask] = sum(values[i] for i in mask)`` by doubling."""
    values = np.asarray(values, dtype=float)
    out = np.zeros(1 << len(values))
    for i, x in enumerate(values):
        out[1 << i: 1 << (i + 1)] = out[: 1 << i] + x
    return out


def _neighbor_masks(g: Graph) -> np.ndarray:
    nbr = np.zeros(g.n, dtype=np.int64)
    for u, v in g.edges:
        nbr[u] |= 1 << v
        nbr[v] |= 1 << u
    return nbr


def _subset_neighborhoods(nbr_masks) -> np.ndarray:
    out = np.zeros(1 << len(nbr_masks), dtype=np.int64)
    for i, x in enumerate(nbr_masks):
        out[1 << i: 1 << (i + 1)] = out[: 1 << i] | int(x)
    return out


@dataclass
class CheegerResult:
    value: float
    witness: tuple
    exact: bool            # False: sweep-cut upper bound


def cheeger_constant(g: Graph, weights: Optional[VertexWeights] = None) -> CheegerResult:
    """Degree-biased edge-boundary isoperimetric constant.

    Minimises ``sum_{u in S} w(u) deg_{V-S}(u) / sum_{u in S} w(u) deg(u)`` over
    ``S`` with ``nu_st(S) <= 1/2``; for uniform ``w`` this is ``|dS| / vol(S)``.
    Exact up to 14 vertices, otherwise the best sweep cut of the second
    eigenvector (an upper bound).
    """
    w = VertexWeights.uniform(g).w if weights is None else np.asarray(weights.w, dtype=float)
    deg = g.degrees.astype(float)
    total = float(np.sum(w * deg))
    if total == 0:
        return CheegerResult(0.0, (), True)
    if g.n <= EXACT_SUBSETS_MAX_N:
        nbr = _neighbor_masks(g)
        wd = _subset_sums(w * deg)
        ws = _subset_sums(w)
        pop = _popcount_table(g.n)
        inner = np.zeros(1 << g.n)          # sum over edges inside S of w(u) + w(v)
        masks = np.arange(1 << g.n, dtype=np.int64)
        for i in range(g.n):
            lo = masks[: 1 << i]
            common = lo & int(nbr[i])
            inner[1 << i: 1 << (i + 1)] = inner[: 1 << i] + w[i] * pop[common] + ws[common]
        num = wd - inner
        ok = (wd > 0) & (wd <= total / 2 + 1e-12)
        ok[0] = False
        ratio = np.where(ok, num / np.where(ok, wd, 1.0), np.inf)
        best = int(np.argmin(ratio))
        witness = tuple(i for i in range(g.n) if best >> i & 1)
        return CheegerResult(float(ratio[best]), witness, True)

    comps = g.components()
    if len(comps) > 1:
        small = min(comps, key=lambda c: float(np.sum(w[c] * deg[c])))
        return CheegerResult(0.0, tuple(small), False)
    S, d = _normalized_adjacency(g)
    lam, vec = np.linalg.eigh(S.toarray())
    fiedler = vec[:, -2] / np.sqrt(d)
    order = np.argsort(fiedler)
    best, best_set = np.inf, ()
    inside = np.zeros(g.n, dtype=bool)
    for cut in range(1, g.n):
        inside[order[cut - 1]] = True
        for side in (inside, ~inside):
            vol = float(np.sum((w * deg)[side]))
            if vol == 0 or vol > total / 2 + 1e-12:
                continue
            num = sum(w[u] * sum(1 for x in g.neighbors(u) if not side[x]) for u in np.flatnonzero(side))
            if num / vol < best:
                best, best_set = num / vol, tuple(int(u) for u in np.flatnonzero(side))
    return CheegerResult(float(best), best_set, False)


@dataclass
class ExpansionReport:
    mode: str
    rho: float
    worst_slack: float
    worst_set: tuple
    checked: int

    @property
    def passed(self) -> bool:
        return self.worst_slack >= -1e-9


def expansion_bound(b, rho):
    """Lower bound ``b / (rho^2 (1 - b) + b)`` on the neighborhood density."""
    b = np.asarray(b, dtype=float)
    return b / (rho * rho * (1.0 - b) + b)


def verify_expansion_lemma(g: Graph, mode: str = "meanzero") -> ExpansionReport:
    """Check ``b' >= b / (rho^2 (1 - b) + b)`` for every nonempty vertex set.

    ``mode="meanzero"``: sets anywhere, densities relative to the whole graph,
    ``rho`` the spectral radius off the constants.  ``mode="bipartite"``: sets
    inside one side, ``b`` relative to that side and ``b'`` relative to the
    other, ``rho`` also off the sign vector.  ``rho`` comes from the exact
    eigendecomposition so that the check itself is exact.
    """
    if g.n > EXACT_SUBSETS_MAX_N:
        raise TooLarge(f"exhaustive expansion check limited to {EXACT_SUBSETS_MAX_N} vertices")
    deg = g.degrees.astype(float)
    vol = _subset_sums(deg)
    nbhd = _subset_neighborhoods(_neighbor_masks(g))
    if mode == "meanzero":
        rho = exact_spectral_radius(g, False)
        tot = vol[-1]
        b = vol[1:] / tot
        bp = vol[nbhd[1:]] / tot
        slack = bp - expansion_bound(b, rho)
        i = int(np.argmin(slack))
        mask = i + 1
        return ExpansionReport(mode, rho, float(slack[i]),
                               tuple(v for v in range(g.n) if mask >> v & 1), len(slack))
    if mode != "bipartite":
        raise ValueError(f"unknown mode {mode!r}")
    wit = bipartition(g)
    if not wit.present:
        raise NotBipartite("bipartite mode needs a bipartite graph")
    rho = exact_spectral_radius(g, True)
    worst, worst_set, checked = np.inf, (), 0
    for s in (1, 2):
        side = wit.part(s)
        other_mask = sum(1 << v for v in wit.part(3 - s))
        side_vol = float(deg[side].sum())
        other_vol = vol[other_mask]
        nbr = _neighbor_masks(g)[side]
        local_vol = _subset_sums(deg[side])
        local_nbhd = _subset_neighborhoods(nbr)
        b = local_vol[1:] / side_vol
        bp = vol[local_nbhd[1:]] / other_vol
        slack = bp - expansion_bound(b, rho)
        checked += len(slack)
        i = int(np.argmin(slack))
        if slack[i] < worst:
            worst = float(slack[i])
            worst_set = tuple(side[j] for j in range(len(side)) if (i + 1) >> j & 1)
    return ExpansionReport(mode, rho, worst, worst_set, checked)


@dataclass
class AuxExpansionReport:
    epsilon: float
    cheeger: float          # |dS| / vol(S) form, see cheeger_constant
    phi_st: float           # average degree * cheeger
    avg_degree: float
    worst_slack: float
    checked: int
    exhaustive: bool
    cheeger_exact: bool

    @property
    def expander(self) -> bool:
        return self.cheeger > 0

    @property
    def passed(self) -> bool:
        return self.worst_slack >= -1e-9


def aux_expansion_epsilon(g: Graph, exhaustive_limit: int = 40, samples: int = 20000,
                          seed: int = 0) -> AuxExpansionReport:
    """Bipartite expansion of the star graph with the explicit constant.

    ``eps = min(3/20, Phi_st / (4 * avg_degree))`` where ``Phi_st`` is the
    Cheeger constant normalised by the vertex measure (``avg_degree`` times
    ``|dS| / vol(S)`` for uniform weights).  Every star vertex weighs
    ``1 / (2m)``; the report holds the worst value of
    ``nu*(N(A)) - min((1 + eps) nu*(A), 1/4 + eps)`` over the subsets tried.
    """
    from .star import build_star

    for v in range(g.n):
        if g.degree(v) % 2:
            raise OddDegree(v, g.degree(v))
    sg = build_star(g)
    h = cheeger_constant(g)
    avg = 2.0 * g.m / g.n
    phi = avg * h.value
    eps = min(3.0 / 20.0, phi / (4.0 * avg))
    weight = 1.0 / (2 * g.m)
    star = sg.star
    sides = (list(range(g.m)), list(range(g.m, star.n)))
    exhaustive = star.n <= exhaustive_limit
    rng = np.random.default_rng(seed)
    worst, checked = np.inf, 0
    for side in sides:
        nbr = np.zeros(len(side), dtype=np.int64)
        for j, x in enumerate(side):
            for y in star.neighbors(x):
                nbr[j] |= 1 << y
        if exhaustive:
            nb = _subset_neighborhoods(nbr)[1:]
            size = _popcount_table(len(side))[1:]
            pop_n = np.bitwise_count(nb)
        else:
            picks = rng.random((samples, len(side))) < rng.random((samples, 1))
            picks = picks[picks.any(axis=1)]
            size = picks.sum(axis=1)
            pop_n = np.bitwise_count(np.array([np.bitwise_or.reduce(nbr[row]) for row in picks]))
        need = np.minimum((1 + eps) * size * weight, 0.25 + eps)
        slack = pop_n * weight - need
        checked += len(slack)
        worst = min(worst, float(slack.min()))
    return AuxExpansionReport(epsilon=eps, cheeger=h.value, phi_st=phi, avg_degree=avg,
                              worst_slack=worst, checked=checked, exhaustive=exhaustive,
                              cheeger_exact=h.exact)


# batched check for exhaustive graph corpora

def lemma_slacks_batch(nbr: np.ndarray, deg: np.ndarray, rho2: np.ndarray,
                       side: Optional[np.ndarray] = None) -> np.ndarray:
    """Worst slack per graph for a batch of graphs on ``n`` vertices.

    ``nbr[g, i]`` neighbor bitmask, ``deg[g, i]`` degree, ``rho2[g]`` squared
    spectral radius.  Without ``side`` every nonempty subset is checked
    against the whole graph; with ``side[g, i]`` in {0, 1} subsets stay
    inside one side and densities are taken relative to the sides.
    """
    from ._kernels import lemma_slacks
    nbr = np.ascontiguousarray(nbr, dtype=np.int64)
    deg = np.ascontiguousarray(deg, dtype=np.float64)
    rho2 = np.ascontiguousarray(rho2, dtype=np.float64)
    if side is None:
        side = np.full(nbr.shape, -1, dtype=np.int64)
    return lemma_slacks(nbr, deg, rho2, np.ascontiguousarray(side, dtype=np.int64))


@dataclass
class SweepReport:
    n: int
    mode: str
    graphs: int
    worst_slack: float
    worst_graph: Optional[tuple]     # neighbor bitmasks of the worst graph

    @property
    def passed(self) -> bool:
        return self.worst_slack >= -1e-9


def expansion_sweep(n: int, mode: str = "meanzero", block: int = 50_000) -> SweepReport:
    """Expansion lemma on every connected graph with ``n`` vertices (``geng -c``, or ``-cb`` for bipartite mode).

    ``rho`` comes from a dense eigendecomposition of each graph.
    """
    from ._kernels import adjacency_stack, bipartition_sides, lemma_slacks
    from .corpus import geng_blocks
    flags = "-c" if mode == "meanzero" else "-cb"
    worst, worst_graph, total = np.inf, None, 0
    for nbr in geng_blocks(n, flags, block):
        A = adjacency_stack(nbr)
        deg = A.sum(axis=2)
        S = A / np.sqrt(deg[:, :, None] * deg[:, None, :])
        ev = np.linalg.eigvalsh(S)                       # ascending; ev[:, -1] = 1
        if mode == "meanzero":
            rho = np.maximum(np.abs(ev[:, 0]), np.abs(ev[:, -2]))
            side = np.full(nbr.shape, -1, dtype=np.int64)
        else:
            rho = np.maximum(np.abs(ev[:, 1]), np.abs(ev[:, -2])) if n > 2 else np.zeros(len(nbr))
            side = bipartition_sides(nbr)
            if (side[:, 0] < 0).any():
                raise NotBipartite("geng -b returned a non-bipartite graph")
        slack = lemma_slacks(nbr, deg, rho * rho, side)
        i = int(np.argmin(slack))
        if slack[i] < worst:
            worst, worst_graph = float(slack[i]), tuple(int(x) for x in nbr[i])
        total += len(nbr)
    return SweepReport(n, mode, total, worst, worst_graph)
