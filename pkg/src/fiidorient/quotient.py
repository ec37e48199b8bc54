"""The orbit Markov chain of a quasi-transitive graph.

States are orbit representatives, transitions count the edges from a
representative into each orbit.  The root distribution ``p`` is recovered from
reversibility of the edge counts, ``ptilde`` is its degree-biased version and
the stationary distribution of the chain.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import BipartiteChain, EigenFailure, InconsistentCounts, UnsupportedParams
from .graph import LazyGraph

BIPARTITE_TOL = 1e-9
JACOBI_TOL = 1e-12
JACOBI_SWEEPS = 100


@dataclass(frozen=True)
class OrbitStructure:
    t: int
    reps: tuple
    deg: tuple
    counts: tuple          # counts[i][j]: edges from reps[i] into orbit j
    p: tuple               # exact Fractions
    ptilde: tuple          # exact Fractions
    Delta: Fraction

    def p_array(self) -> np.ndarray:
        return np.array([float(x) for x in self.p])

    def ptilde_array(self) -> np.ndarray:
        return np.array([float(x) for x in self.ptilde])


def orbit_structure(lg: LazyGraph) -> OrbitStructure:
    t = lg.t
    counts = [[0] * t for _ in range(t)]
    deg = []
    for i, rep in enumerate(lg.reps):
        if lg.orbit(rep) != i:
            raise UnsupportedParams(f"representative {rep!r} is not in orbit {i}")
        nb = lg.neighbors(rep)
        deg.append(len(nb))
        for y in nb:
            counts[i][lg.orbit(y)] += 1

    # solve p_i * counts[i][j] = p_j * counts[j][i] along a spanning tree, then check all pairs
    p: list[Optional[Fraction]] = [None] * t
    for start in range(t):
        if p[start] is not None:
            continue
        if start > 0:
            raise InconsistentCounts("orbit chain is not irreducible")
        p[start] = Fraction(1)
        queue = deque([start])
        while queue:
            i = queue.popleft()
            for j in range(t):
                if j == i or counts[i][j] == 0:
                    continue
                if counts[j][i] == 0:
                    raise InconsistentCounts(f"edges {i}->{j} but none {j}->{i}")
                if p[j] is None:
                    p[j] = p[i] * counts[i][j] / counts[j][i]
                    queue.append(j)
    for i in range(t):
        for j in range(t):
            if i != j and p[i] * counts[i][j] != p[j] * counts[j][i]:
                raise InconsistentCounts(
                    f"no reversible weight: p{i}*{counts[i][j]} != p{j}*{counts[j][i]}")
    total = sum(p)
    p = [x / total for x in p]
    Delta = sum(pi * di for pi, di in zip(p, deg))
    ptilde = [di * pi / Delta for pi, di in zip(p, deg)]
    return OrbitStructure(t=t, reps=tuple(lg.reps), deg=tuple(deg),
                          counts=tuple(tuple(r) for r in counts),
                          p=tuple(p), ptilde=tuple(ptilde), Delta=Delta)


def transition_matrix(os: OrbitStructure) -> np.ndarray:
    return np.array([[c / os.deg[i] for c in os.counts[i]] for i in range(os.t)], dtype=float)


def jacobi_eigh(S: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_SWEEPS):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns ``(eigenvalues, eigenvectors)`` sorted by decreasing eigenvalue,
    eigenvectors as columns.
    """
    A = np.array(S, dtype=float)
    n = A.shape[0]
    V = np.eye(n)
    scale = max(np.abs(A).max(), 1.0)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.triu(A, 1) ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) < 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                tt = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) if theta != 0 else 1.0
                c = 1.0 / np.sqrt(tt * tt + 1.0)
                s = tt * c
                # A <- J^T A J with J the (p, q) rotation
                ap = A[:, p].copy()
                aq = A[:, q].copy()
                A[:, p] = c * ap - s * aq
                A[:, q] = s * ap + c * aq
                ap = A[p, :].copy()
                aq = A[q, :].copy()
                A[p, :] = c * ap - s * aq
                A[q, :] = s * ap + c * aq
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    else:
        off = np.sqrt(np.sum(np.triu(A, 1) ** 2))
        if off > tol * scale:
            raise EigenFailure(f"Jacobi did not converge in {max_sweeps} sweeps (off-norm {off:.3g})")
    w = np.diag(A).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], V[:, order]


@dataclass(frozen=True)
class MTSpectrum:
    lambdas: np.ndarray
    rho_T: float
    is_bipartite: bool
    parts: Optional[tuple] = None       # (T1, T2) orbit index lists when bipartite
    vectors: Optional[np.ndarray] = None  # right eigenvectors of P, columns


def mt_spectrum(P: np.ndarray, ptilde) -> MTSpectrum:
    P = np.asarray(P, dtype=float)
    pt = np.asarray([float(x) for x in ptilde])
    if np.any(pt <= 0):
        raise UnsupportedParams("stationary weights must be positive")
    d = np.sqrt(pt)
    S = (d[:, None] * P) / d[None, :]
    S = 0.5 * (S + S.T)
    lam, U = jacobi_eigh(S)
    vectors = U / d[:, None]
    t = len(lam)
    bip = t >= 2 and abs(lam[-1] + 1.0) < BIPARTITE_TOL
    rest = [abs(x) for x in lam[1:] if x > -1.0 + BIPARTITE_TOL]
    rho_T = max([0.0] + rest)
    parts = None
    if bip:
        phi = vectors[:, -1]
        T1 = [i for i in range(t) if phi[i] > 0]
        T2 = [i for i in range(t) if phi[i] <= 0]
        parts = (T1, T2)
    return MTSpectrum(lambdas=lam, rho_T=float(rho_T), is_bipartite=bool(bip), parts=parts, vectors=vectors)


@dataclass(frozen=True)
class ConvergenceReport:
    deviations: np.ndarray   # shape (k_max + 1, t): |(P^k v)_i - <ptilde, v>|
    rate: float              # fitted geometric rate of max_i deviation
    rho_T: float


def convergence_check(P: np.ndarray, ptilde, v, k_max: int = 60, floor: float = 1e-13) -> ConvergenceReport:
    P = np.asarray(P, dtype=float)
    pt = np.asarray([float(x) for x in ptilde])
    v = np.asarray(v, dtype=float)
    spec = mt_spectrum(P, pt)
    if spec.is_bipartite:
        raise BipartiteChain("orbit chain is bipartite (lambda_t = -1)")
    target = float(pt @ v)
    devs = np.zeros((k_max + 1, len(pt)))
    w = v.copy()
    for k in range(k_max + 1):
        devs[k] = np.abs(w - target)
        w = P @ w
    worst = devs.max(axis=1)
    ks = np.flatnonzero(worst > floor)
    ks = ks[ks >= 1]
    if len(ks) < 2:
        rate = 0.0
    else:
        slope = np.polyfit(ks, np.log(worst[ks]), 1)[0]
        rate = float(np.exp(slope))
    return ConvergenceReport(deviations=devs, rate=rate, rho_T=spec.rho_T)


def charpoly(M) -> list:
    """Exact characteristic polynomial coefficients (highest degree first), Faddeev-LeVerrier."""
    A = [[Fraction(x) for x in row] for row in M]
    n = len(A)
    coeffs = [Fraction(1)]
    Mk = [[Fraction(0)] * n for _ in range(n)]
    for k in range(1, n + 1):
        c_prev = coeffs[-1]
        # Mk <- A @ Mk + c_prev * I
        Mk = [[sum(A[i][l] * Mk[l][j] for l in range(n)) + (c_prev if i == j else 0)
               for j in range(n)] for i in range(n)]
        AM = [[sum(A[i][l] * Mk[l][j] for l in range(n)) for j in range(n)] for i in range(n)]
        coeffs.append(-sum(AM[i][i] for i in range(n)) / k)
    return coeffs


def transition_fractions(os: OrbitStructure) -> list:
    return [[Fraction(c, os.deg[i]) for c in os.counts[i]] for i in range(os.t)]


def charpoly_eigenvalues(M) -> np.ndarray:
    """Roots of the exact characteristic polynomial, sorted decreasingly."""
    coeffs = [float(c) for c in charpoly(M)]
    roots = np.roots(coeffs)
    return np.sort(roots.real)[::-1]
