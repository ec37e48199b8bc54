from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fiidorient.errors import BipartiteChain, InconsistentCounts
from fiidorient.graph import LazyGraph, builtin_lazy, circulant_graph, complete_bipartite, path_graph
from fiidorient.quotient import (charpoly, charpoly_eigenvalues, convergence_check, jacobi_eigh,
                                 mt_spectrum, orbit_structure, transition_fractions, transition_matrix)


def _chain(lg):
    os_ = orbit_structure(lg)
    return os_, transition_matrix(os_)


@pytest.mark.parametrize("lg", [builtin_lazy("tree", 3), builtin_lazy("tree", 4),
                                builtin_lazy("biregular", 2, 3), builtin_lazy("pendant", 1),
                                builtin_lazy("pendant", 2), builtin_lazy("pendant", 3)])
def test_ptilde_is_stationary(lg):
    os_, P = _chain(lg)
    assert sum(os_.p) == 1
    pt = os_.ptilde_array()
    assert np.allclose(pt @ P, pt, atol=1e-14)
    assert np.allclose(P.sum(axis=1), 1.0)
    # detailed balance
    assert np.allclose(pt[:, None] * P, (pt[:, None] * P).T, atol=1e-14)


def test_single_orbit_has_zero_rho():
    spec = mt_spectrum(*(lambda o, P: (P, o.ptilde))(*_chain(builtin_lazy("tree", 5))))
    assert spec.rho_T == 0.0
    assert not spec.is_bipartite


def test_bipartite_two_orbits():
    os_, P = _chain(builtin_lazy("biregular", 3, 5))
    spec = mt_spectrum(P, os_.ptilde)
    assert spec.is_bipartite
    assert spec.rho_T == 0.0
    assert sorted(map(sorted, spec.parts)) == [[0], [1]]
    with pytest.raises(BipartiteChain):
        convergence_check(P, os_.ptilde, [1.0, 0.0])


def test_pendant_chain_exact_fractions():
    os_ = orbit_structure(builtin_lazy("pendant", 2))
    F = transition_fractions(os_)
    assert all(sum(row) == 1 for row in F)
    assert all(isinstance(x, Fraction) for row in F for x in row)


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_spectrum_matches_charpoly(d):
    os_, P = _chain(builtin_lazy("pendant", d))
    spec = mt_spectrum(P, os_.ptilde)
    roots = charpoly_eigenvalues(transition_fractions(os_))
    assert np.allclose(np.sort(spec.lambdas)[::-1], roots, atol=1e-8)


def test_charpoly_small():
    # x^2 - 5x - 2 for [[1,2],[3,4]]
    assert charpoly([[1, 2], [3, 4]]) == [1, -5, -2]


@given(st.integers(2, 6), st.integers(0, 10_000))
def test_jacobi_matches_numpy(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n))
    S = A + A.T
    lam, U = jacobi_eigh(S)
    assert np.allclose(np.sort(lam), np.linalg.eigvalsh(S), atol=1e-9)
    assert np.allclose(S @ U, U * lam[None, :], atol=1e-8)


def test_convergence_rate_pendant():
    os_, P = _chain(builtin_lazy("pendant", 2))
    rep = convergence_check(P, os_.ptilde, [1.0, 0.0, 0.0])
    assert rep.rate <= rep.rho_T + 0.01
    assert rep.deviations[-1].max() < 1e-10


def test_finite_graph_orbits():
    g = circulant_graph(9, [1, 2])
    os_ = orbit_structure(LazyGraph.from_graph(g, orbits=[0] * 9))
    assert os_.t == 1 and os_.counts == ((4,),)
    os2 = orbit_structure(LazyGraph.from_graph(path_graph(3), orbits=[0, 1, 0]))
    assert os2.p == (Fraction(2, 3), Fraction(1, 3))
    assert os2.ptilde == (Fraction(1, 2), Fraction(1, 2))


def test_inconsistent_counts():
    g = complete_bipartite(1, 2)
    lg = LazyGraph.from_graph(g, orbits=[0, 1, 1])
    assert orbit_structure(lg).t == 2
    # an arc 0 -> 1 with no way back
    bad = LazyGraph(name="bad", neighbors=lambda x: [1] if x == 0 else [],
                    orbit=lambda x: x, reps=(0, 1), max_degree=1)
    with pytest.raises(InconsistentCounts):
        orbit_structure(bad)
