from itertools import permutations

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, strategies as st

from fiidorient.errors import NotBipartite, NotRegularBipartite, TooLarge
from fiidorient.graph import Graph, complete_bipartite, cycle_graph, random_regular_bipartite
from fiidorient.labels import Labeling
from fiidorient.matching import (deficiency, enumerate_perfect_matchings, hopcroft_karp,
                                 local_matching_rounds, odd_component_certificate,
                                 two_disjoint_perfect_matchings)


@st.composite
def bipartite_graphs(draw, max_side=7):
    a = draw(st.integers(1, max_side))
    b = draw(st.integers(1, max_side))
    pairs = [(i, a + j) for i in range(a) for j in range(b)]
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return Graph(a + b, [p for p, keep in zip(pairs, mask) if keep])


def _nx_max(g):
    h = nx.Graph(g.edges)
    h.add_nodes_from(range(g.n))
    return len(nx.max_weight_matching(h, maxcardinality=True))


@given(bipartite_graphs())
def test_hopcroft_karp_is_maximum(g):
    M = hopcroft_karp(g)
    assert M.check(g) == []
    assert M.size == _nx_max(g)
    assert deficiency(g) == g.n - 2 * M.size


def test_hopcroft_karp_rejects_odd_cycle():
    with pytest.raises(NotBipartite):
        hopcroft_karp(cycle_graph(5))


def test_hopcroft_karp_multigraph():
    g = Graph(4, [(0, 2), (0, 2), (1, 3), (1, 2)])
    M = hopcroft_karp(g, sides=(1, 1, 2, 2))
    assert M.size == 2 and M.check(g) == []


@pytest.mark.parametrize("a,expected", [(1, 1), (2, 2), (3, 6), (4, 24)])
def test_count_complete_bipartite(a, expected):
    assert enumerate_perfect_matchings(complete_bipartite(a, a)) == expected


def test_count_cycles_and_cap():
    assert enumerate_perfect_matchings(cycle_graph(8)) == 2
    assert enumerate_perfect_matchings(cycle_graph(7)) == 0
    with pytest.raises(TooLarge):
        enumerate_perfect_matchings(cycle_graph(50))


@given(bipartite_graphs(max_side=5))
def test_count_matches_permanent(g):
    left = sorted({u for u, _ in g.edges})
    right = sorted({v for _, v in g.edges})
    if g.n % 2 or len(left) != len(right) or len(left) + len(right) != g.n:
        return
    A = np.zeros((len(left), len(right)), dtype=int)
    for u, v in g.edges:
        A[left.index(u), right.index(v)] = 1
    perm = sum(all(A[i, p[i]] for i in range(len(left))) for p in permutations(range(len(right))))
    assert enumerate_perfect_matchings(g) == perm


@given(bipartite_graphs(), st.integers(0, 1000))
def test_local_rounds_reach_maximum(g, seed):
    M, stats = local_matching_rounds(g, k_max=g.n + 1, seed=seed)
    assert M.check(g) == []
    assert M.size == hopcroft_karp(g).size
    fr = stats.unmatched()
    assert all(x >= y for x, y in zip(fr, fr[1:]))
    assert [r[1] for r in stats.rows] == [2 * k - 1 for k in range(1, g.n + 2)]


def test_local_rounds_deterministic_and_label_driven():
    g = random_regular_bipartite(300, 3, 5)
    M1, s1 = local_matching_rounds(g, k_max=6, seed=9)
    M2, s2 = local_matching_rounds(g, k_max=6, seed=9)
    assert M1 == M2 and s1.to_csv() == s2.to_csv()
    M3, _ = local_matching_rounds(g, labels=Labeling(9), k_max=6)
    assert M3 == M1


def test_round_stats_csv():
    _, stats = local_matching_rounds(cycle_graph(6), k_max=3, seed=0)
    lines = stats.to_csv().splitlines()
    assert lines[0] == "round,path_len,flips,unmatched_frac"
    assert len(lines) == 4


@pytest.mark.parametrize("n,k,seed", [(20, 2, 0), (30, 3, 1), (40, 4, 2)])
def test_two_disjoint_perfect_matchings(n, k, seed):
    g = random_regular_bipartite(n, k, seed)
    m1, m2 = two_disjoint_perfect_matchings(g)
    assert m1.is_perfect() and m2.is_perfect()
    assert m1.check(g) == [] and m2.check(g) == []
    assert not set(m1.edge_ids()) & set(m2.edge_ids())


def test_two_disjoint_rejects_irregular():
    with pytest.raises(NotRegularBipartite):
        two_disjoint_perfect_matchings(complete_bipartite(2, 3))


def test_odd_component_certificate():
    # a center with three pendant triangles: removing it leaves three odd components
    edges = []
    for t in range(3):
        a, b, c = 1 + 3 * t, 2 + 3 * t, 3 + 3 * t
        edges += [(0, a), (a, b), (b, c), (a, c)]
    g = Graph(10, edges)
    cert = odd_component_certificate(g, [0])
    assert cert["odd_components"] == 3 and cert["deficiency"] == 2
    h = nx.Graph(g.edges)
    assert len(nx.max_weight_matching(h, maxcardinality=True)) < g.n // 2
