import json

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import graphs
from fiidorient.errors import BallTooLarge, DisconnectedInput, InvalidGraph, UnsupportedParams
from fiidorient.graph import (Graph, ball, bipartition, builtin_lazy, circulant_graph, complete_bipartite,
                              complete_graph, cycle_graph, disjoint_union, random_regular_bipartite,
                              validate_graph)


@given(graphs())
def test_json_round_trip(g):
    assert Graph.from_json(g.to_json()) == g
    assert Graph.from_dict(json.loads(json.dumps(g.to_dict()))).edges == g.edges


@given(graphs())
def test_degrees_sum_to_twice_edges(g):
    assert g.degrees.sum() == 2 * g.m
    for v in range(g.n):
        assert len(g.neighbors(v)) == g.degree(v)


@given(graphs(connected=True))
def test_bipartition_matches_networkx(g):
    w = bipartition(g)
    h = nx.Graph(g.edges)
    h.add_nodes_from(range(g.n))
    assert w.present == nx.is_bipartite(h)
    if w.present:
        for u, v in g.edges:
            assert w.side[u] != w.side[v]


def test_bipartition_rejects_disconnected():
    with pytest.raises(DisconnectedInput):
        bipartition(disjoint_union(cycle_graph(4), cycle_graph(4)))
    assert bipartition(disjoint_union(cycle_graph(4), cycle_graph(4)), require_connected=False).present


def test_validate_graph_reports_problems():
    assert validate_graph(cycle_graph(5)) == []
    bad = Graph(3, [(0, 0), (0, 1), (1, 0), (1, 5)])
    msgs = validate_graph(bad)
    assert any("loop" in m for m in msgs)
    assert any("multi-edge" in m for m in msgs)
    assert any("out of range" in m for m in msgs)
    with pytest.raises(InvalidGraph):
        bad.check()


def test_constructors():
    assert complete_graph(5).m == 10
    assert complete_bipartite(3, 4).m == 12
    g = circulant_graph(8, [1, 2])
    assert set(g.degrees) == {4}
    assert cycle_graph(6).is_connected()
    assert not disjoint_union(cycle_graph(3), cycle_graph(3)).is_connected()


@pytest.mark.parametrize("n,k,seed", [(10, 3, 0), (50, 4, 1), (200, 4, 7)])
def test_random_regular_bipartite(n, k, seed):
    g = random_regular_bipartite(n, k, seed)
    assert validate_graph(g) == []
    assert set(g.degrees) == {k}
    assert all(u < n <= v for u, v in g.edges)
    assert g == random_regular_bipartite(n, k, seed)


def test_random_regular_bipartite_bad_params():
    with pytest.raises(UnsupportedParams):
        random_regular_bipartite(3, 4, 0)


@pytest.mark.parametrize("k,r", [(3, 3), (4, 4), (2, 5)])
def test_tree_ball_sizes(k, r):
    b = ball(builtin_lazy("tree", k), 0, r)
    if k == 2:
        expected = 2 * r + 1
    else:
        expected = 1 + k * ((k - 1) ** r - 1) // (k - 2)
    assert b.graph.n == expected
    assert b.graph.m == expected - 1
    assert np.all(b.ambient_degree == k)
    assert int(b.depth.max()) == r
    assert len(b.interior()) == (1 + k * ((k - 1) ** (r - 1) - 1) // (k - 2) if k > 2 else 2 * r - 1)


def test_ball_cap():
    with pytest.raises(BallTooLarge):
        ball(builtin_lazy("tree", 4), 0, 12, cap=1000)


@given(st.integers(1, 4), st.integers(0, 3))
def test_pendant_orbits_and_degrees(d, r):
    lg = builtin_lazy("pendant", d)
    assert lg.t == 3
    b = ball(lg, lg.reps[0], r)
    for i, x in enumerate(b.encodings):
        nb = lg.neighbors(x)
        assert len(nb) == b.ambient_degree[i]
        assert len(set(nb)) == len(nb)
        for y in nb:
            assert x in lg.neighbors(y)


def test_biregular_degrees():
    lg = builtin_lazy("biregular", 3, 4)
    assert sorted(len(lg.neighbors(r)) for r in lg.reps) == [3, 4]
    with pytest.raises(UnsupportedParams):
        builtin_lazy("biregular", 3, 3)


def test_dot_export():
    g = cycle_graph(3)
    assert g.to_dot().startswith("graph G {")
    assert "->" in g.to_dot(directed_heads=[1, 2, 0])


@pytest.mark.parametrize("seed", range(5))
def test_random_regular_bipartite_smallest_case_is_c4(seed):
    g = random_regular_bipartite(2, 2, seed)
    assert g.n == 4 and g.m == 4
    assert nx.is_isomorphic(nx.Graph(g.edges), nx.cycle_graph(4))
