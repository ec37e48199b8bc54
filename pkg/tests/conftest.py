import networkx as nx
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from fiidorient.corpus import connected_even_graphs, find_geng, regular_corpus
from fiidorient.graph import Graph

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

needs_geng = pytest.mark.skipif(find_geng() is None, reason="geng not built (scripts/build_geng.py)")


@pytest.fixture(scope="session")
def even_corpus():
    return connected_even_graphs(10)


@pytest.fixture(scope="session")
def small_even_corpus():
    return connected_even_graphs(7)


@pytest.fixture(scope="session")
def reg_corpus():
    return regular_corpus(max_d=3, max_n=50, seed=0)


@st.composite
def graphs(draw, min_n=1, max_n=8, connected=False):
    """Simple graphs as edge subsets of K_n; optionally forced connected by a random spanning tree."""
    n = draw(st.integers(min_n, max_n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    edges = {p for p, b in zip(pairs, mask) if b}
    if connected:
        for v in range(1, n):
            u = draw(st.integers(0, v - 1))
            edges.add((u, v))
    return Graph(n, sorted(edges))


@st.composite
def even_graphs(draw, max_n=7):
    """Connected even graphs: a random graph with parities repaired, largest component kept."""
    g = draw(graphs(min_n=3, max_n=max_n))
    h = nx.Graph(g.edges)
    h.add_nodes_from(range(g.n))
    odd = [v for v in h if h.degree(v) % 2]
    # toggling the edge between two odd vertices makes both even
    for a, b in zip(odd[::2], odd[1::2]):
        if h.has_edge(a, b):
            h.remove_edge(a, b)
        else:
            h.add_edge(a, b)
    h.remove_nodes_from([v for v in list(h) if h.degree(v) == 0])
    if h.number_of_edges() == 0 or not nx.is_connected(h):
        comp = max(nx.connected_components(h), key=len) if h.number_of_nodes() else None
        if not comp or len(comp) < 3:
            return Graph(3, [(0, 1), (0, 2), (1, 2)])
        h = h.subgraph(comp).copy()
    mapping = {v: i for i, v in enumerate(sorted(h))}
    return Graph(len(mapping), sorted((min(mapping[u], mapping[v]), max(mapping[u], mapping[v]))
                                      for u, v in h.edges))


# one line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE: list = []


def record(criterion: int, passed: bool, detail: str) -> None:
    line = f"criterion {criterion:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
