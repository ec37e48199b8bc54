"""Test corpora: exhaustive small graphs, regular families and the external ``geng`` generator."""

from __future__ import annotations

import os
import shutil
import subprocess
import sys
import tarfile
import tempfile
from itertools import combinations
from pathlib import Path
from typing import Iterator, Optional

import networkx as nx
import numpy as np

from .graph import Graph, circulant_graph, complete_graph, cycle_graph

GENG_ENV = "FIIDORIENT_GENG"
CACHE_DIR = Path(os.environ.get("FIIDORIENT_CACHE", Path.home() / ".cache" / "fiidorient"))


def find_geng() -> Optional[str]:
    """Path of nauty's ``geng``: env var, then the build cache, then ``PATH``."""
    cand = os.environ.get(GENG_ENV)
    if cand and os.access(cand, os.X_OK):
        return cand
    cached = CACHE_DIR / "geng"
    if os.access(cached, os.X_OK):
        return str(cached)
    return shutil.which("geng")


NAUTY_SDIST = "pynauty==2.8.8.1"


def build_geng(dest: Optional[Path] = None, archive: Optional[Path] = None) -> str:
    """Compile ``geng`` from the nauty sources bundled in the pynauty sdist.

    Without ``archive`` the sdist is fetched with ``pip download``.  Needs a C
    compiler and ``make``.  Returns the path of the installed binary.
    """
    dest = Path(dest) if dest else CACHE_DIR / "geng"
    dest.parent.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        if archive is None:
            subprocess.run([sys.executable, "-m", "pip", "download", "--no-deps", "--no-binary", ":all:",
                            "-d", tmp, NAUTY_SDIST], check=True, capture_output=True)
            archive = next(Path(tmp).glob("pynauty-*.tar.gz"))
        with tarfile.open(archive) as tar:
            tar.extractall(tmp)
        src = next(Path(tmp).glob("pynauty-*/src/nauty*"))
        subprocess.run(["./configure"], cwd=src, check=True, capture_output=True)
        subprocess.run(["make", "geng"], cwd=src, check=True, capture_output=True)
        shutil.copy2(src / "geng", dest)
    return str(dest)


def ensure_geng() -> str:
    """``geng`` from :func:`find_geng`, building it into the cache when missing."""
    return find_geng() or build_geng()


def _canonical(g: nx.Graph) -> Graph:
    mapping = {v: i for i, v in enumerate(sorted(g.nodes))}
    return Graph(g.number_of_nodes(), sorted((min(mapping[u], mapping[v]), max(mapping[u], mapping[v]))
                                             for u, v in g.edges))


def connected_even_graphs(max_edges: int) -> list:
    """All connected graphs with every degree even and ``1 <= m <= max_edges``, up to isomorphism.

    Grown edge by edge from a single edge: an added edge joins two existing
    vertices or one existing vertex to a new one, which reaches every
    connected graph.  Partial graphs with more odd vertices than twice the
    remaining edge budget are pruned.  Isomorphs are merged with a
    Weisfeiler-Lehman hash followed by an exact isomorphism test.
    """
    out = []
    level = [nx.Graph([(0, 1)])]
    for m in range(1, max_edges + 1):
        nxt_buckets: dict = {}
        for h in level:
            if all(d % 2 == 0 for _, d in h.degree):
                out.append(_canonical(h))
        if m == max_edges:
            break
        for h in level:
            n = h.number_of_nodes()
            cands = [(u, v) for u, v in combinations(range(n), 2) if not h.has_edge(u, v)]
            cands += [(u, n) for u in range(n)]
            for u, v in cands:
                h2 = h.copy()
                h2.add_edge(u, v)
                odd = sum(1 for _, d in h2.degree if d % 2)
                if odd > 2 * (max_edges - m - 1):
                    continue
                key = nx.weisfeiler_lehman_graph_hash(h2, iterations=3)
                bucket = nxt_buckets.setdefault(key, [])
                if any(nx.is_isomorphic(h2, x) for x in bucket):
                    continue
                bucket.append(h2)
        level = [x for b in nxt_buckets.values() for x in b]
    return sorted(out, key=lambda g: (g.m, g.n, g.edges))


def geng_graphs(n: int, flags: str = "-c", edges: Optional[str] = None, geng: Optional[str] = None) -> list:
    """Small geng runs parsed into :class:`Graph` objects; ``edges`` is a geng range like ``"0:10"``."""
    geng = geng or find_geng()
    if geng is None:
        raise FileNotFoundError("geng not found; run scripts/build_geng.py")
    cmd = [geng, "-q", flags, str(n)] + ([edges] if edges else [])
    res = subprocess.run(cmd, capture_output=True, check=True)
    return [_canonical(nx.from_graph6_bytes(line)) for line in res.stdout.split()]


def geng_blocks(n: int, flags: str = "-c", block: int = 100_000, geng: Optional[str] = None) -> Iterator[np.ndarray]:
    """Stream geng output as ``(count, n)`` neighbor-bitmask arrays."""
    from ._kernels import parse_graph6_fixed
    geng = geng or find_geng()
    if geng is None:
        raise FileNotFoundError("geng not found; run scripts/build_geng.py")
    line_len = 1 + (n * (n - 1) // 2 + 5) // 6 + 1
    proc = subprocess.Popen([geng, "-q", flags, str(n)], stdout=subprocess.PIPE)
    try:
        while True:
            raw = proc.stdout.read(block * line_len)
            if not raw:
                break
            buf = np.frombuffer(raw, dtype=np.uint8)
            yield parse_graph6_fixed(buf, n, line_len)
    finally:
        proc.stdout.close()
        proc.wait()


def regular_corpus(max_d: int = 3, max_n: int = 50, seed: int = 0) -> list:
    """2d-regular test graphs, d <= max_d: cycles, circulants, complete graphs, random regular graphs."""
    out = []
    out += [cycle_graph(n) for n in (3, 4, 5, 6, 7, 8, 12, 25, 50) if n <= max_n]
    out += [complete_graph(n) for n in (5, 7) if (n - 1) // 2 <= max_d]
    for n in (5, 6, 7, 8, 9, 10, 12, 16, 25, 50):
        if n > max_n:
            continue
        for offs in ((1, 2), (1, 3), (1, 2, 3), (1, 2, 4)):
            if len(offs) > max_d or 2 * max(offs) >= n:
                continue
            out.append(circulant_graph(n, offs))
    rng = np.random.default_rng(seed)
    for d in range(1, max_d + 1):
        for n in (10, 20, 50):
            if n > max_n or n <= 2 * d:
                continue
            for _ in range(2):
                h = nx.random_regular_graph(2 * d, n, seed=int(rng.integers(2**31)))
                out.append(_canonical(h))
    return out
