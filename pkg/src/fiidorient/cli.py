"""Command line front end.

Every primary output starts with a header holding the package version, the
seed and a hash of the run configuration, and contains nothing else that
varies between runs, so equal configurations give byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from typing import Optional

from . import __version__
from .errors import FiidError, InvalidGraph, UnsupportedParams

THREADS_ENV = "FIIDORIENT_THREADS"
EXIT_IO = 4

LAZY_KINDS = {"tree", "biregular", "pendant", "line"}
FINITE_KINDS = {"cycle", "path", "complete", "kbip", "circulant", "rrb"}


class RoundsExhausted(FiidError):
    exit_code = 3


@dataclass
class RunConfig:
    command: str
    input: str
    seed: Optional[int] = None
    rounds: Optional[int] = None
    samples: Optional[int] = None
    k_max: Optional[int] = None
    k_min: Optional[int] = None
    format: str = "json"
    method: Optional[str] = None
    factor: Optional[str] = None
    extra: dict = field(default_factory=dict)

    def config_hash(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def header(self) -> dict:
        return {"tool": "fiidorient", "version": __version__, "command": self.command,
                "seed": self.seed, "config_hash": self.config_hash()}


# inputs

def _ints(text: str) -> list:
    return [int(x) for x in text.replace(",", " ").split()]


def parse_spec(spec: str):
    """``("lazy", LazyGraph)`` or ``("finite", Graph)`` for a builtin spec or a JSON path."""
    from .graph import (Graph, builtin_lazy, circulant_graph, complete_bipartite, complete_graph,
                        cycle_graph, path_graph, random_regular_bipartite)
    head = spec.split(":", 1)[0]
    if head in LAZY_KINDS | FINITE_KINDS and not os.path.exists(spec):
        parts = spec.split(":")
        try:
            if head == "tree":
                return "lazy", builtin_lazy("tree", int(parts[1]))
            if head == "line":
                return "lazy", builtin_lazy("path")
            if head == "biregular":
                return "lazy", builtin_lazy("biregular", *_ints(parts[1]))
            if head == "pendant":
                return "lazy", builtin_lazy("pendant", int(parts[1]))
            if head == "cycle":
                return "finite", cycle_graph(int(parts[1]))
            if head == "path":
                return "finite", path_graph(int(parts[1]))
            if head == "complete":
                return "finite", complete_graph(int(parts[1]))
            if head == "kbip":
                a, b = _ints(parts[1])
                return "finite", complete_bipartite(a, b)
            if head == "circulant":
                return "finite", circulant_graph(int(parts[1]), _ints(parts[2]))
            if head == "rrb":
                n, k, s = (int(x) for x in parts[1:4])
                return "finite", random_regular_bipartite(n, k, s)
        except (IndexError, ValueError) as exc:
            raise UnsupportedParams(f"malformed builtin spec {spec!r}") from exc
    with open(spec, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidGraph(f"{spec}: not valid JSON ({exc.msg})") from exc
    return "finite", Graph.from_dict(data).check()


def _finite(cfg: RunConfig):
    kind, obj = parse_spec(cfg.input)
    if kind != "finite":
        raise UnsupportedParams(f"command {cfg.command!r} needs a finite graph, got {cfg.input!r}")
    return obj


def _lazy(cfg: RunConfig):
    from .graph import LazyGraph
    kind, obj = parse_spec(cfg.input)
    return obj if kind == "lazy" else LazyGraph.from_graph(obj)


def _need_seed(cfg: RunConfig):
    if cfg.seed is None:
        raise UnsupportedParams(f"command {cfg.command!r} is randomized and needs --seed")


# outputs

def render_json(cfg: RunConfig, body: dict) -> str:
    return json.dumps({"header": cfg.header(), **body}, sort_keys=False) + "\n"


def render_csv(cfg: RunConfig, rows: list, columns: list) -> str:
    buf = io.StringIO()
    h = cfg.header()
    buf.write("# " + " ".join(f"{k}={h[k]}" for k in h) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([repr(float(x)) if isinstance(x, float) else x for x in r])
    return buf.getvalue()


def render_dot(cfg: RunConfig, dot: str) -> str:
    h = cfg.header()
    return "// " + " ".join(f"{k}={h[k]}" for k in h) + "\n" + dot


def _emit(text: str, path: Optional[str]):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


# commands

def cmd_transform(cfg: RunConfig, out: Optional[str]) -> None:
    from .star import build_star
    g = _finite(cfg)
    sg = build_star(g)
    if cfg.format == "dot":
        _emit(render_dot(cfg, sg.star.to_dot("Gstar")), out)
    else:
        _emit(render_json(cfg, sg.star.to_dict()), out)
    if out not in (None, "-"):
        _emit(render_json(cfg, {"kinds": sg.kind_map()}), out + ".kinds.json")


def cmd_orient(cfg: RunConfig, out: Optional[str]) -> None:
    from .decorations import euler_orient
    from .matching import hopcroft_karp, local_matching_rounds
    from .star import build_star, matching_to_orientation
    from .structures import verify_balanced
    g = _finite(cfg)
    method = cfg.method or "star"
    extra = {}
    if method == "euler":
        o = euler_orient(g)
    else:
        sg = build_star(g)
        if method == "local":
            _need_seed(cfg)
            M, stats = local_matching_rounds(sg.star, k_max=cfg.rounds or 10, seed=cfg.seed, sides=sg.sides())
            extra["rounds"] = [list(r) for r in stats.rows]
            if not M.is_perfect():
                raise RoundsExhausted(f"{len(M.unmatched())} star vertices unmatched after {cfg.rounds} rounds")
        elif method == "star":
            M = hopcroft_karp(sg.star, sg.sides())
        else:
            raise UnsupportedParams(f"unknown orientation method {method!r}")
        o = matching_to_orientation(sg, M)
    bad = verify_balanced(g, o)
    if bad:
        raise RoundsExhausted(f"orientation not balanced at {bad[0]}")
    if cfg.format == "dot":
        _emit(render_dot(cfg, g.to_dot("orientation", directed_heads=o.head)), out)
    else:
        _emit(render_json(cfg, {"method": method, "n": g.n, "arcs": o.pairs(g), **extra}), out)


def cmd_spectra(cfg: RunConfig, out: Optional[str]) -> None:
    from .quotient import mt_spectrum, orbit_structure, transition_matrix
    lg = _lazy(cfg)
    os_ = orbit_structure(lg)
    P = transition_matrix(os_)
    spec = mt_spectrum(P, os_.ptilde)
    rows = []
    for i in range(os_.t):
        for j in range(os_.t):
            rows.append(("P", i, j, float(P[i, j])))
    for i in range(os_.t):
        rows.append(("p", i, "", float(os_.p[i])))
    for i in range(os_.t):
        rows.append(("ptilde", i, "", float(os_.ptilde[i])))
    for i, lam in enumerate(spec.lambdas):
        rows.append(("lambda", i, "", float(lam)))
    rows.append(("rho_T", "", "", float(spec.rho_T)))
    rows.append(("bipartite", "", "", int(spec.is_bipartite)))
    _emit(render_csv(cfg, rows, ["quantity", "i", "j", "value"]), out)


def cmd_decay(cfg: RunConfig, out: Optional[str]) -> None:
    from .fiid import correlation_decay, neighbor_count_factor, root_label_factor
    _need_seed(cfg)
    lg = _lazy(cfg)
    factors = {"neighbor_count": neighbor_count_factor, "root_label": root_label_factor}
    name = cfg.factor or "neighbor_count"
    if name not in factors:
        raise UnsupportedParams(f"unknown factor {name!r}; choose from {sorted(factors)}")
    k_max = cfg.k_max or 16
    k_min = cfg.k_min or 1
    if not 1 <= k_min <= k_max:
        raise UnsupportedParams("need 1 <= k_min <= k_max")
    samples = cfg.samples or 100_000
    res = correlation_decay(lg, factors[name](), k_max, samples, cfg.seed, ks=range(k_min, k_max + 1),
                            center_samples=min(samples, 100_000))
    rows = [(int(k), float(e), float(s), float(r)) for k, e, s, r in zip(res.ks, res.estimate, res.stderr, res.roots)]
    _emit(render_csv(cfg, rows, ["k", "estimate", "stderr", "kth_root"]), out)


def cmd_schreier(cfg: RunConfig, out: Optional[str]) -> None:
    from .decorations import lift_schreier, schreier_decorate_finite
    from .structures import verify_schreier
    g = _finite(cfg)
    method = cfg.method or "finite"
    if method == "finite":
        sd = schreier_decorate_finite(g)
    elif method == "lift":
        _need_seed(cfg)
        sd = lift_schreier(g, cfg.seed)
    else:
        raise UnsupportedParams(f"unknown decoration method {method!r}")
    bad = verify_schreier(g, sd)
    if bad:
        raise RoundsExhausted(bad[0])
    _emit(render_json(cfg, {"method": method, "n": g.n, **sd.to_dict(g)}), out)


def cmd_match(cfg: RunConfig, out: Optional[str]) -> None:
    from .matching import hopcroft_karp, local_matching_rounds
    g = _finite(cfg)
    method = cfg.method or "hopcroft_karp"
    body = {"method": method, "n": g.n}
    if method == "local":
        _need_seed(cfg)
        M, stats = local_matching_rounds(g, k_max=cfg.rounds or 12, seed=cfg.seed)
        body["rounds"] = [list(r) for r in stats.rows]
        stats_path = cfg.extra.get("stats")
        if stats_path:
            _emit(render_csv(cfg, stats.rows, ["round", "path_len", "flips", "unmatched_frac"]), stats_path)
    elif method == "hopcroft_karp":
        M = hopcroft_karp(g)
    else:
        raise UnsupportedParams(f"unknown matching method {method!r}")
    body["size"] = M.size
    body["perfect"] = M.is_perfect()
    body["pairs"] = [[g.edges[e][0], g.edges[e][1]] for e in M.edge_ids()]
    _emit(render_json(cfg, body), out)


COMMANDS = {"transform": cmd_transform, "orient": cmd_orient, "spectra": cmd_spectra,
            "decay": cmd_decay, "schreier": cmd_schreier, "match": cmd_match}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fiidorient", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fmt=("json",)):
        sp.add_argument("input", help="JSON graph file or builtin spec such as tree:4, pendant:2, circulant:8:1,2")
        sp.add_argument("-o", "--out", default=None, help="output path (default stdout)")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--format", choices=fmt, default=fmt[0])

    sp = sub.add_parser("transform", help="write the star graph G*")
    common(sp, ("json", "dot"))
    sp = sub.add_parser("orient", help="balanced orientation")
    common(sp, ("json", "dot"))
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--euler", dest="method", action="store_const", const="euler")
    g.add_argument("--local", dest="method", action="store_const", const="local")
    sp.add_argument("--rounds", type=int, default=None)
    sp = sub.add_parser("spectra", help="orbit Markov chain spectrum as CSV")
    common(sp, ("csv",))
    sp = sub.add_parser("decay", help="correlation decay of a radius-r factor as CSV")
    common(sp, ("csv",))
    sp.add_argument("--factor", choices=("neighbor_count", "root_label"), default=None)
    sp.add_argument("--samples", type=int, default=None)
    sp.add_argument("--k-max", type=int, default=None)
    sp.add_argument("--k-min", type=int, default=None)
    sp = sub.add_parser("schreier", help="Schreier decoration of a 2d-regular graph")
    common(sp)
    sp.add_argument("--lift", dest="method", action="store_const", const="lift")
    sp = sub.add_parser("match", help="bipartite matching")
    common(sp)
    sp.add_argument("--local", dest="method", action="store_const", const="local")
    sp.add_argument("--rounds", type=int, default=None)
    sp.add_argument("--stats", default=None, help="CSV path for per-round statistics")
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    extra = {"stats": ns.stats} if getattr(ns, "stats", None) else {}
    return RunConfig(command=ns.command, input=ns.input, seed=ns.seed,
                     rounds=getattr(ns, "rounds", None), samples=getattr(ns, "samples", None),
                     k_max=getattr(ns, "k_max", None), k_min=getattr(ns, "k_min", None),
                     format=ns.format, method=getattr(ns, "method", None),
                     factor=getattr(ns, "factor", None), extra=extra)


def _apply_threads() -> None:
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return
    try:
        n = int(raw)
        if n < 1:
            raise ValueError
    except ValueError as exc:
        raise UnsupportedParams(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from exc
    import numba
    numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        _apply_threads()
        cfg = config_from_args(ns)
        COMMANDS[cfg.command](cfg, ns.out)
    except FiidError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {type(exc).__name__}: {exc.strerror or exc}: {exc.filename or ''}".rstrip(": "),
              file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
