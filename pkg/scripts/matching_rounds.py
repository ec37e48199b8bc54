"""Unmatched fraction per round of the local augmenting scheme on random regular bipartite graphs."""

import argparse
import csv
import sys
import time
from dataclasses import dataclass

from fiidorient.graph import random_regular_bipartite
from fiidorient.matching import local_matching_rounds


@dataclass
class MatchingConfig:
    sizes: tuple = (1000, 10_000)
    degrees: tuple = (3, 4, 6)
    seeds: int = 5
    k_max: int = 12


def run(cfg: MatchingConfig, out) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["n", "degree", "seed", "round", "path_len", "flips", "unmatched_frac", "seconds"])
    for n in cfg.sizes:
        for k in cfg.degrees:
            for seed in range(cfg.seeds):
                g = random_regular_bipartite(n, k, seed)
                t0 = time.perf_counter()
                _, stats = local_matching_rounds(g, k_max=cfg.k_max, seed=seed)
                dt = time.perf_counter() - t0
                for rnd, length, flips, frac in stats.rows:
                    w.writerow([n, k, seed, rnd, length, flips, f"{frac:.3e}", f"{dt:.2f}"])


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="1000,10000")
    ap.add_argument("--degrees", default="3,4,6")
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--k-max", type=int, default=12)
    a = ap.parse_args()
    cfg = MatchingConfig(tuple(int(x) for x in a.sizes.split(",")),
                         tuple(int(x) for x in a.degrees.split(",")), a.seeds, a.k_max)
    run(cfg, sys.stdout)


if __name__ == "__main__":
    main()
