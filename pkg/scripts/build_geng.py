"""Build nauty's geng into the fiidorient cache (needed by the n <= 10 expansion sweep)."""

import argparse

from fiidorient.corpus import CACHE_DIR, build_geng


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--archive", default=None, help="local pynauty sdist tarball (default: pip download)")
    ap.add_argument("--dest", default=str(CACHE_DIR / "geng"))
    args = ap.parse_args()
    print(build_geng(args.dest, args.archive))


if __name__ == "__main__":
    main()
