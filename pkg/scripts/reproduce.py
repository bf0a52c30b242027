"""Run every study config and print the fitted slopes.

    python scripts/reproduce.py [--out results] [--threads 0]
"""

import argparse
import time
from pathlib import Path

from ibim.cli import run_config

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--out", default="results")
    p.add_argument("--threads", type=int, default=0)
    p.add_argument("names", nargs="*", help="config stems (default: all)")
    args = p.parse_args()
    paths = [CONFIGS / f"{n}.toml" for n in args.names] or sorted(CONFIGS.glob("*.toml"))
    for path in paths:
        command = "variance" if 'kind = "variance"' in path.read_text() else "convergence"
        t0 = time.perf_counter()
        run_config(command, path, args.out, threads=args.threads, log=lambda s: print("  " + s))
        print(f"{path.stem}: {time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()
