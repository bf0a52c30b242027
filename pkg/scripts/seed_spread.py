"""Slope spread of one config's studies over several seeds.

Single-frame error fits are noisy; this shows how far a slope moves with the
random center and shift.

    python scripts/seed_spread.py configs/sphere.toml --seeds 0 1 2 3
"""

import argparse

import numpy as np

from ibim.cli import load_config
from ibim.experiments import run_study


def main():
    p = argparse.ArgumentParser()
    p.add_argument("config")
    p.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3])
    p.add_argument("--command", default="convergence", choices=["convergence", "variance"])
    args = p.parse_args()
    slopes = {}
    for seed in args.seeds:
        for cfg in load_config(args.config, args.command, seed):
            slopes.setdefault(cfg.study_id, []).append(run_study(cfg, threads=0).slope)
    for sid, s in slopes.items():
        s = np.array(s)
        print(f"{sid:24s} mean {s.mean():6.3f}  sd {s.std(ddof=1) if len(s) > 1 else 0:5.3f}  "
              + " ".join(f"{v:.2f}" for v in s))


if __name__ == "__main__":
    main()
