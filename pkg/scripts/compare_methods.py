#!/usr/bin/env python
"""AM against lifted block-l1 on the same instances (m <= 64)."""
from __future__ import annotations

import argparse

from chanprot.experiments import derive_seed, run_trial


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--m", type=int, default=64)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    print("n,k,am_rate,block_rate,block_mean_spectral_ratio")
    for n in (2, 4, 8):
        for k in (1, 2, 4, 8):
            seeds = [derive_seed(args.seed, n, k, t) for t in range(args.trials)]
            am = [run_trial(args.m, n, k, s, "am") for s in seeds]
            bl = [run_trial(args.m, n, k, s, "block-l1") for s in seeds]
            ratio = sum(r.spectral_ratio for r in bl) / len(bl)
            print(f"{n},{k},{sum(r.success for r in am) / len(am):.2f},"
                  f"{sum(r.success for r in bl) / len(bl):.2f},{ratio:.3f}")


if __name__ == "__main__":
    main()
