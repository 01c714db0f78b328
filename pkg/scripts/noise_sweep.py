#!/usr/bin/env python
"""Recovery error of AM under additive white noise, averaged over seeds."""
from __future__ import annotations

import argparse

import numpy as np

from chanprot.am import AMConfig
from chanprot.experiments import derive_seed, run_trial


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--m", type=int, default=128)
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    # the residual can't drop below the noise floor, so stop on the cardinality cap
    cfg = AMConfig(r=10, k_max=args.k, residual_tol=1e-12)
    print("sigma,median_rel_err_x,median_rel_err_h")
    for sigma in (0.0, 1e-4, 1e-3, 1e-2, 3e-2, 1e-1):
        ex, eh = [], []
        for t in range(args.trials):
            rec = run_trial(args.m, args.n, args.k, derive_seed(args.seed, t), "am", cfg,
                            noise_sigma=sigma)
            ex.append(rec.rel_err_x)
            eh.append(rec.rel_err_h)
        print(f"{sigma:g},{np.median(ex):.3e},{np.median(eh):.3e}")


if __name__ == "__main__":
    main()
