#!/usr/bin/env python
"""Success-probability map of AM recovery over (n, k).

Desk scale (m=128, 5x5 grid, 5 trials) by default; --full-scale runs the
m=256 / m=512 grids with 10 trials per cell.
"""
from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from chanprot.experiments import (
    DESK_SPEC,
    PhaseGridSpec,
    full_scale_spec,
    render_pgm,
    run_phase_diagram,
    write_diagram_csv,
    write_timing_csv,
)


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", type=Path, default=Path("results/phase"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--full-scale", type=int, choices=[256, 512])
    p.add_argument("--method", choices=["am", "block-l1"], default="am")
    args = p.parse_args()

    if args.full_scale:
        spec = full_scale_spec(args.full_scale, base_seed=args.seed)
    else:
        spec = PhaseGridSpec(**DESK_SPEC, base_seed=args.seed)
    args.out.mkdir(parents=True, exist_ok=True)
    d = run_phase_diagram(spec, args.method, workers=args.workers)
    write_diagram_csv(d, args.out / "diagram.csv")
    write_timing_csv(d, args.out / "timing.csv")
    render_pgm(d, args.out / "diagram.pgm", args.out / "contour.csv")

    print("rows: k =", spec.k_values, " cols: n =", spec.n_values)
    print(np.array2string(d.rates, precision=2))


if __name__ == "__main__":
    main()
