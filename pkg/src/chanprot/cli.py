"""Command-line entry point: ``chanprot <subcommand> [flags]``.

Every subcommand accepts ``--config FILE`` with flat ``key=value`` lines
naming flags (``n_values=4,8,16``); flags on the command line win.
Exit status is 0 unless arguments or I/O fail; recovery failures are data.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from chanprot import io
from chanprot.am import AMConfig, align_scale, channel_error, recover, write_trace_csv
from chanprot.block_l1 import BlockOperator, solve_block_l1
from chanprot.codec import CodingMatrix, encode, generate_coding_matrix
from chanprot.experiments import (
    DESK_SPEC,
    BlockConfig,
    PhaseGridSpec,
    baselines,
    derive_seed,
    full_scale_spec,
    make_instance,
    read_diagram_csv,
    render_pgm,
    run_phase_diagram,
    write_diagram_csv,
    write_timing_csv,
    write_trials_csv,
)
from chanprot.homotopy import CirculantOperator, solve_to_cardinality, write_path_csv


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.replace(",", " ").split()]


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--m", type=int, help="codeword / channel length")
    p.add_argument("--n", type=int, help="signal length")
    p.add_argument("--k", type=int, help="channel sparsity")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--out", type=Path, help="output directory or file")
    p.add_argument("--config", type=Path, help="key=value defaults file")


def _instance_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--instance", type=Path, help="directory written by `simulate`")
    p.add_argument("--matrix", type=Path, help="SCP1 coding matrix")
    p.add_argument("--received", type=Path, help="SCP1 received vector")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chanprot", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="generate a coding matrix and a codeword")
    _common(p)
    p.add_argument("--signal", type=Path, help="SCP1 signal (default: N(0,1) from --seed)")

    p = sub.add_parser("simulate", help="write a full random instance A, x, h, y")
    _common(p)

    p = sub.add_parser("recover-am", help="alternating minimization recovery")
    _common(p)
    _instance_flags(p)
    p.add_argument("--init-delay", type=int, help="known strongest-path delay")
    p.add_argument("--known-init", action="store_true",
                   help="take the strongest delay from the instance's true channel")
    p.add_argument("--r", type=int, default=3)
    p.add_argument("--k-max", type=int)
    p.add_argument("--max-iters", type=int)
    p.add_argument("--residual-tol", type=float, default=1e-6)
    p.add_argument("--no-refit", action="store_true")
    p.add_argument("--path-trace", type=Path,
                   help="CSV dump of the homotopy path of the final channel update")

    p = sub.add_parser("recover-block", help="lifted block-l1 recovery")
    _common(p)
    _instance_flags(p)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-iters", type=int, default=5000)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--max-m", type=int, default=64)

    p = sub.add_parser("baseline", help="known-channel and known-signal baselines")
    _common(p)

    p = sub.add_parser("phase-diagram", help="success-rate grid over (n, k)")
    _common(p)
    p.add_argument("--n-values", type=_int_list)
    p.add_argument("--k-values", type=_int_list)
    p.add_argument("--trials", type=int)
    p.add_argument("--method", choices=["am", "block-l1"], default="am")
    p.add_argument("--success-tol", type=float, default=1e-4)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--full-scale", action="store_true",
                   help="large grid for m=256 (default) or m=512; takes hours")

    p = sub.add_parser("render", help="PGM + 95%% contour from a diagram CSV")
    _common(p)
    p.add_argument("--in", dest="input", type=Path, required=True)
    return parser


def _with_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if args.config is None:
        return args
    try:
        cfg = io.read_config(args.config)
    except OSError as exc:
        parser.error(f"cannot read config {args.config}: {exc}")
    extra = []
    for key, value in cfg.items():
        flag = "--" + key.replace("_", "-")
        if value.lower() in ("true", "false"):
            if value.lower() == "true":
                extra.append(flag)
        else:
            extra.extend([flag, value])
    # config flags go first so that explicit flags override them
    return parser.parse_args([argv[0], *extra, *argv[1:]])


def _require(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise SystemExit(f"error: missing --{', --'.join(m.replace('_', '-') for m in missing)}")


def _out_dir(args) -> Path:
    _require(args, "out")
    args.out.mkdir(parents=True, exist_ok=True)
    return args.out


def _load(args):
    """(A, y, x_true or None, h_true or None) from --instance or --matrix/--received."""
    if args.instance is not None:
        d = args.instance
        A = CodingMatrix(io.read_array(d / "A.scp1"))
        y = io.read_array(d / "y.scp1")
        x = io.read_array(d / "x.scp1") if (d / "x.scp1").exists() else None
        h = io.read_channel_csv(d / "channel.csv") if (d / "channel.csv").exists() else None
        return A, y, x, h
    _require(args, "matrix", "received")
    return CodingMatrix(io.read_array(args.matrix)), io.read_array(args.received), None, None


def _write_summary(path: Path, row: dict) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(row))
        w.writerow([repr(v) if isinstance(v, float) else v for v in row.values()])


def cmd_encode(args) -> None:
    _require(args, "m", "n")
    out = _out_dir(args)
    A = generate_coding_matrix(args.m, args.n, derive_seed(args.seed, 1))
    if args.signal is not None:
        x = io.read_array(args.signal)
    else:
        x = np.random.default_rng(derive_seed(args.seed, 0)).standard_normal(args.n)
    io.write_array(out / "A.scp1", A.matrix)
    io.write_array(out / "x.scp1", x)
    io.write_array(out / "codeword.scp1", encode(A, x))


def cmd_simulate(args) -> None:
    _require(args, "m", "n", "k")
    out = _out_dir(args)
    inst = make_instance(args.m, args.n, args.k, args.seed, args.noise_sigma)
    io.write_array(out / "A.scp1", inst.A.matrix)
    io.write_array(out / "x.scp1", inst.x)
    io.write_array(out / "h.scp1", inst.h.dense())
    io.write_channel_csv(out / "channel.csv", inst.h)
    io.write_array(out / "y.scp1", inst.y)
    (out / "instance.txt").write_text(
        f"m={args.m}\nn={args.n}\nk={args.k}\nseed={args.seed}\n"
        f"noise_sigma={args.noise_sigma}\nstrongest_delay={inst.strongest_delay}\n"
    )


def cmd_recover_am(args) -> None:
    out = _out_dir(args)
    A, y, x_true, h_true = _load(args)
    init = args.init_delay
    if args.known_init:
        if h_true is None:
            raise SystemExit("error: --known-init needs an --instance with channel.csv")
        init = int(h_true.support[np.argmax(np.abs(h_true.taps))])
    cfg = AMConfig(args.r, args.k_max, args.max_iters, args.residual_tol, init, not args.no_refit)
    res = recover(A, y, cfg)
    io.write_array(out / "x_hat.scp1", res.x_hat)
    io.write_array(out / "h_hat.scp1", res.h_hat.dense())
    write_trace_csv(res.trace, out / "trace.csv")
    row = {"status": res.status, "iterations": res.iterations, "init_delay": res.init_delay,
           "residual": res.trace[-1].residual if res.trace else float("nan")}
    if x_true is not None and np.any(res.x_hat):
        alpha, row["rel_err_x"] = align_scale(res.x_hat, x_true)
        if h_true is not None:
            row["rel_err_h"] = channel_error(res.h_hat, h_true, alpha)
    _write_summary(out / "summary.csv", row)
    if args.path_trace is not None and np.any(res.x_hat):
        k_last = res.trace[-1].k if res.trace else 1
        path = solve_to_cardinality(CirculantOperator(A.matrix @ res.x_hat), y, k_last).path
        write_path_csv(path, args.path_trace)
    print(",".join(f"{k}={v}" for k, v in row.items()))


def cmd_recover_block(args) -> None:
    out = _out_dir(args)
    A, y, x_true, h_true = _load(args)
    sol = solve_block_l1(BlockOperator(A), y, args.tol, args.max_iters, args.rho, args.max_m)
    io.write_array(out / "U_hat.scp1", sol.U_hat)
    io.write_array(out / "x_hat.scp1", sol.x_hat)
    io.write_array(out / "h_hat.scp1", sol.h_hat.dense())
    row = {"objective": sol.objective, "feasibility_gap": sol.feasibility_gap,
           "spectral_ratio": sol.spectral_ratio, "iterations": sol.iterations,
           "converged": sol.converged}
    if x_true is not None and np.any(sol.x_hat):
        alpha, row["rel_err_x"] = align_scale(sol.x_hat, x_true)
        if h_true is not None:
            row["rel_err_h"] = channel_error(sol.h_hat, h_true, alpha)
    _write_summary(out / "summary.csv", row)
    print(",".join(f"{k}={v}" for k, v in row.items()))


def cmd_baseline(args) -> None:
    _require(args, "m", "n", "k")
    row = asdict(baselines(args.m, args.n, args.k, args.seed))
    if args.out is not None:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        _write_summary(args.out, row)
    w = csv.writer(sys.stdout)
    w.writerow(list(row))
    w.writerow(list(row.values()))


def cmd_phase_diagram(args) -> None:
    out = _out_dir(args)
    if args.full_scale:
        spec = full_scale_spec(args.m or 256, args.trials or 10, args.seed)
    else:
        spec = PhaseGridSpec(
            m=args.m or DESK_SPEC["m"],
            n_values=args.n_values or DESK_SPEC["n_values"],
            k_values=args.k_values or DESK_SPEC["k_values"],
            trials=args.trials or DESK_SPEC["trials"],
            base_seed=args.seed,
        )
    spec.success_tol = args.success_tol
    cfg = BlockConfig() if args.method == "block-l1" else None
    diagram = run_phase_diagram(spec, args.method, cfg, workers=args.workers)
    write_diagram_csv(diagram, out / "diagram.csv")
    write_trials_csv(diagram.records, out / "trials.csv")
    write_timing_csv(diagram, out / "timing.csv")
    render_pgm(diagram, out / "diagram.pgm", out / "contour.csv")
    print(np.array2string(diagram.rates, precision=2))


def cmd_render(args) -> None:
    _require(args, "out")
    diagram = read_diagram_csv(args.input)
    render_pgm(diagram, args.out)


COMMANDS = {
    "encode": cmd_encode,
    "simulate": cmd_simulate,
    "recover-am": cmd_recover_am,
    "recover-block": cmd_recover_block,
    "baseline": cmd_baseline,
    "phase-diagram": cmd_phase_diagram,
    "render": cmd_render,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = _with_config(parser, argv)
    try:
        COMMANDS[args.command](args)
    except (OSError, io.FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
