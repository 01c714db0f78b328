"""Monte Carlo harness: single trials, phase diagrams and known-side baselines.

Seeds: a trial seed is ``SeedSequence([base_seed, n, k, trial]).generate_state``
(numpy's hash-based entropy mixing) truncated to one 64-bit word, so each
trial's randomness depends only on its grid coordinates. Inside a trial the
signal, coding matrix, channel and noise draw from four words of
``SeedSequence(trial_seed)``.
"""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from chanprot.am import (
    AMConfig,
    DegenerateError,
    align_scale,
    channel_error,
    recover,
    signal_update,
)
from chanprot.block_l1 import DEFAULT_MAX_M, BlockOperator, solve_block_l1
from chanprot.channel import Channel, apply_channel, generate_channel
from chanprot.codec import CodingMatrix, encode, generate_coding_matrix
from chanprot.homotopy import CirculantOperator, DegeneratePathError, solve_to_cardinality
from chanprot.io import write_pgm

METHODS = ("am", "block-l1")
DEFAULT_SUCCESS_TOL = 1e-4


def derive_seed(*keys: int) -> int:
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1, np.uint64)[0])


@dataclass
class Instance:
    A: CodingMatrix
    x: np.ndarray
    h: Channel
    y: np.ndarray
    noise_sigma: float = 0.0

    @property
    def strongest_delay(self) -> int:
        return int(self.h.support[np.argmax(np.abs(self.h.taps))])


def make_instance(m: int, n: int, k: int, seed: int, noise_sigma: float = 0.0) -> Instance:
    sx, sa, sh, sn = (int(s) for s in np.random.SeedSequence(seed).generate_state(4, np.uint64))
    x = np.random.default_rng(sx).standard_normal(n)
    A = generate_coding_matrix(m, n, sa)
    h = generate_channel(m, k, sh)
    y = apply_channel(encode(A, x), h, noise_sigma, sn).y
    return Instance(A, x, h, y, noise_sigma)


@dataclass
class BlockConfig:
    tol: float = 1e-6
    max_iters: int = 5000
    rho: float = 1.0
    max_m: int = DEFAULT_MAX_M


@dataclass
class TrialRecord:
    m: int
    n: int
    k: int
    seed: int
    method: str
    success: bool
    rel_err_x: float
    rel_err_h: float
    iterations: int
    status: str
    wall_time: float = 0.0
    # largest | ||x_j|| - 1 | and largest LS-descent excess over the trace
    max_norm_dev: float = 0.0
    max_descent_excess: float = 0.0
    objective: float = math.nan
    truth_objective: float = math.nan
    feasibility_gap: float = math.nan
    spectral_ratio: float = math.nan

    def same_outcome(self, other: "TrialRecord") -> bool:
        a, b = asdict(self), asdict(other)
        a.pop("wall_time")
        b.pop("wall_time")
        return all(a[key] == b[key] or (isinstance(a[key], float) and math.isnan(a[key])
                                       and math.isnan(b[key])) for key in a)


def run_trial(m: int, n: int, k: int, seed: int, method: str = "am", cfg=None,
              success_tol: float | None = None, noise_sigma: float = 0.0) -> TrialRecord:
    """One random instance, one recovery. Never raises on recovery failure.

    AM runs start from the known strongest channel path. Noisy trials only
    count as a success when ``success_tol`` is given explicitly.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    if success_tol is None:
        success_tol = DEFAULT_SUCCESS_TOL if noise_sigma == 0 else -math.inf
    inst = make_instance(m, n, k, seed, noise_sigma)
    t0 = time.perf_counter()
    rec = TrialRecord(m, n, k, seed, method, False, 1.0, 1.0, 0, "")
    if method == "am":
        base = cfg or AMConfig()
        cfg = AMConfig(base.r, base.k_max, base.max_iters, base.residual_tol,
                       inst.strongest_delay, base.refit)
        res = recover(inst.A, inst.y, cfg)
        rec.status = res.status
        rec.iterations = res.iterations
        x_hat, h_hat = res.x_hat, res.h_hat
        if res.trace:
            rec.max_norm_dev = max(abs(t.x_norm - 1.0) for t in res.trace)
            rec.max_descent_excess = max(t.ls_after - t.ls_before for t in res.trace)
    else:
        cfg = cfg or BlockConfig()
        if m > cfg.max_m:
            rec.status = "too-large"
            rec.wall_time = time.perf_counter() - t0
            return rec
        sol = solve_block_l1(BlockOperator(inst.A), inst.y, cfg.tol, cfg.max_iters,
                             cfg.rho, cfg.max_m)
        rec.status = "converged" if sol.converged else "iteration-cap"
        rec.iterations = sol.iterations
        rec.objective = sol.objective
        rec.truth_objective = float(np.linalg.norm(inst.x) * np.abs(inst.h.taps).sum())
        rec.feasibility_gap = sol.feasibility_gap
        rec.spectral_ratio = sol.spectral_ratio
        x_hat, h_hat = sol.x_hat, sol.h_hat
    if np.any(x_hat):
        alpha, rec.rel_err_x = align_scale(x_hat, inst.x)
        rec.rel_err_h = channel_error(h_hat, inst.h, alpha)
    rec.success = bool(max(rec.rel_err_x, rec.rel_err_h) <= success_tol)
    rec.wall_time = time.perf_counter() - t0
    return rec


@dataclass
class PhaseGridSpec:
    m: int
    n_values: list[int]
    k_values: list[int]
    trials: int = 5
    base_seed: int = 0
    success_tol: float = DEFAULT_SUCCESS_TOL

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        for vals, name in ((self.n_values, "n_values"), (self.k_values, "k_values")):
            if not vals or any(b <= a for a, b in zip(vals, vals[1:])):
                raise ValueError(f"{name} must be non-empty and increasing")
        if self.n_values[0] < 1 or self.n_values[-1] >= self.m:
            raise ValueError("every n must satisfy 1 <= n < m")
        if self.k_values[0] < 1 or self.k_values[-1] > self.m:
            raise ValueError("every k must satisfy 1 <= k <= m")


def full_scale_spec(m: int, trials: int = 10, base_seed: int = 0) -> PhaseGridSpec:
    """Large grids: 8x8 cells at m=256, 10x10 at m=512."""
    if m == 256:
        return PhaseGridSpec(256, list(range(16, 129, 16)), list(range(2, 17, 2)), trials, base_seed)
    if m == 512:
        return PhaseGridSpec(512, list(range(32, 321, 32)), list(range(3, 31, 3)), trials, base_seed)
    raise ValueError("full-scale grids exist for m=256 and m=512")


DESK_SPEC = dict(m=128, n_values=[4, 8, 16, 32, 64], k_values=[1, 2, 4, 8, 16], trials=5)


@dataclass
class PhaseDiagram:
    spec: PhaseGridSpec
    method: str
    successes: np.ndarray  # (len(k_values), len(n_values))
    mean_iterations: np.ndarray
    mean_wall_time: np.ndarray
    records: list[TrialRecord] = field(default_factory=list)

    @property
    def rates(self) -> np.ndarray:
        return self.successes / self.spec.trials

    def rate(self, n: int, k: int) -> float:
        return float(self.rates[self.spec.k_values.index(k), self.spec.n_values.index(n)])


def _trial_task(args):
    return run_trial(*args)


def run_phase_diagram(spec: PhaseGridSpec, method: str = "am", cfg=None,
                      workers: int = 1) -> PhaseDiagram:
    """Success rate on every ``(n, k)`` cell; independent of ``workers``."""
    tasks = []
    for n in spec.n_values:
        for k in spec.k_values:
            for t in range(spec.trials):
                seed = derive_seed(spec.base_seed, n, k, t)
                tasks.append((spec.m, n, k, seed, method, cfg, spec.success_tol))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_trial_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        records = [_trial_task(t) for t in tasks]

    shape = (len(spec.k_values), len(spec.n_values))
    succ = np.zeros(shape, dtype=int)
    iters = np.zeros(shape)
    wall = np.zeros(shape)
    for rec in records:
        cell = spec.k_values.index(rec.k), spec.n_values.index(rec.n)
        succ[cell] += rec.success
        iters[cell] += rec.iterations
        wall[cell] += rec.wall_time
    return PhaseDiagram(spec, method, succ, iters / spec.trials, wall / spec.trials, records)


def write_diagram_csv(diagram: PhaseDiagram, path) -> None:
    spec = diagram.spec
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["method", "m", "n", "k", "trials", "successes", "rate", "mean_iterations"])
        for i, k in enumerate(spec.k_values):
            for j, n in enumerate(spec.n_values):
                w.writerow([diagram.method, spec.m, n, k, spec.trials,
                            int(diagram.successes[i, j]),
                            repr(float(diagram.rates[i, j])),
                            repr(float(diagram.mean_iterations[i, j]))])


def write_timing_csv(diagram: PhaseDiagram, path) -> None:
    spec = diagram.spec
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "k", "mean_wall_time_s"])
        for i, k in enumerate(spec.k_values):
            for j, n in enumerate(spec.n_values):
                w.writerow([n, k, f"{diagram.mean_wall_time[i, j]:.6f}"])


def write_trials_csv(records: list[TrialRecord], path) -> None:
    cols = [f for f in TrialRecord.__dataclass_fields__ if f != "wall_time"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for rec in records:
            row = asdict(rec)
            w.writerow([repr(row[c]) if isinstance(row[c], float) else row[c] for c in cols])


def read_diagram_csv(path) -> PhaseDiagram:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path}: empty diagram")
    n_values = sorted({int(r["n"]) for r in rows})
    k_values = sorted({int(r["k"]) for r in rows})
    trials = int(rows[0]["trials"])
    spec = PhaseGridSpec(int(rows[0]["m"]), n_values, k_values, trials)
    succ = np.zeros((len(k_values), len(n_values)), dtype=int)
    iters = np.zeros(succ.shape)
    seen = np.zeros(succ.shape, dtype=bool)
    for r in rows:
        cell = k_values.index(int(r["k"])), n_values.index(int(r["n"]))
        succ[cell] = int(r["successes"])
        iters[cell] = float(r["mean_iterations"])
        seen[cell] = True
    if not seen.all():
        raise ValueError(f"{path}: incomplete grid")
    return PhaseDiagram(spec, rows[0]["method"], succ, iters, np.zeros(succ.shape))


def quantize(rates) -> np.ndarray:
    """Grey level ``round(255 * rate)`` with halves rounded up."""
    return np.floor(255.0 * np.asarray(rates) + 0.5).astype(np.uint8)


def contour_cells(rates, level: float = 0.95) -> list[tuple[int, int]]:
    """Cells at or above ``level`` with a 4-neighbour below it, as (row, col)."""
    rates = np.asarray(rates)
    high = rates >= level
    rows, cols = rates.shape
    out = []
    for i in range(rows):
        for j in range(cols):
            if not high[i, j]:
                continue
            for di, dj in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                a, b = i + di, j + dj
                if 0 <= a < rows and 0 <= b < cols and not high[a, b]:
                    out.append((i, j))
                    break
    return out


def render_pgm(diagram: PhaseDiagram, path, contour_path=None) -> None:
    """Greymap with rows = k ascending downward and cols = n ascending rightward.

    The 95% boundary cells go to ``contour_path`` (default: ``<path>.contour.csv``).
    """
    write_pgm(path, quantize(diagram.rates))
    if contour_path is None:
        contour_path = f"{path}.contour.csv"
    spec = diagram.spec
    with open(contour_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "k", "rate"])
        for i, j in contour_cells(diagram.rates):
            w.writerow([spec.n_values[j], spec.k_values[i], repr(float(diagram.rates[i, j]))])


@dataclass
class BaselineReport:
    m: int
    n: int
    k: int
    seed: int
    known_channel_status: str
    known_channel_rel_err: float
    known_signal_status: str
    known_signal_rel_err: float
    known_signal_support_match: bool


def baselines(m: int, n: int, k: int, seed: int) -> BaselineReport:
    """The two one-sided problems: x from known h, and h from known x."""
    inst = make_instance(m, n, k, seed)
    try:
        x_hat = signal_update(inst.A, inst.h, inst.y)
        ch_status = "ok"
        ch_err = float(np.linalg.norm(x_hat - inst.x) / np.linalg.norm(inst.x))
    except DegenerateError:
        ch_status, ch_err = "rank-deficient", math.nan

    C = CirculantOperator(encode(inst.A, inst.x))
    try:
        res = solve_to_cardinality(C, inst.y, k)
        h_hat = res.solution
        ht = inst.h.dense()
        sig_status = res.status
        sig_err = float(np.linalg.norm(h_hat - ht) / np.linalg.norm(ht))
        match = bool(np.array_equal(np.flatnonzero(h_hat), inst.h.support))
    except DegeneratePathError:
        sig_status, sig_err, match = "degenerate", math.nan, False
    return BaselineReport(m, n, k, seed, ch_status, ch_err, sig_status, sig_err, match)
