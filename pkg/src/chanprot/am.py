"""Alternating minimization for joint signal/channel recovery.

Minimizes ``0.5 * ||h (*) A x - y||^2 + tau * ||h||_1`` by alternating a
homotopy LASSO step in ``h`` (with a growing target cardinality
``k_j = ceil(j / r)``) and a least-squares step in ``x``, normalizing ``x``
after every iteration.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from chanprot import numerics
from chanprot.channel import Channel, convolve, delta, sparsify
from chanprot.codec import CodingMatrix
from chanprot.homotopy import (
    CirculantOperator,
    DegeneratePathError,
    solve_to_cardinality,
)

STATUSES = ("converged", "iteration-cap", "cardinality-cap", "degenerate")


class DegenerateError(RuntimeError):
    """A subproblem of the alternating scheme has no unique solution."""


@dataclass
class AMConfig:
    """Knobs of the alternating scheme.

    ``init_delay`` set to an index uses that delay as the known strongest
    path; ``None`` searches all delays with the matched filter.
    ``k_max`` and ``max_iters`` default to ``m // 4`` and ``r * k_max``.
    """

    r: int = 3
    k_max: int | None = None
    max_iters: int | None = None
    residual_tol: float = 1e-6
    init_delay: int | None = None
    refit: bool = True

    def resolved(self, m: int) -> "AMConfig":
        if self.r < 1:
            raise ValueError("r must be >= 1")
        if self.residual_tol <= 0:
            raise ValueError("residual_tol must be positive")
        k_max = self.k_max if self.k_max is not None else max(1, m // 4)
        if not 1 <= k_max <= m:
            raise ValueError(f"k_max must lie in [1, {m}]")
        max_iters = self.max_iters if self.max_iters is not None else self.r * k_max
        return AMConfig(self.r, k_max, max_iters, self.residual_tol,
                        self.init_delay, self.refit)


@dataclass(frozen=True)
class IterationRecord:
    j: int
    k: int
    tau: float
    residual: float
    support: tuple[int, ...]
    # ||H_j x_{j-1} - y|| and ||H_j x_j - y|| before normalization
    ls_before: float
    ls_after: float
    x_norm: float
    refit: bool


@dataclass
class RecoveryResult:
    x_hat: np.ndarray
    h_hat: Channel
    status: str
    trace: list[IterationRecord] = field(default_factory=list)
    init_delay: int = 0

    @property
    def iterations(self) -> int:
        return len(self.trace)


def strongest_path_init(A: CodingMatrix, y):
    """Matched-filter search for the dominant delay.

    For every delay ``d`` the least-squares residual of ``S^d A x = y`` is
    ``||y||^2 - ||Q^T S^{-d} y||^2`` with ``A = QR``, so a single QR and one
    FFT cross-correlation per column of ``Q`` score all delays at once.
    Returns ``(d, x0, h0)`` with ``x0`` of unit norm and ``h0 = delta_d``.
    """
    y = numerics._as_vector(y)
    if y.size != A.m:
        raise ValueError(f"y has length {y.size}, expected {A.m}")
    q = A.qr.q
    # proj[c, d] = <q_c, S^{-d} y> = sum_t q_c[t] y[t + d]
    proj = np.fft.ifft(np.conj(np.fft.fft(q, axis=0)) * np.fft.fft(y)[:, None], axis=0).real
    energy = np.sum(proj**2, axis=1)
    d = int(np.argmax(energy))
    x0 = numerics.lstsq(A.qr, np.roll(y, -d))
    nrm = np.linalg.norm(x0)
    if nrm == 0:
        raise DegenerateError("zero least-squares fit at every delay")
    return d, x0 / nrm, delta(A.m, d)


def channel_matrix(A: CodingMatrix, h: Channel) -> np.ndarray:
    """``H = h (*) A``: every column of ``A`` convolved with the channel."""
    spec = np.fft.fft(h.dense())
    return np.fft.ifft(spec[:, None] * A.column_spectra, axis=0).real


def signal_update(A: CodingMatrix, h: Channel, y) -> np.ndarray:
    """Least-squares signal estimate for a fixed channel."""
    y = numerics._as_vector(y)
    if h.k == 0:
        raise DegenerateError("zero channel estimate")
    try:
        return numerics.lstsq(channel_matrix(A, h), y)
    except numerics.RankDeficientError as exc:
        raise DegenerateError(f"channel matrix H is rank deficient: {exc}") from exc


def channel_update(A: CodingMatrix, x, y, k_target: int):
    """Sparse channel estimate for a fixed signal via the LASSO homotopy.

    Returns ``(h, tau, result)``; ``h`` holds the homotopy solution as is.
    """
    x = np.asarray(x, dtype=float)
    if not np.any(x):
        raise ValueError("signal estimate is zero")
    C = CirculantOperator(A.matrix @ x)
    res = solve_to_cardinality(C, y, k_target)
    return sparsify(res.solution), res.tau_final, res


def refit_taps(A: CodingMatrix, x, y, h: Channel) -> Channel:
    """Least-squares tap values on a fixed support (removes l1 shrinkage)."""
    if h.k == 0:
        return h
    C = CirculantOperator(A.matrix @ np.asarray(x, dtype=float))
    try:
        taps = numerics.lstsq(C.columns(h.support), y)
    except numerics.RankDeficientError as exc:
        raise DegenerateError(f"support columns are dependent: {exc}") from exc
    keep = taps != 0
    return Channel(h.m, h.support[keep], taps[keep])


def recover(A: CodingMatrix, y, cfg: AMConfig | None = None) -> RecoveryResult:
    """Run the alternating scheme; all failures are reported as a status."""
    y = numerics._as_vector(y)
    if y.size != A.m:
        raise ValueError(f"y has length {y.size}, expected {A.m}")
    cfg = (cfg or AMConfig()).resolved(A.m)
    y_norm = np.linalg.norm(y)
    if y_norm == 0:
        return RecoveryResult(np.zeros(A.n), Channel(A.m, [], []), "degenerate")

    try:
        if cfg.init_delay is None:
            d0, x, h = strongest_path_init(A, y)
        else:
            d0 = int(cfg.init_delay) % A.m
            h = delta(A.m, d0)
            x = signal_update(A, h, y)
            x = x / np.linalg.norm(x)
    except (DegenerateError, numerics.RankDeficientError):
        return RecoveryResult(np.zeros(A.n), Channel(A.m, [], []), "degenerate")

    trace: list[IterationRecord] = []
    status = "iteration-cap"
    j = 0
    while True:
        j += 1
        k_j = math.ceil(j / cfg.r)
        if j > cfg.max_iters:
            status = "iteration-cap"
            break
        if k_j > cfg.k_max:
            status = "cardinality-cap"
            break
        try:
            h_j, tau_j, _ = channel_update(A, x, y, k_j)
            if cfg.refit:
                h_j = refit_taps(A, x, y, h_j)
            H = channel_matrix(A, h_j)
            x_new = signal_update(A, h_j, y)
        except (DegenerateError, DegeneratePathError, ValueError):
            status = "degenerate"
            break
        ls_before = float(np.linalg.norm(H @ x - y))
        ls_after = float(np.linalg.norm(H @ x_new - y))
        nrm = np.linalg.norm(x_new)
        if nrm == 0:
            status = "degenerate"
            break
        x = x_new / nrm
        h = h_j.scaled(nrm)
        residual = float(np.linalg.norm(convolve(A.matrix @ x, h) - y))
        trace.append(IterationRecord(j, k_j, float(tau_j), residual,
                                     tuple(int(i) for i in h.support),
                                     ls_before, ls_after, float(np.linalg.norm(x)),
                                     cfg.refit))
        if residual <= cfg.residual_tol * y_norm:
            status = "converged"
            break
    return RecoveryResult(x, h, status, trace, d0)


def align_scale(x_hat, x_true):
    """Best scalar ``alpha`` with ``alpha * x_hat ~ x_true`` and the relative error left."""
    x_hat = np.asarray(x_hat, dtype=float)
    x_true = np.asarray(x_true, dtype=float)
    nh = float(x_hat @ x_hat)
    if nh == 0:
        raise ValueError("x_hat is zero")
    alpha = float(x_hat @ x_true) / nh
    nt = np.linalg.norm(x_true)
    rel = np.linalg.norm(alpha * x_hat - x_true) / (nt if nt > 0 else 1.0)
    return alpha, float(rel)


def channel_error(h_hat: Channel, h_true: Channel, alpha: float) -> float:
    """Relative error of ``h_hat / alpha`` against the true channel."""
    if alpha == 0:
        return 1.0
    ht = h_true.dense()
    return float(np.linalg.norm(h_hat.dense() / alpha - ht) / np.linalg.norm(ht))


def write_trace_csv(trace: list[IterationRecord], fname) -> None:
    with open(fname, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iter", "k_j", "tau_j", "residual", "support"])
        for rec in trace:
            w.writerow([rec.j, rec.k, repr(rec.tau), repr(rec.residual),
                        " ".join(str(i) for i in rec.support)])
