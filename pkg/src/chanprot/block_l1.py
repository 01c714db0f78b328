"""Lifted block-l1 recovery.

Writing ``U = x h^T`` (``n x m``) turns ``y = Ax (*) h`` into the linear
system ``y = sum_i S^i A U[:, i]``. A ``k``-sparse channel makes ``U``
column-sparse, and the program

    minimize sum_i ||U[:, i]||_2   subject to   y = op(U)

is solved here with ADMM. Block index ``i`` is the 0-based channel delay.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from chanprot import numerics
from chanprot.channel import Channel, sparsify
from chanprot.codec import CodingMatrix

DEFAULT_MAX_M = 64


class BlockOperator:
    """``U -> sum_i S^i A U[:, i]``, evaluated as ``sum_c a_c (*) U[c, :]``.

    Row ``c`` of ``U`` convolves with column ``c`` of ``A``, so both the
    operator and its adjoint cost ``n`` FFTs of length ``m``.
    """

    def __init__(self, A: CodingMatrix | np.ndarray):
        self.A = A.matrix if isinstance(A, CodingMatrix) else np.asarray(A, dtype=float)
        self.m, self.n = self.A.shape
        self._spec = np.fft.fft(self.A, axis=0).T  # (n, m)
        # eigenvalues of op op^T, which is circulant
        self._gram = np.sum(np.abs(self._spec) ** 2, axis=0)

    def _check_U(self, U) -> np.ndarray:
        U = np.asarray(U, dtype=float)
        if U.shape != (self.n, self.m):
            raise ValueError(f"U has shape {U.shape}, expected {(self.n, self.m)}")
        return U

    def apply(self, U) -> np.ndarray:
        U = self._check_U(U)
        return np.fft.ifft(np.sum(self._spec * np.fft.fft(U, axis=1), axis=0)).real

    def adjoint(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.m,):
            raise ValueError(f"v has shape {v.shape}, expected ({self.m},)")
        return np.fft.ifft(np.conj(self._spec) * np.fft.fft(v)[None, :], axis=1).real

    def solve_gram(self, r) -> np.ndarray:
        """``(op op^T)^+ r`` through its DFT diagonalization."""
        scale = self._gram.max()
        inv = np.where(self._gram > 1e-12 * scale, 1.0 / np.where(self._gram > 0, self._gram, 1.0), 0.0)
        return np.fft.ifft(np.fft.fft(r) * inv).real

    def project(self, V, y) -> np.ndarray:
        """Euclidean projection of ``V`` onto ``{U : op(U) = y}``."""
        return V - self.adjoint(self.solve_gram(self.apply(V) - y))

    def todense(self) -> np.ndarray:
        """Explicit ``m x (n m)`` matrix acting on the column-major ``vec(U)``."""
        blocks = [np.roll(self.A, i, axis=0) for i in range(self.m)]
        return np.hstack(blocks)


def block_norms(U) -> np.ndarray:
    return np.linalg.norm(U, axis=0)


def block_soft_threshold(V, thresh: float) -> np.ndarray:
    """Column-wise shrinkage: columns shorter than ``thresh`` become zero."""
    norms = block_norms(V)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(norms > thresh, 1.0 - thresh / norms, 0.0)
    return V * scale


@dataclass
class BlockSolution:
    U_hat: np.ndarray
    objective: float
    feasibility_gap: float
    x_hat: np.ndarray
    h_hat: Channel
    spectral_ratio: float
    iterations: int
    converged: bool


def rank_one_factor(U, tol: float = 1e-10, max_iters: int = 10000, seed: int = 0):
    """Dominant singular pair of ``U`` by power iteration on ``U^T U``.

    Returns ``(x_hat, h_dense, spectral_ratio)`` with ``||x_hat|| = 1``,
    ``x_hat h^T`` the best rank-1 approximation and the sign fixed so the
    largest-magnitude entry of ``x_hat`` is positive.
    """
    U = np.asarray(U, dtype=float)
    n, m = U.shape
    cols = np.flatnonzero(np.any(U != 0, axis=0))
    if cols.size == 0:
        return np.zeros(n), np.zeros(m), 0.0
    G = U.T @ U
    v = np.random.default_rng(seed).standard_normal(m)
    v /= np.linalg.norm(v)
    for _ in range(max_iters):
        w = G @ v
        w /= np.linalg.norm(w)
        if w @ v < 0:
            w = -w
        done = np.linalg.norm(w - v) <= tol
        v = w
        if done:
            break
    u = U @ v
    sigma1 = np.linalg.norm(u)
    x_hat = u / sigma1
    h = sigma1 * v
    if x_hat[np.argmax(np.abs(x_hat))] < 0:
        x_hat, h = -x_hat, -h
    # singular values of the nonzero columns only: a single column is exactly rank 1
    sv = np.linalg.svd(U[:, cols], compute_uv=False)
    ratio = float(sv[1] / sv[0]) if sv.size > 1 else 0.0
    return x_hat, h, ratio


def _polish(op: BlockOperator, y, Z) -> np.ndarray | None:
    """Least-squares fit of ``y`` on the columns where ``Z`` is nonzero."""
    cols = np.flatnonzero(np.any(Z != 0, axis=0))
    if cols.size == 0 or cols.size * op.n >= op.m:
        return None
    M = np.hstack([np.roll(op.A, i, axis=0) for i in cols])
    try:
        coef = numerics.lstsq(M, y)
    except numerics.RankDeficientError:
        return None
    U = np.zeros((op.n, op.m))
    U[:, cols] = coef.reshape(cols.size, op.n).T
    return U


def solve_block_l1(op: BlockOperator, y, tol: float = 1e-6, max_iters: int = 5000,
                   rho: float = 1.0, max_m: int = DEFAULT_MAX_M) -> BlockSolution:
    """Minimize the sum of column norms of ``U`` subject to ``op(U) = y``.

    ADMM on ``U = Z`` with ``U`` restricted to the affine constraint set
    (an exact projection, since ``op op^T`` is circulant) and ``Z`` updated
    by block soft-thresholding. The penalty ``rho`` is rebalanced against
    the primal/dual residual ratio. When the support of ``Z`` is small
    enough, an exact refit on that support is tried and kept if it is at
    least as good.
    """
    y = numerics._as_vector(y)
    if y.size != op.m:
        raise ValueError(f"y has length {y.size}, expected {op.m}")
    if op.m > max_m:
        raise ValueError(f"m = {op.m} exceeds the desk-scale cap {max_m}")
    y_norm = np.linalg.norm(y)
    n, m = op.n, op.m
    if y_norm == 0:
        Z = np.zeros((n, m))
        return BlockSolution(Z, 0.0, 0.0, np.zeros(n), Channel(m, [], []), 0.0, 0, True)

    Z = np.zeros((n, m))
    W = np.zeros((n, m))
    U = op.project(Z, y)
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        U = op.project(Z - W, y)
        Z_old = Z
        Z = block_soft_threshold(U + W, 1.0 / rho)
        W = W + U - Z
        r_pri = np.linalg.norm(U - Z)
        r_dual = rho * np.linalg.norm(Z - Z_old)
        scale = max(np.linalg.norm(U), np.linalg.norm(Z), 1.0)
        if r_pri <= 1e-2 * tol * scale and r_dual <= 1e-2 * tol * scale:
            converged = True
            break
        if it % 20 == 0:
            if r_pri > 10 * r_dual:
                rho *= 2.0
                W /= 2.0
            elif r_dual > 10 * r_pri:
                rho /= 2.0
                W *= 2.0

    U_hat = U
    objective = float(block_norms(U).sum())
    polished = _polish(op, y, Z)
    if polished is not None:
        gap = np.linalg.norm(op.apply(polished) - y) / y_norm
        obj = float(block_norms(polished).sum())
        if gap <= tol and obj <= objective + tol:
            U_hat, objective = polished, obj
    gap = float(np.linalg.norm(op.apply(U_hat) - y) / y_norm)
    x_hat, h_vec, ratio = rank_one_factor(U_hat)
    return BlockSolution(U_hat, objective, gap, x_hat, sparsify(h_vec), ratio, it, converged)
