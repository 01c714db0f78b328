"""Gaussian coding matrices and codewords."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from chanprot import numerics


@dataclass(frozen=True, eq=False)
class CodingMatrix:
    """An ``m x n`` coding matrix with i.i.d. N(0, 1/m) entries.

    ``seed`` is ``None`` for matrices loaded from disk.
    """

    matrix: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        a = np.asarray(self.matrix, dtype=float)
        if a.ndim != 2:
            raise ValueError("coding matrix must be 2-d")
        m, n = a.shape
        if not 1 <= n < m:
            raise ValueError(f"coding matrix must expand the signal (n < m), got {m}x{n}")
        if not np.all(np.isfinite(a)):
            raise ValueError("coding matrix has non-finite entries")
        a.setflags(write=False)
        object.__setattr__(self, "matrix", a)

    @property
    def m(self) -> int:
        return self.matrix.shape[0]

    @property
    def n(self) -> int:
        return self.matrix.shape[1]

    @cached_property
    def qr(self) -> numerics.QRFactors:
        return numerics.qr(self.matrix)

    @cached_property
    def column_spectra(self) -> np.ndarray:
        """DFT of every column, shape ``(m, n)``."""
        return np.fft.fft(self.matrix, axis=0)


def generate_coding_matrix(m: int, n: int, seed: int) -> CodingMatrix:
    if not 1 <= n < m:
        raise ValueError(f"need 1 <= n < m, got m={m}, n={n}")
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((m, n)) / np.sqrt(m)
    return CodingMatrix(a, seed=seed)


def encode(A: CodingMatrix, x) -> np.ndarray:
    """Codeword ``A x``."""
    x = np.asarray(x, dtype=float)
    if x.shape != (A.n,):
        raise ValueError(f"signal has shape {x.shape}, expected ({A.n},)")
    return A.matrix @ x
