"""Dense linear algebra and Fourier primitives.

FFT convention: unnormalized forward transform, ``1/m`` on the inverse
(numpy's default), so ``fft(delta_0)`` is all ones and Parseval reads
``sum |v|^2 = sum |fft(v)|^2 / m``.

QR convention: thin factorization with a nonnegative diagonal in ``R``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

# |R_ii| <= RANK_RTOL * max |R_jj| is treated as rank deficiency
RANK_RTOL = 1e-12
# allowed imaginary residue of a real circular convolution, relative to its norm
IMAG_RTOL = 1e-9


class RankDeficientError(np.linalg.LinAlgError):
    """Matrix is rank deficient to working precision."""


def _as_vector(v, dtype=float) -> np.ndarray:
    v = np.asarray(v, dtype=dtype)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-d vector, got shape {v.shape}")
    if v.size == 0:
        raise ValueError("empty vector")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    return v


def fft(v) -> np.ndarray:
    """Unnormalized DFT of a real or complex vector."""
    v = _as_vector(v, dtype=complex)
    return np.fft.fft(v)


def ifft(v) -> np.ndarray:
    """Inverse DFT (carries the ``1/m`` factor)."""
    v = _as_vector(v, dtype=complex)
    return np.fft.ifft(v)


def circshift(v, s: int) -> np.ndarray:
    """Circular downward shift: ``out[j] = v[(j - s) mod m]``."""
    v = np.asarray(v)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("circshift expects a non-empty 1-d vector")
    return np.roll(v, int(s) % v.size)


def _real_part(z: np.ndarray) -> np.ndarray:
    re = z.real
    bound = IMAG_RTOL * np.linalg.norm(re) + np.finfo(float).tiny
    if np.linalg.norm(z.imag) > bound:
        raise ArithmeticError("imaginary residue too large for a real convolution")
    return np.ascontiguousarray(re)


def circconv(a, b) -> np.ndarray:
    """Circular convolution of two equal-length real vectors via the FFT."""
    a = _as_vector(a)
    b = _as_vector(b)
    if a.size != b.size:
        raise ValueError(f"length mismatch: {a.size} vs {b.size}")
    return _real_part(np.fft.ifft(np.fft.fft(a) * np.fft.fft(b)))


def circcorr(a, b) -> np.ndarray:
    """Circular cross-correlation ``out[j] = sum_t a[t - j] b[t]``.

    This is the adjoint of ``b -> circconv(a, b)``, i.e. ``C^T b`` for the
    circulant matrix ``C`` whose columns are the shifts of ``a``.
    """
    a = _as_vector(a)
    b = _as_vector(b)
    if a.size != b.size:
        raise ValueError(f"length mismatch: {a.size} vs {b.size}")
    return _real_part(np.fft.ifft(np.conj(np.fft.fft(a)) * np.fft.fft(b)))


@dataclass(frozen=True)
class QRFactors:
    q: np.ndarray
    r: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.q.shape[0], self.r.shape[1]


def qr(M) -> QRFactors:
    """Thin QR of a tall matrix, ``R`` with nonnegative diagonal.

    Raises RankDeficientError if some ``|R_ii|`` falls below
    ``RANK_RTOL * max |R_jj|``.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ValueError("qr expects a matrix")
    rows, cols = M.shape
    if rows < cols:
        raise ValueError(f"qr needs rows >= cols, got {rows}x{cols}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    q, r = np.linalg.qr(M, mode="reduced")
    signs = np.where(np.diag(r) < 0, -1.0, 1.0)
    q = q * signs
    r = r * signs[:, None]
    diag = np.diag(r)
    scale = diag.max() if diag.size else 0.0
    if scale == 0.0 or diag.min() <= RANK_RTOL * scale:
        raise RankDeficientError(
            f"rank deficient {rows}x{cols} matrix (min |R_ii| = {diag.min():.3e})"
        )
    return QRFactors(q=q, r=r)


def lstsq(M, y) -> np.ndarray:
    """Least-squares solution of ``M x = y`` through a QR factorization.

    ``M`` may be a matrix or precomputed ``QRFactors``.
    """
    f = M if isinstance(M, QRFactors) else qr(M)
    y = _as_vector(y)
    if y.size != f.q.shape[0]:
        raise ValueError(f"y has length {y.size}, expected {f.q.shape[0]}")
    return solve_triangular(f.r, f.q.T @ y, lower=False)
