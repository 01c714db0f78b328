"""Sparse multipath channels acting by circular convolution."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from chanprot import numerics

# above this many taps the FFT path beats the shifted-sum path
_SPARSE_TAP_LIMIT = 32


@dataclass(frozen=True, eq=False)
class Channel:
    """A sparse impulse response of length ``m``.

    Generated channels have ``k >= 1`` nonzero taps. Estimates produced by
    the solvers may be empty (the zero channel).
    """

    m: int
    support: np.ndarray
    taps: np.ndarray

    def __post_init__(self):
        support = np.asarray(self.support, dtype=np.int64).reshape(-1)
        taps = np.asarray(self.taps, dtype=float).reshape(-1)
        if self.m < 1:
            raise ValueError("channel length must be positive")
        if support.size != taps.size:
            raise ValueError("support and taps differ in length")
        if support.size and (support[0] < 0 or support[-1] >= self.m):
            raise ValueError("support index out of range")
        if np.any(np.diff(support) <= 0):
            raise ValueError("support must be strictly increasing")
        if not np.all(np.isfinite(taps)) or np.any(taps == 0):
            raise ValueError("taps must be finite and nonzero")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "taps", taps)

    @property
    def k(self) -> int:
        return int(self.support.size)

    def dense(self) -> np.ndarray:
        return dense(self)

    def scaled(self, alpha: float) -> "Channel":
        return Channel(self.m, self.support, self.taps * alpha)


@dataclass(frozen=True, eq=False)
class Received:
    y: np.ndarray
    noise_sigma: float = 0.0


def dense(h: Channel) -> np.ndarray:
    v = np.zeros(h.m)
    v[h.support] = h.taps
    return v


def sparsify(v) -> Channel:
    """Inverse of :func:`dense`: keep the exact nonzeros of ``v``."""
    v = np.asarray(v, dtype=float)
    support = np.flatnonzero(v)
    return Channel(v.size, support, v[support])


def delta(m: int, d: int, amplitude: float = 1.0) -> Channel:
    """Single-path channel: a pure delay by ``d`` samples."""
    return Channel(m, [d % m], [amplitude])


def generate_channel(m: int, k: int, seed: int) -> Channel:
    """k-sparse channel, uniform random support, N(0,1) taps."""
    if not 1 <= k <= m:
        raise ValueError(f"need 1 <= k <= m, got m={m}, k={k}")
    rng = np.random.default_rng(seed)
    support = np.sort(rng.choice(m, size=k, replace=False))
    taps = rng.standard_normal(k)
    # a N(0,1) draw of exactly zero is a probability-zero event; redraw anyway
    while np.any(taps == 0):
        taps[taps == 0] = rng.standard_normal(np.count_nonzero(taps == 0))
    return Channel(m, support, taps)


def convolve(codeword, h: Channel) -> np.ndarray:
    """Noiseless channel output ``codeword (*) h``."""
    codeword = np.asarray(codeword, dtype=float)
    if codeword.shape != (h.m,):
        raise ValueError(f"codeword length {codeword.size} != channel length {h.m}")
    if h.k > _SPARSE_TAP_LIMIT:
        return numerics.circconv(codeword, dense(h))
    out = np.zeros(h.m)
    for d, tap in zip(h.support, h.taps):
        out += tap * np.roll(codeword, d)
    return out


def apply_channel(codeword, h: Channel, noise_sigma: float = 0.0,
                  noise_seed: int | None = None) -> Received:
    """Pass a codeword through the channel and add white Gaussian noise."""
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be nonnegative")
    y = convolve(codeword, h)
    if noise_sigma > 0:
        rng = np.random.default_rng(noise_seed)
        y = y + noise_sigma * rng.standard_normal(h.m)
    return Received(y=y, noise_sigma=float(noise_sigma))
