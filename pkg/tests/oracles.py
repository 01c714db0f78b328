"""Brute-force reference computations, independent of the package code paths."""

import itertools

import numpy as np


def direct_dft(v):
    v = np.asarray(v, dtype=complex)
    m = v.size
    out = np.zeros(m, dtype=complex)
    for f in range(m):
        for t in range(m):
            out[f] += v[t] * np.exp(-2j * np.pi * f * t / m)
    return out


def direct_circconv(a, b):
    m = len(a)
    out = np.zeros(m)
    for j in range(m):
        for t in range(m):
            out[j] += a[t] * b[(j - t) % m]
    return out


def circulant(g):
    """Dense circulant matrix, column j = g shifted down by j."""
    m = len(g)
    C = np.zeros((m, m))
    for i in range(m):
        for j in range(m):
            C[i, j] = g[(i - j) % m]
    return C


def stacked_block_matrix(A):
    """[A, S A, S^2 A, ...] built row by row from the shift definition."""
    m, n = A.shape
    M = np.zeros((m, m * n))
    for i in range(m):
        for r in range(m):
            M[r, i * n:(i + 1) * n] = A[(r - i) % m, :]
    return M


def lasso_objective(C, y, h, tau):
    return 0.5 * np.sum((C @ h - y) ** 2) + tau * np.sum(np.abs(h))


def exhaustive_lasso(C, y, tau, max_support=3):
    """Global LASSO minimizer among all points with at most ``max_support`` nonzeros.

    For each support S and sign pattern z the stationarity condition
    C_S^T (y - C_S h_S) = tau z gives h_S in closed form; candidates whose
    signs agree with z are feasible points, and the best objective wins.
    """
    m = C.shape[1]
    best_h = np.zeros(m)
    best = lasso_objective(C, y, best_h, tau)
    for size in range(1, max_support + 1):
        for S in itertools.combinations(range(m), size):
            Cs = C[:, S]
            G = Cs.T @ Cs
            if np.linalg.cond(G) > 1e12:
                continue
            for z in itertools.product((-1.0, 1.0), repeat=size):
                hs = np.linalg.solve(G, Cs.T @ y - tau * np.array(z))
                if np.any(np.sign(hs) != np.array(z)):
                    continue
                h = np.zeros(m)
                h[list(S)] = hs
                obj = lasso_objective(C, y, h, tau)
                if obj < best:
                    best, best_h = obj, h
    return best_h, best


def soft(y, tau):
    return np.sign(y) * np.maximum(np.abs(y) - tau, 0.0)
