"""LASSO homotopy for circulant systems.

Solves ``minimize 0.5 * ||C h - y||^2 + tau * ||h||_1`` where ``C`` is the
circulant matrix generated by a vector ``g`` (column ``j`` is ``g`` shifted
down by ``j``). The solution path is followed from ``tau0 = ||C^T y||_inf``
downward; each breakpoint adds or removes one index of the active set.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from chanprot import numerics

# eigenvalue ratio of the active Gram matrix below which the path is degenerate
GRAM_RCOND = 1e-12
# relative window inside which two event steps count as simultaneous
TIE_RTOL = 1e-12


class DegeneratePathError(RuntimeError):
    """Active-set Gram matrix is singular; the path cannot be continued."""


class CirculantOperator:
    """Circulant matrix given by its first column, applied through the FFT."""

    def __init__(self, generator):
        self.generator = numerics._as_vector(generator)
        self.spectrum = np.fft.fft(self.generator)

    @property
    def m(self) -> int:
        return self.generator.size

    def matvec(self, h) -> np.ndarray:
        return np.fft.ifft(self.spectrum * np.fft.fft(h)).real

    def rmatvec(self, r) -> np.ndarray:
        return np.fft.ifft(np.conj(self.spectrum) * np.fft.fft(r)).real

    def columns(self, idx) -> np.ndarray:
        idx = list(idx)
        if not idx:
            return np.zeros((self.m, 0))
        return np.stack([np.roll(self.generator, j) for j in idx], axis=1)

    def todense(self) -> np.ndarray:
        return self.columns(range(self.m))


@dataclass
class HomotopyState:
    active: list[int]
    signs: np.ndarray
    solution: np.ndarray
    tau: float
    correlations: np.ndarray
    # (kind, index) of the event that produced this breakpoint
    event: tuple[str, int] | None = None


@dataclass(frozen=True)
class Breakpoint:
    step: int
    tau: float
    event: str
    index: int
    support_size: int


@dataclass
class HomotopyResult:
    solution: np.ndarray
    tau_final: float
    path_length: int
    status: str  # "reached-cardinality" | "reached-tau" | "path-exhausted"
    active: list[int] = field(default_factory=list)
    path: list[Breakpoint] = field(default_factory=list)

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.solution)


def initial_state(C: CirculantOperator, y) -> HomotopyState:
    """Empty active set at ``tau0 = ||C^T y||_inf``, where the solution is zero."""
    c = C.rmatvec(y)
    return HomotopyState(
        active=[],
        signs=np.zeros(0),
        solution=np.zeros(C.m),
        tau=float(np.max(np.abs(c))),
        correlations=c,
    )


def _gram_factor(Cg: np.ndarray):
    G = Cg.T @ Cg
    ev = np.linalg.eigvalsh(G)
    if ev[0] <= GRAM_RCOND * ev[-1]:
        raise DegeneratePathError(
            f"singular active-set Gram matrix (size {G.shape[0]}, "
            f"eigenvalue ratio {ev[0] / ev[-1]:.2e})"
        )
    return cho_factor(G)


def _direction(state: HomotopyState, C: CirculantOperator):
    """Rate of change of the active coefficients and of all correlations as tau decreases."""
    if not state.active:
        return np.zeros(0), np.zeros(C.m)
    Cg = C.columns(state.active)
    d = cho_solve(_gram_factor(Cg), state.signs)
    a = C.rmatvec(Cg @ d)
    return d, a


def _next_event(state: HomotopyState, C: CirculantOperator, d, a):
    """Smallest positive step ``delta`` (tau -> tau - delta) to the next event.

    Returns ``(delta, kind, index)`` or ``(inf, None, -1)`` if nothing happens.
    """
    tau = state.tau
    c = state.correlations
    m = C.m
    candidates = []

    inactive = np.ones(m, dtype=bool)
    inactive[state.active] = False
    if state.event is not None and state.event[0] == "remove":
        # the index just dropped sits exactly on the boundary
        inactive[state.event[1]] = False
    with np.errstate(divide="ignore", invalid="ignore"):
        up = np.where(1 - a > 1e-12, np.maximum(tau - c, 0.0) / (1 - a), np.inf)
        dn = np.where(1 + a > 1e-12, np.maximum(tau + c, 0.0) / (1 + a), np.inf)
    add_step = np.where(inactive, np.minimum(up, dn), np.inf)
    if np.isfinite(add_step).any():
        best = add_step.min()
        for i in np.flatnonzero(add_step <= best + TIE_RTOL * max(tau, 1.0)):
            candidates.append((float(add_step[i]), int(i), "add"))

    just_added = state.event[1] if state.event and state.event[0] == "add" else None
    for pos, i in enumerate(state.active):
        hi = state.solution[i]
        if hi == 0.0 or i == just_added or d[pos] == 0.0:
            continue
        step = -hi / d[pos]
        if step > 0:
            candidates.append((float(step), int(i), "remove"))

    if not candidates:
        return np.inf, None, -1
    best = min(s for s, _, _ in candidates)
    tied = [cand for cand in candidates if cand[0] <= best + TIE_RTOL * max(tau, 1.0)]
    step, index, kind = min(tied, key=lambda cand: cand[1])
    return step, kind, index


def _refresh(C: CirculantOperator, y, active, signs, tau, h, pinned=None):
    """Re-solve the active coefficients exactly at ``tau`` and recompute correlations."""
    h = h.copy()
    if active:
        Cg = C.columns(active)
        h[active] = cho_solve(_gram_factor(Cg), Cg.T @ y - tau * signs)
    if pinned is not None:
        h[pinned] = 0.0
    c = C.rmatvec(y - C.matvec(h))
    return h, c


def path_step(state: HomotopyState, C: CirculantOperator, y,
              tau_floor: float = 0.0) -> HomotopyState:
    """Advance the homotopy to the next breakpoint (or to ``tau_floor``).

    Raises DegeneratePathError if the active columns are linearly dependent.
    """
    y = np.asarray(y, dtype=float)
    d, a = _direction(state, C)
    delta, kind, index = _next_event(state, C, d, a)
    if delta >= state.tau - tau_floor:
        delta, kind, index = state.tau - tau_floor, "floor", -1
    tau = state.tau - delta
    h = state.solution.copy()
    if state.active:
        h[state.active] += delta * d

    active = list(state.active)
    signs = state.signs.copy()
    pinned = None
    if kind == "add":
        ci = state.correlations[index] - delta * a[index]
        active.append(index)
        signs = np.append(signs, np.sign(ci) if ci != 0 else 1.0)
        pinned = index
    elif kind == "remove":
        pos = active.index(index)
        active.pop(pos)
        signs = np.delete(signs, pos)
        h[index] = 0.0
    h, c = _refresh(C, y, active, signs, tau, h, pinned=pinned)
    return HomotopyState(active, signs, h, tau, c, event=(kind, index))


def _segment_end(state: HomotopyState, C: CirculantOperator, y, tau_floor: float):
    """Slide along the current linear segment without crossing the next event.

    If the segment ends in a removal the midpoint is used, so that every
    active coefficient is still nonzero.
    """
    d, a = _direction(state, C)
    delta, kind, _ = _next_event(state, C, d, a)
    if delta >= state.tau - tau_floor:
        delta, kind = state.tau - tau_floor, "floor"
    elif kind == "remove":
        delta *= 0.5
    tau = state.tau - delta
    h = state.solution.copy()
    h[state.active] += delta * d
    h, c = _refresh(C, y, state.active, state.signs, tau, h)
    return replace(state, solution=h, tau=tau, correlations=c, event=("segment", -1))


def _run_path(C: CirculantOperator, y, k_target, tau_floor, max_steps):
    y = numerics._as_vector(y)
    if y.size != C.m:
        raise ValueError(f"y has length {y.size}, operator has size {C.m}")
    state = initial_state(C, y)
    if tau_floor is None:
        tau_floor = 1e-12 * state.tau
    if max_steps is None:
        max_steps = 20 * C.m
    path = [Breakpoint(0, state.tau, "start", -1, 0)]

    def result(st, status):
        return HomotopyResult(st.solution, st.tau, len(path) - 1, status,
                              list(st.active), path)

    if state.tau <= tau_floor:
        return result(state, "reached-tau")
    while len(path) <= max_steps:
        state = path_step(state, C, y, tau_floor)
        kind, index = state.event
        path.append(Breakpoint(len(path), state.tau, kind, index, len(state.active)))
        if kind == "floor":
            return result(state, "reached-tau")
        if k_target is not None and kind == "add" and len(state.active) == k_target:
            state = _segment_end(state, C, y, tau_floor)
            path.append(Breakpoint(len(path), state.tau, "stop", -1, len(state.active)))
            return result(state, "reached-cardinality")
    return result(state, "path-exhausted")


def solve_to_cardinality(C: CirculantOperator, y, k_target: int,
                         tau_floor: float | None = None,
                         max_steps: int | None = None) -> HomotopyResult:
    """Follow the path until the solution first has ``k_target`` nonzeros.

    The returned point is the low-``tau`` end of the first path segment with
    ``k_target`` active indices, which has the least shrinkage among
    ``k_target``-sparse points on the path. ``tau_floor`` defaults to
    ``1e-12 * tau0``; hitting it first gives status ``reached-tau``.
    """
    if not 1 <= k_target <= C.m:
        raise ValueError(f"k_target must lie in [1, {C.m}], got {k_target}")
    if tau_floor is not None and tau_floor < 0:
        raise ValueError("tau_floor must be nonnegative")
    return _run_path(C, y, k_target, tau_floor, max_steps)


def solve_to_tau(C: CirculantOperator, y, tau: float,
                 max_steps: int | None = None) -> HomotopyResult:
    """LASSO solution at a given ``tau`` by following the path down to it."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    return _run_path(C, y, None, tau, max_steps)


def kkt_violation(C: CirculantOperator, y, h, tau: float) -> float:
    """Largest normalized violation of the LASSO optimality conditions.

    Active entries contribute ``|c_i - tau sign(h_i)| / max(1, tau)``,
    inactive ones ``max(|c_i| - tau, 0) / max(tau, tiny)``, with
    ``c = C^T (y - C h)``. A value ``<= 1e-8`` certifies the point.
    """
    h = np.asarray(h, dtype=float)
    c = C.rmatvec(np.asarray(y, dtype=float) - C.matvec(h))
    on = h != 0
    worst = 0.0
    if on.any():
        worst = np.max(np.abs(c[on] - tau * np.sign(h[on]))) / max(1.0, tau)
    if (~on).any():
        excess = np.max(np.abs(c[~on])) - tau
        worst = max(worst, excess / max(tau, np.finfo(float).tiny))
    return float(worst)


def write_path_csv(path: list[Breakpoint], fname) -> None:
    with open(fname, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["breakpoint", "tau", "event", "index", "support_size"])
        for b in path:
            w.writerow([b.step, repr(b.tau), b.event, b.index, b.support_size])
