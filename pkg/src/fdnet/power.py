"""Water-filling power allocation over parallel channels.

The plain allocator is exact (sorted inverse gains, closed-form level per
active set). ``fd_mimo_waterfill`` resolves the coupling between two
full-duplex nodes, where each node's own transmit power leaks into its own
receiver, by alternating per-node water-filling until a fixed point.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from fdnet import _accel
from fdnet._accel import njit
from fdnet.errors import DomainError


@dataclass(frozen=True)
class ParallelChannels:
    """Effective gains (gain / noise, 1/W) of parallel channels and a budget."""

    eff_gain: np.ndarray
    p_total: float

    def __post_init__(self):
        g = np.asarray(self.eff_gain, dtype=float)
        if g.ndim != 1 or g.size == 0:
            raise DomainError("eff_gain must be a nonempty vector")
        if np.any(~np.isfinite(g)) or np.any(g < 0):
            raise DomainError("effective gains must be finite and nonnegative")
        if not (np.isfinite(self.p_total) and self.p_total >= 0):
            raise DomainError("p_total must be finite and nonnegative")
        object.__setattr__(self, "eff_gain", g)


@dataclass(frozen=True)
class Allocation:
    """Per-channel powers and the common water level.

    ``degenerate`` is set when a positive budget could not be placed because
    every gain is zero.
    """

    p: np.ndarray
    water_level: float
    degenerate: bool = False

    @property
    def total(self) -> float:
        return float(self.p.sum())


@njit
def waterfill_kernel(gains, p_total, out):
    """Fill ``out`` with the water-filling powers; return the water level.

    Returns ``inf`` (and all-zero ``out``) when no gain is positive.
    """
    n = gains.shape[0]
    for i in range(n):
        out[i] = 0.0
    n_pos = 0
    for i in range(n):
        if gains[i] > 0.0:
            n_pos += 1
    if n_pos == 0:
        return np.inf
    idx = np.empty(n_pos, dtype=np.int64)
    inv = np.empty(n_pos)
    c = 0
    for i in range(n):
        if gains[i] > 0.0:
            idx[c] = i
            inv[c] = 1.0 / gains[i]
            c += 1
    order = np.argsort(inv, kind="mergesort")
    base = inv[order[0]]
    # Offsets from the best channel keep the level arithmetic on the scale
    # of p_total even when the inverse gains are huge.
    d = np.empty(n_pos)
    for r in range(n_pos):
        d[r] = inv[order[r]] - base
    n_active = 1
    level = p_total
    acc = 0.0
    for r in range(n_pos):
        acc += d[r]
        cand = (p_total + acc) / (r + 1)
        if d[r] < cand or r == 0:
            n_active = r + 1
            level = cand
        else:
            break
    s = 0.0
    for r in range(n_active):
        v = level - d[r]
        if v < 0.0:
            v = 0.0
        out[idx[order[r]]] = v
        s += v
    if s > 0.0:
        corr = (p_total - s) / n_active
        for r in range(n_active):
            j = idx[order[r]]
            if out[j] + corr > 0.0:
                out[j] += corr
    return base + level


def waterfill(ch: ParallelChannels, use_numba=None) -> Allocation:
    """Classical water-filling: p_i = max(0, mu - 1/g_i), sum p_i = P."""
    if use_numba is None:
        use_numba = _accel.USE_NUMBA
    kernel = waterfill_kernel if use_numba else waterfill_kernel.py_func
    p = np.zeros(ch.eff_gain.size)
    level = kernel(ch.eff_gain, float(ch.p_total), p)
    degenerate = not np.isfinite(level)
    if degenerate:
        # No usable channel: flag it only if there was power to place.
        return Allocation(p, float("inf"), degenerate=ch.p_total > 0)
    return Allocation(p, float(level))


class FdWaterfillResult(NamedTuple):
    alloc_a: Allocation
    alloc_b: Allocation
    converged: bool
    iterations: int


def self_coupling(rsi: np.ndarray) -> float:
    """Mean TX-set to RX-set RSI power gain of a node (off-diagonal mean)."""
    rsi = np.asarray(rsi, dtype=float)
    n = rsi.shape[0]
    if n < 2:
        return float(rsi.mean()) if rsi.size else 0.0
    mask = ~np.eye(n, dtype=bool)
    return float(rsi[mask].mean())


def fd_mimo_waterfill(scn, stream_gains_a, stream_gains_b, tol=1e-6, max_iters=100) -> FdWaterfillResult:
    """Water-fill both directions of an FD-MIMO link with self-interference.

    ``stream_gains_a`` are the power gains of A's transmit streams as seen at
    B (one per shared stream), ``stream_gains_b`` likewise for B to A.  On
    stream ``s`` the SINR at B is ``g_a[s] pa[s] / (N0 + rho_b pb[s])`` where
    ``rho_b`` is B's mean self-coupling; symmetrically at A.  Node A is
    updated first in every sweep (Gauss-Seidel).
    """
    ga = np.asarray(stream_gains_a, dtype=float)
    gb = np.asarray(stream_gains_b, dtype=float)
    if ga.shape != gb.shape or ga.ndim != 1:
        raise DomainError("stream gain vectors must be 1-D with equal length")
    if tol <= 0:
        raise DomainError("tol must be positive")
    rho_a = self_coupling(scn.rsi_a)
    rho_b = self_coupling(scn.rsi_b)
    n0 = scn.noise
    pa = waterfill(ParallelChannels(ga / n0, scn.p_a)).p
    pb = waterfill(ParallelChannels(gb / n0, scn.p_b)).p
    scale = max(scn.p_a, scn.p_b, 1e-300)
    alloc_a = alloc_b = None
    converged = False
    it = 0
    while it < max_iters:
        it += 1
        alloc_a = waterfill(ParallelChannels(ga / (n0 + rho_b * pb), scn.p_a))
        alloc_b = waterfill(ParallelChannels(gb / (n0 + rho_a * alloc_a.p), scn.p_b))
        change = max(np.max(np.abs(alloc_a.p - pa)), np.max(np.abs(alloc_b.p - pb))) / scale
        pa, pb = alloc_a.p, alloc_b.p
        if change < tol:
            converged = True
            break
    return FdWaterfillResult(alloc_a, alloc_b, converged, it)


def fd_stream_rates(scn, stream_gains_a, stream_gains_b, pa, pb):
    """Sum rate of both directions for per-stream powers ``pa`` and ``pb``."""
    rho_a = self_coupling(scn.rsi_a)
    rho_b = self_coupling(scn.rsi_b)
    g_at_b = np.asarray(stream_gains_a) * pa / (scn.noise + rho_b * pb)
    g_at_a = np.asarray(stream_gains_b) * pb / (scn.noise + rho_a * pa)
    return float(np.log2(1.0 + g_at_b).sum() + np.log2(1.0 + g_at_a).sum())
