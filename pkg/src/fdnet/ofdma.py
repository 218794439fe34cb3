"""User and subcarrier pairing for a full-duplex OFDMA cell.

A transceiver unit is a (subcarrier ``k``, TX user ``i``, RX user ``j``)
triple: user ``i`` transmits uplink to the BS on subcarrier ``k`` while the
BS transmits downlink to user ``j`` on the same subcarrier. The uplink sees
the BS residual self-interference, the downlink sees co-channel interference
from user ``i``. All indices are 0-based.

Three pairing strategies are provided: the price-raising auction
(:func:`price_matching`), exhaustive search (:func:`centralized_exhaustive`)
and a uniform random baseline (:func:`random_matching`).
"""

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Dict, NamedTuple, Optional, Tuple

import numpy as np

from fdnet import _accel
from fdnet._accel import njit
from fdnet.channel import RngStream
from fdnet.errors import AlgorithmError, CapacityError, DomainError
from fdnet.power import ParallelChannels, waterfill, waterfill_kernel

MAX_CENTRAL_M = 6
MAX_CENTRAL_K = 8


class SplitRule(str, Enum):
    UNIFORM = "uniform"
    WATERFILLING = "waterfilling"

    @classmethod
    def parse(cls, value) -> "SplitRule":
        try:
            return cls(str(value.value if isinstance(value, Enum) else value).strip().lower())
        except ValueError:
            raise DomainError(f"unknown split rule {value!r}") from None


Uniform = SplitRule.UNIFORM
WaterFilling = SplitRule.WATERFILLING


@dataclass(frozen=True)
class OfdmaScenario:
    """Power gains, powers and noise of one FD-OFDMA cell realization.

    g_up[i, k]: TX user i to BS; g_down[j, k]: BS to RX user j;
    g_cross[i, j, k]: TX user i to RX user j; rsi_bs[k]: BS self-interference
    power (watts) on subcarrier k.
    """

    g_up: np.ndarray
    g_down: np.ndarray
    g_cross: np.ndarray
    rsi_bs: np.ndarray
    p_user: float
    p_bs_total: float
    noise: float

    def __post_init__(self):
        m, k = np.shape(self.g_up)
        if np.shape(self.g_down) != (m, k) or np.shape(self.g_cross) != (m, m, k) or np.shape(self.rsi_bs) != (k,):
            raise DomainError("inconsistent OFDMA gain dimensions")
        if k < m:
            raise DomainError(f"need at least as many subcarriers as pairs (K={k} < M={m})")
        for name in ("g_up", "g_down", "g_cross", "rsi_bs"):
            if np.any(np.asarray(getattr(self, name)) < 0):
                raise DomainError(f"{name} must be nonnegative")
        if min(self.p_user, self.p_bs_total) < 0 or self.noise <= 0:
            raise DomainError("powers must be nonnegative and noise positive")

    @property
    def m(self) -> int:
        return int(np.shape(self.g_up)[0])

    @property
    def k(self) -> int:
        return int(np.shape(self.g_up)[1])

    def uplink_rates(self) -> np.ndarray:
        """(M, K) uplink rate of TX user i on subcarrier k."""
        return np.log2(1.0 + self.p_user * self.g_up / (self.rsi_bs[None, :] + self.noise))

    def downlink_eff_gains(self) -> np.ndarray:
        """(M, M, K) downlink gain over interference-plus-noise for unit (i, j, k)."""
        return self.g_down[None, :, :] / (self.p_user * self.g_cross + self.noise)

    def unit_rates(self, p_down: float) -> np.ndarray:
        """(M, M, K) unit rates with a common downlink power ``p_down``."""
        return self.uplink_rates()[:, None, :] + np.log2(1.0 + p_down * self.downlink_eff_gains())


Triple = Tuple[int, int, int]


@dataclass(frozen=True)
class PairingAssignment:
    """Support of the binary pairing tensor as sorted (k, i, j) triples."""

    entries: Tuple[Triple, ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(sorted(tuple(int(v) for v in t) for t in self.entries)))

    @classmethod
    def from_arrays(cls, tx_rx, tx_sc) -> "PairingAssignment":
        return cls(tuple((int(k), i, int(j)) for i, (j, k) in enumerate(zip(tx_rx, tx_sc)) if j >= 0))

    def __len__(self):
        return len(self.entries)

    def violations(self, m: int, k: int):
        """Human-readable list of broken pairing constraints (empty if feasible)."""
        out = []
        ks = [t[0] for t in self.entries]
        txs = [t[1] for t in self.entries]
        rxs = [t[2] for t in self.entries]
        for name, vals, n in (("subcarrier", ks, k), ("TX", txs, m), ("RX", rxs, m)):
            if len(set(vals)) != len(vals):
                out.append(f"{name} used more than once")
            if any(not 0 <= v < n for v in vals):
                out.append(f"{name} index out of range")
        return out

    def is_feasible(self, m: int, k: int) -> bool:
        return not self.violations(m, k)

    def is_perfect(self, m: int, k: int) -> bool:
        return self.is_feasible(m, k) and len(self.entries) == m


@dataclass(frozen=True)
class PriceState:
    rx_price: np.ndarray
    subcarrier_price: np.ndarray
    step: float

    def unit_price(self, j: int, k: int) -> float:
        return float(self.rx_price[j] + self.subcarrier_price[k])


PowerSplit = Dict[Triple, float]


class MatchingResult(NamedTuple):
    assignment: PairingAssignment
    prices: PriceState
    iterations: int
    split: PowerSplit
    cycled: bool = False


class CentralizedResult(NamedTuple):
    assignment: PairingAssignment
    candidates_evaluated: int
    split: PowerSplit
    objective: float


# --- rates and power ---------------------------------------------------------


def unit_rate(scn: OfdmaScenario, i: int, j: int, k: int, p_down: float) -> float:
    """Uplink plus downlink Shannon rate of transceiver unit (k, i, j)."""
    if not (0 <= i < scn.m and 0 <= j < scn.m and 0 <= k < scn.k):
        raise DomainError(f"unit index out of range: i={i}, j={j}, k={k}")
    if p_down < 0:
        raise DomainError("downlink power must be nonnegative")
    g_up = scn.p_user * scn.g_up[i, k] / (scn.rsi_bs[k] + scn.noise)
    g_dn = p_down * scn.g_down[j, k] / (scn.p_user * scn.g_cross[i, j, k] + scn.noise)
    return math.log2(1.0 + g_up) + math.log2(1.0 + g_dn)


def split_bs_power(scn: OfdmaScenario, asg: PairingAssignment, rule=SplitRule.UNIFORM) -> PowerSplit:
    """Split the BS budget over the matched units."""
    rule = SplitRule.parse(rule)
    if len(asg) == 0:
        raise DomainError("cannot split power over an empty assignment")
    if not asg.is_feasible(scn.m, scn.k):
        raise DomainError("assignment is infeasible: " + "; ".join(asg.violations(scn.m, scn.k)))
    if rule is SplitRule.UNIFORM:
        share = scn.p_bs_total / len(asg)
        return {t: share for t in asg.entries}
    eff = scn.downlink_eff_gains()
    gains = np.array([eff[i, j, k] for k, i, j in asg.entries])
    alloc = waterfill(ParallelChannels(gains, scn.p_bs_total))
    return {t: float(p) for t, p in zip(asg.entries, alloc.p)}


def sum_rate(scn: OfdmaScenario, asg: PairingAssignment, split: PowerSplit) -> float:
    """Sum of unit rates over the matched triples."""
    if set(split) != set(asg.entries):
        raise DomainError("power split does not cover exactly the matched triples")
    return float(sum(unit_rate(scn, i, j, k, split[(k, i, j)]) for k, i, j in asg.entries))


# --- price-raising auction ------------------------------------------------------


@njit
def _same_state(tx_rx, tx_sc, c_rx, c_sc, s_rx, s_sc, s_crx, s_csc):
    # Proposals depend on prices only up to a common shift per resource
    # type, so prices are compared relative to their minimum.
    b_rx = c_rx.min()
    b_sc = c_sc.min()
    for i in range(tx_rx.shape[0]):
        if tx_rx[i] != s_rx[i] or tx_sc[i] != s_sc[i] or c_rx[i] - b_rx != s_crx[i]:
            return False
    for k in range(c_sc.shape[0]):
        if c_sc[k] - b_sc != s_csc[k]:
            return False
    return True


@njit
def auction_kernel(util, eps, max_rounds):
    """Gauss-Seidel price auction over SR units (RX j, subcarrier k).

    Each round, every TX unmatched at the start of the round proposes, in
    index order, to the unit maximizing ``util[i, j, k] - p_rx[j] - p_sc[k]``
    (ties: smallest j, then k). A resource already held by another TX has
    received a competing offer: its price rises by ``eps`` and the holder is
    released.

    Some instances admit no prices at which the TXs want disjoint units, and
    the rounds then repeat forever with every price rising in step. Prices
    are kept as integer multiples of ``eps`` so such a cycle is detected
    exactly (Brent's method on the price-shifted state). On a cycle the
    unmatched TXs take, in index order, their best unit among those with
    both resources free.

    Returns (tx_rx, tx_sc, p_rx, p_sc, rounds, ok, cycled).
    """
    m = util.shape[0]
    k_n = util.shape[2]
    tx_rx = np.full(m, -1, dtype=np.int64)
    tx_sc = np.full(m, -1, dtype=np.int64)
    rx_holder = np.full(m, -1, dtype=np.int64)
    sc_holder = np.full(k_n, -1, dtype=np.int64)
    c_rx = np.zeros(m, dtype=np.int64)
    c_sc = np.zeros(k_n, dtype=np.int64)
    s_rx = tx_rx.copy()
    s_sc = tx_sc.copy()
    s_crx = c_rx.copy()
    s_csc = c_sc.copy()
    power = 1
    lam = 0
    pending = np.empty(m, dtype=np.int64)
    rounds = 0
    cycled = False
    while True:
        n_pending = 0
        for i in range(m):
            if tx_rx[i] < 0:
                pending[n_pending] = i
                n_pending += 1
        if n_pending == 0:
            return tx_rx, tx_sc, c_rx * eps, c_sc * eps, rounds, True, cycled
        if rounds > 0 and _same_state(tx_rx, tx_sc, c_rx, c_sc, s_rx, s_sc, s_crx, s_csc):
            cycled = True
            for q in range(n_pending):
                i = pending[q]
                best = -np.inf
                bj = -1
                bk = -1
                for j in range(m):
                    if rx_holder[j] >= 0:
                        continue
                    for k in range(k_n):
                        if sc_holder[k] >= 0:
                            continue
                        v = util[i, j, k] - (c_rx[j] + c_sc[k]) * eps
                        if v > best:
                            best = v
                            bj = j
                            bk = k
                tx_rx[i] = bj
                tx_sc[i] = bk
                rx_holder[bj] = i
                sc_holder[bk] = i
            continue
        lam += 1
        if lam == power:
            s_rx[:] = tx_rx
            s_sc[:] = tx_sc
            s_crx[:] = c_rx - c_rx.min()
            s_csc[:] = c_sc - c_sc.min()
            power *= 2
            lam = 0
        if rounds >= max_rounds:
            return tx_rx, tx_sc, c_rx * eps, c_sc * eps, rounds, False, cycled
        rounds += 1
        for q in range(n_pending):
            i = pending[q]
            if tx_rx[i] >= 0:
                continue
            best = -np.inf
            bj = 0
            bk = 0
            for j in range(m):
                for k in range(k_n):
                    v = util[i, j, k] - (c_rx[j] + c_sc[k]) * eps
                    if v > best:
                        best = v
                        bj = j
                        bk = k
            h_rx = rx_holder[bj]
            h_sc = sc_holder[bk]
            if h_rx >= 0:
                c_rx[bj] += 1
            if h_sc >= 0:
                c_sc[bk] += 1
            for h in (h_rx, h_sc):
                if h >= 0 and tx_rx[h] >= 0:
                    rx_holder[tx_rx[h]] = -1
                    sc_holder[tx_sc[h]] = -1
                    tx_rx[h] = -1
                    tx_sc[h] = -1
            tx_rx[i] = bj
            tx_sc[i] = bk
            rx_holder[bj] = i
            sc_holder[bk] = i


def default_epsilon(scn: OfdmaScenario) -> float:
    """Price step of 1e-3 times the largest unit rate under the uniform split."""
    top = float(scn.unit_rates(scn.p_bs_total / scn.m).max())
    return 1e-3 * top if top > 0 else 1e-3


def iteration_cap(m: int, k: int, max_util: float, eps: float) -> int:
    return int(m * k * (max(max_util, 0.0) / eps)) + m + 1


def price_matching(scn: OfdmaScenario, split_rule=SplitRule.UNIFORM, eps: Optional[float] = None,
                   max_rounds: Optional[int] = None, use_numba=None) -> MatchingResult:
    """Match every TX user to an (RX user, subcarrier) unit by price raising.

    Preferences use unit rates under the uniform BS split; ``split_rule`` only
    decides how BS power is spread over the final matching. ``iterations``
    counts proposal rounds; ``cycled`` flags a run whose prices entered a
    cycle and whose last TXs were placed on free units (see
    :func:`auction_kernel`).
    """
    rule = SplitRule.parse(split_rule)
    if eps is None:
        eps = default_epsilon(scn)
    if not eps > 0:
        raise DomainError("price step must be positive")
    util = scn.unit_rates(scn.p_bs_total / scn.m)
    if max_rounds is None:
        max_rounds = iteration_cap(scn.m, scn.k, float(util.max()), eps)
    if use_numba is None:
        use_numba = _accel.USE_NUMBA
    kernel = auction_kernel if use_numba else auction_kernel.py_func
    tx_rx, tx_sc, p_rx, p_sc, rounds, ok, cycled = kernel(util, float(eps), int(max_rounds))
    if not ok:
        raise AlgorithmError(f"price matching did not reach equilibrium within {max_rounds} rounds")
    asg = PairingAssignment.from_arrays(tx_rx, tx_sc)
    return MatchingResult(asg, PriceState(p_rx, p_sc, float(eps)), int(rounds),
                          split_bs_power(scn, asg, rule), bool(cycled))


# --- centralized search ---------------------------------------------------------


@lru_cache(maxsize=64)
def _perm_tables(m: int, k: int):
    perms = np.array(list(itertools.permutations(range(m))), dtype=np.int64).reshape(-1, m)
    injections = np.array(list(itertools.permutations(range(k), m)), dtype=np.int64).reshape(-1, m)
    perms.setflags(write=False)
    injections.setflags(write=False)
    return perms, injections


def candidate_count(m: int, k: int) -> int:
    """Number of complete assignments, M! * K! / (K - M)!."""
    return math.factorial(m) * math.perm(k, m)


@njit
def _key_less(rx_a, sc_a, rx_b, sc_b):
    # Compare assignments by their (k, i, j) triples sorted on k.
    m = rx_a.shape[0]
    oa = np.argsort(sc_a)
    ob = np.argsort(sc_b)
    for r in range(m):
        ia, ib = oa[r], ob[r]
        ta = (sc_a[ia], ia, rx_a[ia])
        tb = (sc_b[ib], ib, rx_b[ib])
        if ta != tb:
            return ta < tb
    return False


@njit
def _central_loop(up, eff, p_total, waterfilling, perms, injections):
    m = up.shape[0]
    best = -np.inf
    best_p = 0
    best_s = 0
    g = np.empty(m)
    pw = np.empty(m)
    share = p_total / m
    for a in range(perms.shape[0]):
        for b in range(injections.shape[0]):
            val = 0.0
            for i in range(m):
                val += up[i, injections[b, i]]
                g[i] = eff[i, perms[a, i], injections[b, i]]
            if waterfilling:
                waterfill_kernel(g, p_total, pw)
                for i in range(m):
                    val += np.log2(1.0 + pw[i] * g[i])
            else:
                for i in range(m):
                    val += np.log2(1.0 + share * g[i])
            if val > best or (val == best and _key_less(perms[a], injections[b], perms[best_p], injections[best_s])):
                best = val
                best_p = a
                best_s = b
    return best_p, best_s, best


def _waterfill_rows(g, p_total):
    """Row-wise water-filling of a (rows, n) gain matrix; returns powers."""
    rows, n = g.shape
    with np.errstate(divide="ignore"):
        inv = np.where(g > 0, 1.0 / np.where(g > 0, g, 1.0), np.inf)
    order = np.argsort(inv, axis=1, kind="mergesort")
    inv_sorted = np.take_along_axis(inv, order, axis=1)
    base = inv_sorted[:, :1]
    ok_rows = np.isfinite(base[:, 0])
    base = np.where(np.isfinite(base), base, 0.0)
    d = inv_sorted - base
    with np.errstate(invalid="ignore"):
        cand = (p_total + np.cumsum(d, axis=1)) / np.arange(1, n + 1)
        valid = d < cand
    valid[:, 0] = True
    # Active sets are prefixes; the first invalid position ends the prefix.
    n_active = np.where(valid.all(axis=1), n, np.argmin(valid, axis=1))
    level = cand[np.arange(rows), n_active - 1]
    p_sorted = np.where(np.arange(n) < n_active[:, None], level[:, None] - d, 0.0)
    p_sorted = np.maximum(p_sorted, 0.0)
    p = np.empty_like(p_sorted)
    np.put_along_axis(p, order, p_sorted, axis=1)
    p[~ok_rows] = 0.0
    return p


def _sorted_key(perm, inj):
    return tuple(sorted((int(inj[i]), i, int(perm[i])) for i in range(len(perm))))


def _central_numpy(up, eff, p_total, waterfilling, perms, injections):
    m = up.shape[0]
    rows = np.arange(m)
    up_part = up[rows[None, :], injections].sum(axis=1)
    best = -np.inf
    best_pair = (0, 0)
    for a in range(perms.shape[0]):
        g = eff[rows[None, :], perms[a][None, :], injections]
        if waterfilling:
            pw = _waterfill_rows(g, p_total)
        else:
            pw = p_total / m
        vals = up_part + np.log2(1.0 + pw * g).sum(axis=1)
        top = vals.max()
        if top < best:
            continue
        for b in np.flatnonzero(vals == top):
            if top > best or _sorted_key(perms[a], injections[b]) < _sorted_key(perms[best_pair[0]], injections[best_pair[1]]):
                best = float(top)
                best_pair = (a, int(b))
    return best_pair[0], best_pair[1], best


def centralized_exhaustive(scn: OfdmaScenario, split_rule=SplitRule.UNIFORM, use_numba=None) -> CentralizedResult:
    """Best complete assignment by enumeration of all M!K!/(K-M)! candidates."""
    rule = SplitRule.parse(split_rule)
    if scn.m > MAX_CENTRAL_M or scn.k > MAX_CENTRAL_K:
        raise CapacityError(f"centralized search limited to M <= {MAX_CENTRAL_M}, K <= {MAX_CENTRAL_K}; "
                            f"got M={scn.m}, K={scn.k}")
    perms, injections = _perm_tables(scn.m, scn.k)
    up = scn.uplink_rates()
    eff = scn.downlink_eff_gains()
    wf = rule is SplitRule.WATERFILLING
    if use_numba is None:
        use_numba = _accel.USE_NUMBA
    search = _central_loop if use_numba else _central_numpy
    a, b, best = search(up, eff, float(scn.p_bs_total), wf, perms, injections)
    asg = PairingAssignment.from_arrays(perms[a], injections[b])
    return CentralizedResult(asg, candidate_count(scn.m, scn.k), split_bs_power(scn, asg, rule), float(best))


# --- random baseline ----------------------------------------------------------------


def random_matching(scn: OfdmaScenario, rng: RngStream) -> PairingAssignment:
    """Uniformly random perfect matching of TXs to (RX, subcarrier) units."""
    gen = rng.generator
    rx = gen.permutation(scn.m)
    sc = gen.choice(scn.k, size=scn.m, replace=False)
    return PairingAssignment.from_arrays(rx, sc)
