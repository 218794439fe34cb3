"""Bidirectional antenna-link selection for a two-node FD-MIMO pair.

Each node has one TX and one RX chain that can be switched onto any of its
antennas (TX and RX antennas must differ). A configuration picks
``(a_tx, a_rx, b_tx, b_rx)``; the A->B link is ``a_tx -> b_rx`` and suffers
B's self-interference from ``b_tx`` into ``b_rx``, and vice versa.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import List, NamedTuple, Tuple

import numpy as np

from fdnet import _accel
from fdnet._accel import njit
from fdnet.channel import BPSK, Modulation, rate, ser, ser_scalar, sinr_from_gains
from fdnet.errors import DomainError

MAX_SR = 0
MIN_SER = 1


@dataclass(frozen=True)
class MimoScenario:
    """One channel realization of the two-node FD-MIMO link.

    ``h_ab[t, r]`` is the complex gain from A's antenna ``t`` to B's antenna
    ``r`` (0-based storage); ``rsi_a[t, r]`` is the self-interference power
    gain from A's TX antenna ``t`` into A's RX antenna ``r``.
    """

    h_ab: np.ndarray
    h_ba: np.ndarray
    rsi_a: np.ndarray
    rsi_b: np.ndarray
    p_a: float
    p_b: float
    noise: float

    def __post_init__(self):
        na, nb = self.n_a, self.n_b
        if np.shape(self.h_ab) != (na, nb) or np.shape(self.h_ba) != (nb, na):
            raise DomainError("h_ab must be N_A x N_B and h_ba N_B x N_A")
        if np.shape(self.rsi_a) != (na, na) or np.shape(self.rsi_b) != (nb, nb):
            raise DomainError("rsi matrices must be square per node")
        if min(self.p_a, self.p_b, self.noise) < 0:
            raise DomainError("powers and noise must be nonnegative")
        if np.any(np.asarray(self.rsi_a) < 0) or np.any(np.asarray(self.rsi_b) < 0):
            raise DomainError("RSI power gains must be nonnegative")

    @property
    def n_a(self) -> int:
        return int(np.shape(self.h_ab)[0])

    @property
    def n_b(self) -> int:
        return int(np.shape(self.h_ab)[1])


class LinkSelection(NamedTuple):
    """Selected antennas, 1-based: A transmits on a_tx and receives on a_rx."""

    a_tx: int
    a_rx: int
    b_tx: int
    b_rx: int


def _check_sizes(n_a, n_b):
    if n_a < 2 or n_b < 2:
        raise DomainError(f"each node needs at least 2 antennas, got N_A={n_a}, N_B={n_b}")


@lru_cache(maxsize=32)
def _config_table(n_a: int, n_b: int) -> np.ndarray:
    """All configurations as a (count, 4) 0-based int array, lexicographic."""
    rows = [
        (at, ar, bt, br)
        for at in range(n_a)
        for ar in range(n_a)
        if ar != at
        for bt in range(n_b)
        for br in range(n_b)
        if br != bt
    ]
    table = np.array(rows, dtype=np.int64).reshape(-1, 4)
    table.setflags(write=False)
    return table


def enumerate_configs(scn: MimoScenario) -> List[LinkSelection]:
    """Every valid selection in lexicographic (a_tx, a_rx, b_tx, b_rx) order."""
    _check_sizes(scn.n_a, scn.n_b)
    return [LinkSelection(*(int(v) + 1 for v in row)) for row in _config_table(scn.n_a, scn.n_b)]


def bidirectional_sinrs(scn: MimoScenario, sel: LinkSelection) -> Tuple[float, float]:
    """SINR at B (A->B link) and at A (B->A link) for one selection."""
    at, ar, bt, br = (v - 1 for v in sel)
    for v, n in ((at, scn.n_a), (ar, scn.n_a), (bt, scn.n_b), (br, scn.n_b)):
        if not 0 <= v < n:
            raise DomainError(f"antenna index out of range in {sel}")
    if at == ar or bt == br:
        raise DomainError(f"TX and RX antenna must differ at each node: {sel}")
    g_ab = abs(complex(scn.h_ab[at, br])) ** 2
    g_ba = abs(complex(scn.h_ba[bt, ar])) ** 2
    at_b = sinr_from_gains(g_ab, scn.p_a, scn.rsi_b[bt, br], scn.p_b, scn.noise)
    at_a = sinr_from_gains(g_ba, scn.p_b, scn.rsi_a[at, ar], scn.p_a, scn.noise)
    return at_b, at_a


# --- search kernels -----------------------------------------------------------


@njit
def _search_loop(g_ab, g_ba, rsi_a, rsi_b, p_a, p_b, noise, criterion, order):
    n_a = g_ab.shape[0]
    n_b = g_ab.shape[1]
    best = -np.inf
    best_idx = -1
    idx = -1
    for at in range(n_a):
        for ar in range(n_a):
            if ar == at:
                continue
            for bt in range(n_b):
                for br in range(n_b):
                    if br == bt:
                        continue
                    idx += 1
                    gb = g_ab[at, br] * p_a / (rsi_b[bt, br] * p_b + noise)
                    ga = g_ba[bt, ar] * p_b / (rsi_a[at, ar] * p_a + noise)
                    if criterion == 0:
                        score = np.log2(1.0 + gb) + np.log2(1.0 + ga)
                    else:
                        score = -(ser_scalar(gb, order) + ser_scalar(ga, order))
                    if score > best:
                        best = score
                        best_idx = idx
    return best_idx, best


def _search_numpy(g_ab, g_ba, rsi_a, rsi_b, p_a, p_b, noise, criterion, order):
    t = _config_table(g_ab.shape[0], g_ab.shape[1])
    at, ar, bt, br = t[:, 0], t[:, 1], t[:, 2], t[:, 3]
    gb = g_ab[at, br] * p_a / (rsi_b[bt, br] * p_b + noise)
    ga = g_ba[bt, ar] * p_b / (rsi_a[at, ar] * p_a + noise)
    if criterion == MAX_SR:
        score = np.log2(1.0 + gb) + np.log2(1.0 + ga)
    else:
        mod = Modulation(int(order))
        score = -(ser(gb, mod) + ser(ga, mod))
    i = int(np.argmax(score))
    return i, float(score[i])


def _search(scn: MimoScenario, criterion: int, order: int, use_numba=None):
    _check_sizes(scn.n_a, scn.n_b)
    if scn.noise <= 0:
        raise DomainError("noise power must be positive for link selection")
    g_ab = np.abs(np.asarray(scn.h_ab)) ** 2
    g_ba = np.abs(np.asarray(scn.h_ba)) ** 2
    rsi_a = np.asarray(scn.rsi_a, dtype=float)
    rsi_b = np.asarray(scn.rsi_b, dtype=float)
    args = (g_ab, g_ba, rsi_a, rsi_b, float(scn.p_a), float(scn.p_b), float(scn.noise), criterion, order)
    if use_numba is None:
        use_numba = _accel.USE_NUMBA
    i, score = _search_loop(*args) if use_numba else _search_numpy(*args)
    row = _config_table(scn.n_a, scn.n_b)[i]
    return LinkSelection(*(int(v) + 1 for v in row)), float(score)


def select_max_sr(scn: MimoScenario, use_numba=None) -> Tuple[LinkSelection, float]:
    """Exhaustive Max-SR selection; ties go to the lexicographically first."""
    sel, score = _search(scn, MAX_SR, 2, use_numba)
    return sel, score


def select_min_ser(scn: MimoScenario, mod: Modulation = BPSK, use_numba=None) -> Tuple[LinkSelection, float]:
    """Exhaustive Min-SER selection; ties go to the lexicographically first."""
    sel, score = _search(scn, MIN_SER, mod.order, use_numba)
    return sel, -score


def sum_rate(scn: MimoScenario, sel: LinkSelection) -> float:
    return float(sum(rate(g) for g in bidirectional_sinrs(scn, sel)))


def sum_ser(scn: MimoScenario, sel: LinkSelection, mod: Modulation = BPSK) -> float:
    return float(sum(ser(g, mod) for g in bidirectional_sinrs(scn, sel)))
