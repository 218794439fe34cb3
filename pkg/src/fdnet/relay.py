"""Full-duplex relay primitives: end-to-end SINR, relay/antenna selection,
relay transmit power and FD/HD mode switching."""

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional, Sequence, Tuple

from fdnet.channel import ChannelGain, rate
from fdnet.errors import DomainError

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class Protocol(str, Enum):
    DF = "df"
    AF = "af"

    @classmethod
    def parse(cls, value) -> "Protocol":
        if isinstance(value, Protocol):
            return value
        text = str(value).strip().lower()
        aliases = {"df": cls.DF, "decodeforward": cls.DF, "decode_forward": cls.DF,
                   "af": cls.AF, "amplifyforward": cls.AF, "amplify_forward": cls.AF}
        try:
            return aliases[text]
        except KeyError:
            raise DomainError(f"unknown relay protocol {value!r}") from None


DecodeForward = Protocol.DF
AmplifyForward = Protocol.AF


@dataclass(frozen=True)
class AntennaConfig:
    """One (TX antenna, RX antenna) choice at a relay with the gains it sees."""

    tx: int
    rx: int
    h_sr: ChannelGain
    h_rd: ChannelGain
    rsi: float

    def __post_init__(self):
        if self.rsi < 0:
            raise DomainError("relay RSI gain must be nonnegative")


@dataclass(frozen=True)
class RelayScenario:
    """Candidate relays, each with at least one antenna configuration."""

    configs: Sequence[Sequence[AntennaConfig]]
    p_s: float
    p_r_max: float
    noise: float
    h_sd: Optional[ChannelGain] = None

    def __post_init__(self):
        if len(self.configs) < 1:
            raise DomainError("need at least one relay")
        if any(len(c) < 1 for c in self.configs):
            raise DomainError("each relay needs at least one antenna configuration")
        if min(self.p_s, self.p_r_max) < 0 or self.noise <= 0:
            raise DomainError("powers must be nonnegative and noise positive")

    @property
    def n_relays(self) -> int:
        return len(self.configs)

    @classmethod
    def single_antenna(cls, h_sr, h_rd, rsi_relay, p_s, p_r_max, noise, h_sd=None):
        """Build a scenario with exactly one configuration per relay."""
        configs = [[AntennaConfig(1, 2, a, b, float(r))] for a, b, r in zip(h_sr, h_rd, rsi_relay)]
        return cls(configs, p_s, p_r_max, noise, h_sd)


def hop_sinrs(scn: RelayScenario, relay: int, config: int, p_r: float) -> Tuple[float, float]:
    """(source->relay SINR with relay RSI, relay->destination SNR)."""
    if not (0 <= relay < scn.n_relays and 0 <= config < len(scn.configs[relay])):
        raise DomainError(f"no relay {relay} / config {config}")
    c = scn.configs[relay][config]
    if not 0 <= p_r <= scn.p_r_max * (1 + 1e-12):
        raise DomainError(f"relay power {p_r} outside [0, {scn.p_r_max}]")
    g1 = c.h_sr.power_gain * scn.p_s / (c.rsi * p_r + scn.noise)
    g2 = c.h_rd.power_gain * p_r / scn.noise
    return g1, g2


def combine(g1: float, g2: float, protocol: Protocol) -> float:
    if protocol is Protocol.DF:
        return min(g1, g2)
    if g1 + g2 == 0.0:
        return 0.0
    return g1 * g2 / (g1 + g2 + 1.0)


def end_to_end_sinr(scn: RelayScenario, relay: int, config: int, p_r: float,
                    protocol: Protocol = Protocol.DF) -> float:
    """End-to-end SINR of the relayed path.

    With a direct link present the destination keeps the stronger of the
    relayed and direct signals (selection combining).
    """
    protocol = Protocol.parse(protocol)
    g = combine(*hop_sinrs(scn, relay, config, p_r), protocol)
    if scn.h_sd is not None:
        g = max(g, scn.h_sd.power_gain * scn.p_s / scn.noise)
    return g


def select_relay_antenna(scn: RelayScenario, p_r: float, protocol: Protocol = Protocol.DF) -> Tuple[int, int, float]:
    """Exhaustive (relay, config) argmax of the end-to-end SINR, 0-based."""
    best = (-1, -1, -math.inf)
    for r, cfgs in enumerate(scn.configs):
        for c in range(len(cfgs)):
            g = end_to_end_sinr(scn, r, c, p_r, protocol)
            if g > best[2]:
                best = (r, c, g)
    return best


def golden_section_max(f, lo: float, hi: float, tol: float):
    """Maximize a unimodal ``f`` on [lo, hi]; returns (x, f(x))."""
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def optimal_relay_power(scn: RelayScenario, relay: int, config: int,
                        protocol: Protocol = Protocol.DF, rel_tol: float = 1e-10) -> Tuple[float, float]:
    """Relay power in [0, p_r_max] maximizing the relayed end-to-end SINR.

    The relayed SINR falls on the first hop and rises on the second as the
    relay power grows, so it is unimodal and golden-section search applies.
    When the maximum is flat up to the budget (no relay RSI) the full budget
    is returned.
    """
    protocol = Protocol.parse(protocol)
    hop_sinrs(scn, relay, config, 0.0)
    c = scn.configs[relay][config]
    if c.h_rd.power_gain == 0.0 or scn.p_r_max == 0.0:
        return 0.0, 0.0

    def f(p):
        return combine(*hop_sinrs(scn, relay, config, p), protocol)

    p_max = scn.p_r_max
    x, fx = golden_section_max(f, 0.0, p_max, rel_tol * p_max)
    f_max = f(p_max)
    if f_max >= fx:
        x, fx = p_max, f_max
    return x, fx


class Mode(str, Enum):
    FD = "FD"
    HD = "HD"


class ModeDecision(NamedTuple):
    chosen: Mode
    fd_rate: float
    hd_rate: float


def mode_switch(gamma_fd_a: float, gamma_fd_b: float, gamma_hd_a: float, gamma_hd_b: float) -> ModeDecision:
    """Pick FD when its two-way rate is at least the half-duplex rate.

    HD splits the resource in two orthogonal halves, one per direction.
    """
    vals = (gamma_fd_a, gamma_fd_b, gamma_hd_a, gamma_hd_b)
    if any(not v >= 0 for v in vals):
        raise DomainError("SINRs must be nonnegative")
    fd = rate(gamma_fd_a) + rate(gamma_fd_b)
    hd = 0.5 * rate(gamma_hd_a) + 0.5 * rate(gamma_hd_b)
    return ModeDecision(Mode.FD if fd >= hd else Mode.HD, fd, hd)
