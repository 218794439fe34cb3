"""Channels, residual self-interference and link metrics.

Everything random takes an explicit :class:`RngStream`, so a trial is fully
determined by its ``(seed, stream_id)`` pair.
"""

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import erfc

from fdnet._accel import njit
from fdnet.errors import DomainError


class RngStream:
    """Seeded random stream identified by ``(seed, stream_id)``.

    Two streams built from the same pair produce the same draw sequence.
    Distinct ``stream_id`` values under one seed are statistically
    independent (numpy ``SeedSequence`` spawn keys).
    """

    def __init__(self, seed: int, stream_id: int = 0):
        if not (0 <= seed < 2**64 and 0 <= stream_id < 2**64):
            raise DomainError("seed and stream_id must be 64-bit unsigned integers")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        self.generator = np.random.Generator(np.random.PCG64(ss))

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


@dataclass(frozen=True)
class ChannelGain:
    """Flat-fading complex channel coefficient."""

    re: float
    im: float

    def __post_init__(self):
        if not (math.isfinite(self.re) and math.isfinite(self.im)):
            raise DomainError("channel gain components must be finite")

    @property
    def power_gain(self) -> float:
        return self.re * self.re + self.im * self.im

    @classmethod
    def from_complex(cls, z) -> "ChannelGain":
        return cls(float(np.real(z)), float(np.imag(z)))

    def __complex__(self):
        return complex(self.re, self.im)


# --- residual self-interference models -------------------------------------


@dataclass(frozen=True)
class ConstantPower:
    """RSI as an AWGN term of fixed power (watts), independent of TX power."""

    power: float

    def __post_init__(self):
        if not self.power >= 0:
            raise DomainError("RSI power must be nonnegative")


@dataclass(frozen=True)
class RayleighFaded:
    """RSI channel with Rayleigh statistics; ``mean_power`` is E|h|^2."""

    mean_power: float

    def __post_init__(self):
        if not self.mean_power >= 0:
            raise DomainError("RSI mean power must be nonnegative")


@dataclass(frozen=True)
class RicianFaded:
    """RSI channel with Rician statistics and the given K-factor."""

    k_factor: float
    mean_power: float

    def __post_init__(self):
        if not (math.isfinite(self.k_factor) and self.k_factor >= 0):
            raise DomainError("k_factor must be finite and nonnegative")
        if not self.mean_power >= 0:
            raise DomainError("RSI mean power must be nonnegative")


RsiModel = Union[ConstantPower, RayleighFaded, RicianFaded]


def cancellation_to_gain(cancellation_db: float) -> float:
    """Mean RSI power gain left after ``cancellation_db`` of cancellation."""
    return 10.0 ** (-cancellation_db / 10.0)


def _fading_samples(gen, mean_power, k_factor, size):
    if mean_power < 0 or not math.isfinite(mean_power):
        raise DomainError(f"mean_power must be finite and >= 0, got {mean_power}")
    if k_factor < 0 or not math.isfinite(k_factor):
        raise DomainError(f"k_factor must be finite and >= 0, got {k_factor}")
    # Draw the scatter component even for zero power so the stream position
    # does not depend on parameter values.
    scatter = gen.standard_normal(size) + 1j * gen.standard_normal(size)
    los = math.sqrt(mean_power * k_factor / (k_factor + 1.0))
    sigma = math.sqrt(mean_power / (2.0 * (k_factor + 1.0)))
    return los + sigma * scatter


def draw_fading(rng: RngStream, mean_power: float, k_factor: float = 0.0) -> ChannelGain:
    """Draw one Rician (Rayleigh when ``k_factor == 0``) channel coefficient.

    The line-of-sight component has zero phase; E|h|^2 equals ``mean_power``.
    """
    z = _fading_samples(rng.generator, mean_power, k_factor, None)
    return ChannelGain.from_complex(z)


def draw_fading_array(rng: RngStream, mean_power: float, k_factor: float = 0.0, size=None) -> np.ndarray:
    """Vectorized :func:`draw_fading` returning a complex ndarray."""
    return np.asarray(_fading_samples(rng.generator, mean_power, k_factor, size))


def rsi_power(model: RsiModel, p_tx_self: float, rng: RngStream) -> float:
    """Residual self-interference power (watts) seen by a transmitting node."""
    if p_tx_self < 0:
        raise DomainError("transmit power must be nonnegative")
    if isinstance(model, ConstantPower):
        return float(model.power)
    if isinstance(model, RayleighFaded):
        h = draw_fading(rng, model.mean_power, 0.0)
    elif isinstance(model, RicianFaded):
        h = draw_fading(rng, model.mean_power, model.k_factor)
    else:
        raise DomainError(f"unknown RSI model {model!r}")
    return h.power_gain * p_tx_self


def rsi_gain_array(model: RsiModel, rng: RngStream, size) -> np.ndarray:
    """RSI power gains |h~|^2 for a faded model, or the constant for AWGN RSI.

    For :class:`ConstantPower` the value returned is the mean power gain
    ``power`` itself; callers that need a TX-power-independent term treat it
    accordingly.
    """
    if isinstance(model, ConstantPower):
        return np.full(size, float(model.power))
    k = model.k_factor if isinstance(model, RicianFaded) else 0.0
    return np.abs(_fading_samples(rng.generator, model.mean_power, k, size)) ** 2


# --- SINR and link metrics --------------------------------------------------


@dataclass(frozen=True)
class SinrInputs:
    p_tx_far: float
    p_tx_self: float
    h_desired: ChannelGain
    h_self: ChannelGain
    noise_power: float

    def __post_init__(self):
        if self.p_tx_far < 0 or self.p_tx_self < 0 or self.noise_power < 0:
            raise DomainError("powers and noise must be nonnegative")


def sinr_from_gains(g_desired, p_far, g_self, p_self, noise):
    """Received SINR from power gains; works elementwise on arrays."""
    denom = np.asarray(g_self) * p_self + noise
    if np.any(denom <= 0):
        raise DomainError("SINR denominator is zero (no noise and no interference)")
    out = np.asarray(g_desired) * p_far / denom
    return float(out) if np.ndim(out) == 0 else out


def sinr(inputs: SinrInputs) -> float:
    """|h21|^2 p2 / (|h~11|^2 p1 + N0)."""
    return sinr_from_gains(
        inputs.h_desired.power_gain,
        inputs.p_tx_far,
        inputs.h_self.power_gain,
        inputs.p_tx_self,
        inputs.noise_power,
    )


def rate(gamma):
    """Shannon rate log2(1 + gamma) in bits/s/Hz."""
    g = np.asarray(gamma, dtype=float)
    if np.any(g < 0) or np.any(np.isnan(g)):
        raise DomainError("SINR must be nonnegative")
    out = np.log2(1.0 + g)
    return float(out) if out.ndim == 0 else out


# --- modulation and SER -----------------------------------------------------


@dataclass(frozen=True)
class Modulation:
    """Constellation used by the SER metric.

    ``order`` is 2 for BPSK and a power of 4 for square QAM (4 is QPSK).
    """

    order: int

    def __post_init__(self):
        o = self.order
        if o == 2:
            return
        if o < 4 or (o & (o - 1)) or int(math.log2(o)) % 2:
            raise DomainError(f"modulation order must be 2 or a power of 4, got {o}")

    @property
    def name(self):
        return {2: "bpsk", 4: "qpsk"}.get(self.order, f"qam{self.order}")

    @classmethod
    def parse(cls, text: str) -> "Modulation":
        t = text.strip().lower()
        if t == "bpsk":
            return BPSK
        if t == "qpsk":
            return QPSK
        if t.startswith("qam"):
            try:
                return cls(int(t[3:]))
            except ValueError:
                pass
        raise DomainError(f"unknown modulation {text!r}")


BPSK = Modulation(2)
QPSK = Modulation(4)


def SquareQam(order: int) -> Modulation:
    return Modulation(order)


@njit
def ser_scalar(gamma: float, order: int) -> float:
    """Symbol error probability for BPSK (order 2) or square M-QAM.

    Plain-float implementation shared with the compiled kernels.
    """
    if order == 2:
        return 0.5 * math.erfc(math.sqrt(gamma))
    root = math.sqrt(order)
    q = 0.5 * math.erfc(math.sqrt(1.5 * gamma / (order - 1.0)))
    p_axis = 2.0 * (1.0 - 1.0 / root) * q
    return 1.0 - (1.0 - p_axis) * (1.0 - p_axis)


def ser(gamma, mod: Modulation = BPSK):
    """Symbol error rate at SINR ``gamma``.

    BPSK uses Q(sqrt(2 gamma)); square QAM uses the exact two-rail expression
    1 - (1 - 2(1 - 1/sqrt(M)) Q(sqrt(3 gamma / (M - 1))))^2.
    """
    g = np.asarray(gamma, dtype=float)
    if np.any(g < 0) or np.any(np.isnan(g)):
        raise DomainError("SINR must be nonnegative")
    if mod.order == 2:
        out = 0.5 * erfc(np.sqrt(g))
    else:
        root = math.sqrt(mod.order)
        q = 0.5 * erfc(np.sqrt(1.5 * g / (mod.order - 1.0)))
        p_axis = 2.0 * (1.0 - 1.0 / root) * q
        out = 1.0 - (1.0 - p_axis) ** 2
    return float(out) if out.ndim == 0 else out
