import math

import numpy as np
import pytest

from fdnet.channel import ChannelGain
from fdnet.errors import DomainError
from fdnet.relay import (
    AmplifyForward,
    AntennaConfig,
    DecodeForward,
    Mode,
    RelayScenario,
    end_to_end_sinr,
    mode_switch,
    optimal_relay_power,
    select_relay_antenna,
)


def g(power):
    return ChannelGain(math.sqrt(power), 0.0)


def one(sr=1.0, rd=1.0, rsi=0.0, p_s=1.0, p_max=10.0, noise=1.0, h_sd=None):
    return RelayScenario.single_antenna([g(sr)], [g(rd)], [rsi], p_s, p_max, noise, h_sd)


def random_relays(seed, n=4, c=2, p_max=10.0):
    rng = np.random.default_rng(seed)
    cfgs = [[AntennaConfig(q + 1, q + 2, g(rng.exponential()), g(rng.exponential()), 0.2 * rng.exponential())
             for q in range(c)] for _ in range(n)]
    return RelayScenario(cfgs, 10.0, p_max, 1.0)


def grid_oracle(scn, r, c, proto, points=10_000):
    ps = np.linspace(0.0, scn.p_r_max, points)
    vals = np.array([end_to_end_sinr(scn, r, c, p, proto) for p in ps])
    i = int(np.argmax(vals))
    return ps[i], vals[i]


class TestEndToEnd:
    def test_df_min_rule(self):
        # gamma1 = 5, gamma2 = 3
        assert end_to_end_sinr(one(sr=5.0, rd=1.0, p_max=3.0), 0, 0, 3.0, DecodeForward) == 3.0

    @pytest.mark.parametrize("proto", [DecodeForward, AmplifyForward])
    def test_silent_relay(self, proto):
        assert end_to_end_sinr(one(sr=5.0, rsi=0.3), 0, 0, 0.0, proto) == 0.0

    def test_af_cascade(self):
        assert end_to_end_sinr(one(sr=1.0, rd=1.0), 0, 0, 1.0, AmplifyForward) == pytest.approx(1 / 3)

    def test_direct_link_selection_combining(self):
        scn = one(sr=1.0, rd=1.0, h_sd=g(4.0))
        assert end_to_end_sinr(scn, 0, 0, 1.0, "df") == pytest.approx(4.0)

    def test_domain(self):
        with pytest.raises(DomainError):
            end_to_end_sinr(one(), 0, 0, 11.0)
        with pytest.raises(DomainError):
            end_to_end_sinr(one(), 1, 0, 1.0)
        with pytest.raises(DomainError):
            end_to_end_sinr(one(), 0, -1, 1.0)
        with pytest.raises(DomainError):
            end_to_end_sinr(one(), 0, 0, 1.0, "xf")

    @pytest.mark.parametrize("seed", range(20))
    def test_df_monotone_in_rsi_and_ps(self, seed):
        rng = np.random.default_rng(seed)
        sr, rd, p = rng.exponential(), rng.exponential(), rng.uniform(0.1, 10)
        vals = [end_to_end_sinr(one(sr, rd, rsi), 0, 0, p) for rsi in (0.0, 0.1, 1.0, 10.0)]
        assert all(a >= b for a, b in zip(vals, vals[1:]))
        vals = [end_to_end_sinr(one(sr, rd, 0.5, p_s=ps), 0, 0, p) for ps in (0.1, 1.0, 10.0)]
        assert all(a <= b for a, b in zip(vals, vals[1:]))


class TestSelection:
    def test_single(self):
        assert select_relay_antenna(one(), 5.0)[:2] == (0, 0)

    def test_dominant(self):
        scn = RelayScenario.single_antenna([g(1), g(10), g(1)], [g(1), g(10), g(1)], [0, 0, 0], 1.0, 1.0, 1.0)
        assert select_relay_antenna(scn, 1.0)[0] == 1

    @pytest.mark.parametrize("seed", range(100))
    def test_oracle(self, seed):
        scn = random_relays(seed)
        proto = AmplifyForward if seed % 2 else DecodeForward
        cands = [(end_to_end_sinr(scn, r, c, 5.0, proto), -r, -c) for r in range(4) for c in range(2)]
        best = max(cands)
        r, c, val = select_relay_antenna(scn, 5.0, proto)
        assert (r, c) == (-best[1], -best[2])
        assert val == best[0]


class TestOptimalPower:
    def test_no_rsi_full_power(self):
        p, _ = optimal_relay_power(one(sr=2.0, rd=0.1, rsi=0.0), 0, 0)
        assert p == 10.0
        p, _ = optimal_relay_power(one(sr=0.5, rd=1.0, rsi=0.0), 0, 0)
        assert p == 10.0

    def test_degenerate(self):
        assert optimal_relay_power(one(rd=0.0, rsi=1.0), 0, 0) == (0.0, 0.0)

    def test_hand_solved(self):
        p, val = optimal_relay_power(one(sr=10.0, rd=1.0, rsi=1.0, p_s=1.0), 0, 0, DecodeForward)
        root = (-1 + math.sqrt(41)) / 2
        assert root == pytest.approx(2.7016, abs=1e-4)
        assert p == pytest.approx(root, abs=1e-6)
        assert val == pytest.approx(root, rel=1e-6)
        grid_p, _ = grid_oracle(one(sr=10.0, rd=1.0, rsi=1.0), 0, 0, DecodeForward)
        assert abs(grid_p - p) <= 1e-3 * 10.0

    @pytest.mark.parametrize("seed", range(40))
    def test_against_grid(self, seed):
        scn = random_relays(seed, n=1, c=1)
        proto = AmplifyForward if seed % 2 else DecodeForward
        p, val = optimal_relay_power(scn, 0, 0, proto)
        gp, gv = grid_oracle(scn, 0, 0, proto)
        assert abs(p - gp) <= 1e-3 * scn.p_r_max
        assert val >= gv * (1 - 1e-6)


class TestModeSwitch:
    def test_fd_doubles(self):
        d = mode_switch(3, 3, 3, 3)
        assert d.chosen is Mode.FD
        assert (d.fd_rate, d.hd_rate) == (4.0, 2.0)

    def test_huge_rsi(self):
        assert mode_switch(0.0, 0.0, 10.0, 10.0).chosen is Mode.HD

    def test_tie_goes_fd(self):
        d = mode_switch(1, 1, 3, 3)
        assert (d.fd_rate, d.hd_rate) == (2.0, 2.0)
        assert d.chosen is Mode.FD
        assert mode_switch(0.99, 0.99, 3, 3).chosen is Mode.HD

    def test_negative(self):
        with pytest.raises(DomainError):
            mode_switch(-1, 1, 1, 1)

    def test_single_flip(self):
        gamma, flips, prev = 10.0, 0, None
        for rsi in np.logspace(-6, 4, 400):
            fd = gamma / (rsi * 10 + 1)
            chosen = mode_switch(fd, fd, gamma, gamma).chosen
            flips += prev is not None and chosen is not prev
            prev = chosen
        assert flips == 1 and prev is Mode.HD
