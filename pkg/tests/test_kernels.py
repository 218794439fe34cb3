"""The compiled kernels and their pure-python originals agree."""

import os
import subprocess
import sys

import numpy as np
import pytest

from conftest import random_mimo, random_ofdma
from fdnet import _accel, mimo, ofdma
from fdnet.channel import BPSK, QPSK, SquareQam, ser, ser_scalar
from fdnet.power import ParallelChannels, waterfill, waterfill_kernel

pytestmark = pytest.mark.skipif(not _accel.HAVE_NUMBA, reason="numba not installed")


@pytest.mark.parametrize("seed", range(50))
def test_waterfill_kernel(seed):
    rng = np.random.default_rng(seed)
    g = rng.exponential(size=rng.integers(1, 12))
    g[rng.random(g.size) < 0.2] = 0.0
    a, b = np.zeros(g.size), np.zeros(g.size)
    la = waterfill_kernel(g, 7.5, a)
    lb = waterfill_kernel.py_func(g, 7.5, b)
    assert la == lb
    np.testing.assert_array_equal(a, b)
    ch = ParallelChannels(g, 7.5)
    np.testing.assert_array_equal(waterfill(ch, True).p, waterfill(ch, False).p)


@pytest.mark.parametrize("mod", [BPSK, QPSK, SquareQam(16), SquareQam(64)], ids=lambda m: m.name)
def test_ser_scalar(mod):
    for g in (0.0, 1e-3, 0.5, 3.0, 20.0, 1e3):
        assert ser_scalar(g, mod.order) == pytest.approx(ser_scalar.py_func(g, mod.order), rel=1e-13, abs=1e-300)
        assert ser_scalar(g, mod.order) == pytest.approx(float(ser(g, mod)), rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("seed", range(30))
def test_mimo_search_paths(seed):
    s = random_mimo(seed, 3 + seed % 3)
    assert mimo.select_max_sr(s, use_numba=True)[0] == mimo.select_max_sr(s, use_numba=False)[0]
    assert mimo.select_min_ser(s, QPSK, use_numba=True)[0] == mimo.select_min_ser(s, QPSK, use_numba=False)[0]


@pytest.mark.parametrize("seed", range(30))
def test_auction_paths(seed):
    s = random_ofdma(seed, 3, 4)
    u = s.unit_rates(s.p_bs_total / s.m)
    a = ofdma.auction_kernel(u, 1e-3, 10**6)
    b = ofdma.auction_kernel.py_func(u, 1e-3, 10**6)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x, y)


@pytest.mark.parametrize("rule", ["uniform", "waterfilling"])
@pytest.mark.parametrize("seed", range(10))
def test_central_paths(seed, rule):
    s = random_ofdma(seed, 3, 5)
    a = ofdma.centralized_exhaustive(s, rule, use_numba=True)
    b = ofdma.centralized_exhaustive(s, rule, use_numba=False)
    assert a.assignment == b.assignment
    assert a.objective == pytest.approx(b.objective, rel=1e-12)


@pytest.mark.parametrize("flag, expected", [("1", "False"), ("0", "True"), ("", "True")])
def test_env_flag(flag, expected):
    env = dict(os.environ, FDNET_DISABLE_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", "import fdnet; print(fdnet.USE_NUMBA)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == expected
