import numpy as np
import pytest

from fdnet._accel import HAVE_NUMBA
from fdnet.mimo import MimoScenario
from fdnet.ofdma import OfdmaScenario

PATHS = [pytest.param(True, id="numba"), pytest.param(False, id="numpy")]
if not HAVE_NUMBA:
    PATHS = PATHS[1:]


@pytest.fixture(params=PATHS)
def use_numba(request):
    return request.param


def cn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_mimo(seed, n_a=3, n_b=None, p=10.0, rsi_scale=0.1, noise=1.0):
    rng = np.random.default_rng(seed)
    n_b = n_a if n_b is None else n_b
    return MimoScenario(
        cn(rng, n_a, n_b), cn(rng, n_b, n_a),
        rsi_scale * rng.random((n_a, n_a)), rsi_scale * rng.random((n_b, n_b)),
        p, p, noise,
    )


def random_ofdma(seed, m=2, k=2, p_user=10.0, p_bs=10.0, cross=0.1, rsi=0.01):
    rng = np.random.default_rng(seed)
    e = rng.exponential
    return OfdmaScenario(e(size=(m, k)), e(size=(m, k)), cross * e(size=(m, m, k)),
                         rsi * e(size=k), p_user, p_bs, 1.0)


def bisection_waterfill(gains, p_total, iters=200):
    """Independent reference: bisect on the water level."""
    gains = np.asarray(gains, float)
    inv = np.full(gains.shape, np.inf)
    pos = gains > 0
    inv[pos] = 1.0 / gains[pos]
    lo, hi = inv.min(), inv.min() + p_total
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if np.maximum(0.0, mid - inv).sum() > p_total:
            hi = mid
        else:
            lo = mid
    mu = 0.5 * (lo + hi)
    return np.maximum(0.0, mu - inv), mu


# Acceptance verdicts, one line per criterion, repeated at the end of the run.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
