"""Time the numba kernels against their numpy / pure-python fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat N]

Each case is warmed up once (so numba compilation is excluded) and the best
of ``--repeat`` timings is reported per call.
"""

import argparse
import timeit

import numpy as np

from fdnet import harness, mimo, ofdma
from fdnet.channel import RngStream
from fdnet.config import default_config
from fdnet.power import ParallelChannels, waterfill


def cases():
    mimo_cfg = default_config("MimoSelection")
    scn5 = harness.generate_scenario("MimoSelection", mimo_cfg.point(5), RngStream(1, 0))
    ofdma_cfg = default_config("OfdmaMatching", m=5, k=7)
    big = harness.generate_scenario("OfdmaMatching", ofdma_cfg.point(10), RngStream(1, 0))
    mid = harness.generate_scenario("OfdmaMatching", default_config("OfdmaMatching").point(10), RngStream(1, 0))
    ch = ParallelChannels(np.random.default_rng(0).exponential(size=64), 10.0)
    return [
        ("max-SR search, N=5", lambda fast: mimo.select_max_sr(scn5, use_numba=fast)),
        ("min-SER search, N=5", lambda fast: mimo.select_min_ser(scn5, use_numba=fast)),
        ("price matching, M=5 K=7", lambda fast: ofdma.price_matching(big, use_numba=fast)),
        ("centralized, M=3 K=4", lambda fast: ofdma.centralized_exhaustive(mid, use_numba=fast)),
        ("centralized, M=5 K=7", lambda fast: ofdma.centralized_exhaustive(big, use_numba=fast)),
        ("water-filling, 64 channels", lambda fast: waterfill(ch, use_numba=fast)),
    ]


def best_time(fn, repeat):
    fn()
    timer = timeit.Timer(fn)
    number, _ = timer.autorange()
    return min(timer.repeat(repeat, number)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    print(f"{'case':<28} {'numba':>12} {'numpy':>12} {'speedup':>8}")
    for name, fn in cases():
        fast = best_time(lambda: fn(True), args.repeat)
        slow = best_time(lambda: fn(False), args.repeat)
        print(f"{name:<28} {fast * 1e6:>10.1f}us {slow * 1e6:>10.1f}us {slow / fast:>7.1f}x")


if __name__ == "__main__":
    main()
