"""Monte-Carlo experiment runner.

Trial ``t`` of every sweep point draws from ``RngStream(base_seed, t)``, so
the sweep points see common random numbers and the records do not depend on
how trials are scheduled across threads.
"""

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List

import numpy as np

from fdnet import mimo, ofdma, power, relay
from fdnet.channel import (
    ChannelGain,
    ConstantPower,
    Modulation,
    RayleighFaded,
    RicianFaded,
    RngStream,
    cancellation_to_gain,
    draw_fading_array,
    rate,
    rsi_gain_array,
)
from fdnet.config import ExperimentConfig
from fdnet.errors import ConfigError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ResultRecord:
    sweep_param: str
    sweep_value: object
    metric: str
    mean: float
    standard_error: float
    trials: int


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def rsi_model(params, mean_gain: float):
    name = params["rsi_model"]
    if name == "constant":
        return ConstantPower(mean_gain)
    if name == "rayleigh":
        return RayleighFaded(mean_gain)
    return RicianFaded(params["rsi_k_factor"], mean_gain)


def _gains(rng, params, size, mean=1.0):
    h = draw_fading_array(rng, mean, params["channel_k_factor"], size)
    return np.abs(h) ** 2


# --- scenario generators ----------------------------------------------------------


def _mimo_scenario(params, rng):
    n = params["antennas"]
    p = db_to_linear(params["power_db"])
    k = params["channel_k_factor"]
    model = rsi_model(params, cancellation_to_gain(params["cancellation_db"]))
    h_ab = draw_fading_array(rng, 1.0, k, (n, n))
    h_ba = draw_fading_array(rng, 1.0, k, (n, n))
    rsi_a = rsi_gain_array(model, rng, (n, n))
    rsi_b = rsi_gain_array(model, rng, (n, n))
    return mimo.MimoScenario(h_ab, h_ba, rsi_a, rsi_b, p, p, params["noise"])


def _ofdma_scenario(params, rng):
    m, k = params["m"], params["k"]
    p_user = db_to_linear(params["user_power_db"])
    p_bs = db_to_linear(params["bs_power_db"])
    model = rsi_model(params, cancellation_to_gain(params["cancellation_db"]))
    g_up = _gains(rng, params, (m, k))
    g_down = _gains(rng, params, (m, k))
    g_cross = _gains(rng, params, (m, m, k), db_to_linear(params["cross_gain_db"]))
    # BS leakage scales with its per-subcarrier downlink power.
    rsi_bs = rsi_gain_array(model, rng, k) * (p_bs / m)
    return ofdma.OfdmaScenario(g_up, g_down, g_cross, rsi_bs, p_user, p_bs, params["noise"])


def _relay_scenario(params, rng):
    n, c = params["relays"], params["configs_per_relay"]
    model = rsi_model(params, cancellation_to_gain(params["cancellation_db"]))
    h_sr = draw_fading_array(rng, 1.0, params["channel_k_factor"], (n, c))
    h_rd = draw_fading_array(rng, 1.0, params["channel_k_factor"], (n, c))
    rsi = rsi_gain_array(model, rng, (n, c))
    h_sd = draw_fading_array(rng, db_to_linear(params["direct_gain_db"]), 0.0, None)
    configs = [
        [relay.AntennaConfig(1 + q, 2 + q, ChannelGain.from_complex(h_sr[r, q]),
                             ChannelGain.from_complex(h_rd[r, q]), float(rsi[r, q])) for q in range(c)]
        for r in range(n)
    ]
    return relay.RelayScenario(
        configs,
        db_to_linear(params["source_power_db"]),
        db_to_linear(params["relay_power_db"]),
        params["noise"],
        ChannelGain.from_complex(h_sd) if params["direct_link"] else None,
    )


def _mode_scenario(params, rng):
    """Power gains (g_ab, g_ba, rsi_a, rsi_b) of a symmetric two-node link."""
    model = rsi_model(params, cancellation_to_gain(params["cancellation_db"]))
    if params["fading"]:
        g = _gains(rng, params, 2)
    else:
        g = np.ones(2)
    rsi = rsi_gain_array(model, rng, 2)
    return g[0], g[1], rsi[0], rsi[1]


def _power_scenario(params, rng):
    n = max(params["streams"], 2)
    p = db_to_linear(params["power_db"])
    gain_a = cancellation_to_gain(params["cancellation_db"])
    gain_b = gain_a * db_to_linear(params["rsi_asymmetry_db"])
    rsi_a = rsi_gain_array(rsi_model(params, gain_a), rng, (n, n))
    rsi_b = rsi_gain_array(rsi_model(params, gain_b), rng, (n, n))
    zeros = np.zeros((n, n), dtype=complex)
    scn = mimo.MimoScenario(zeros, zeros, rsi_a, rsi_b, p, p, params["noise"])
    s = params["streams"]
    return scn, _gains(rng, params, s), _gains(rng, params, s)


GENERATORS: Dict[str, Callable] = {
    "MimoSelection": _mimo_scenario,
    "OfdmaMatching": _ofdma_scenario,
    "RelaySelection": _relay_scenario,
    "ModeSwitch": _mode_scenario,
    "PowerSweep": _power_scenario,
}


def generate_scenario(kind: str, params, rng: RngStream):
    """Draw one scenario of ``kind`` from ``rng`` using ``params``."""
    try:
        gen = GENERATORS[kind]
    except KeyError:
        raise ConfigError(f"kind: unknown experiment kind {kind!r}", "kind") from None
    return gen(params, rng)


# --- per-trial metric evaluation ---------------------------------------------------


def _mimo_trial(params, rng):
    scn = _mimo_scenario(params, rng)
    mod = Modulation.parse(params["modulation"])
    sel_sr, sr = mimo.select_max_sr(scn)
    sel_ser, s = mimo.select_min_ser(scn, mod)
    return {"maxsr_sum_rate": sr, "minser_sum_ser": s}


def _ofdma_trial(params, rng):
    scn = _ofdma_scenario(params, rng)
    rule = params["split_rule"]
    eps = params["epsilon"] or None
    out = {}
    res = ofdma.price_matching(scn, rule, eps)
    out["matching_sum_rate"] = ofdma.sum_rate(scn, res.assignment, res.split)
    out["matching_iterations"] = float(res.iterations)
    if params["centralized"]:
        cen = ofdma.centralized_exhaustive(scn, rule)
        out["centralized_sum_rate"] = ofdma.sum_rate(scn, cen.assignment, cen.split)
        out["centralized_candidates"] = float(cen.candidates_evaluated)
    if params["random"]:
        asg = ofdma.random_matching(scn, rng)
        out["random_sum_rate"] = ofdma.sum_rate(scn, asg, ofdma.split_bs_power(scn, asg, rule))
    return out


def _relay_trial(params, rng):
    scn = _relay_scenario(params, rng)
    proto = relay.Protocol.parse(params["protocol"])
    r, c, g = relay.select_relay_antenna(scn, scn.p_r_max, proto)
    p_opt, g_opt = relay.optimal_relay_power(scn, r, c, proto)
    if scn.h_sd is not None:
        g_opt = max(g_opt, relay.end_to_end_sinr(scn, r, c, p_opt, proto))
    return {
        "selection_rate": rate(g),
        "optimized_rate": rate(g_opt),
        "relay_power_fraction": p_opt / scn.p_r_max if scn.p_r_max > 0 else 0.0,
    }


def _mode_trial(params, rng):
    g_ab, g_ba, rsi_a, rsi_b = _mode_scenario(params, rng)
    p, n0 = db_to_linear(params["power_db"]), params["noise"]
    dec = relay.mode_switch(
        g_ba * p / (rsi_a * p + n0),
        g_ab * p / (rsi_b * p + n0),
        g_ba * p / n0,
        g_ab * p / n0,
    )
    fd = dec.chosen is relay.Mode.FD
    return {
        "fd_rate": dec.fd_rate,
        "hd_rate": dec.hd_rate,
        "adaptive_rate": max(dec.fd_rate, dec.hd_rate),
        "fd_fraction": 1.0 if fd else 0.0,
    }


def _power_trial(params, rng):
    scn, ga, gb = _power_scenario(params, rng)
    res = power.fd_mimo_waterfill(scn, ga, gb, params["tol"], params["max_iters"])
    naive_a = power.waterfill(power.ParallelChannels(ga / scn.noise, scn.p_a)).p
    naive_b = power.waterfill(power.ParallelChannels(gb / scn.noise, scn.p_b)).p
    budget = max(scn.p_a, 1e-300)
    return {
        "aware_sum_rate": power.fd_stream_rates(scn, ga, gb, res.alloc_a.p, res.alloc_b.p),
        "naive_sum_rate": power.fd_stream_rates(scn, ga, gb, naive_a, naive_b),
        "converged_fraction": 1.0 if res.converged else 0.0,
        "iterations": float(res.iterations),
        "allocation_asymmetry": float(np.abs(res.alloc_a.p - res.alloc_b.p).sum() / budget),
    }


TRIALS: Dict[str, Callable] = {
    "MimoSelection": _mimo_trial,
    "OfdmaMatching": _ofdma_trial,
    "RelaySelection": _relay_trial,
    "ModeSwitch": _mode_trial,
    "PowerSweep": _power_trial,
}


# --- execution ---------------------------------------------------------------------


def thread_count() -> int:
    """Worker threads allowed by ``FDNET_THREADS`` (default: CPU count)."""
    raw = os.environ.get("FDNET_THREADS", "").strip()
    if not raw:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"FDNET_THREADS must be a positive integer, got {raw!r}", "FDNET_THREADS") from None
    if n < 1:
        raise ConfigError("FDNET_THREADS must be >= 1", "FDNET_THREADS")
    return n


def _run_range(trial_fn, params, base_seed, start, stop):
    return [trial_fn(params, RngStream(base_seed, t)) for t in range(start, stop)]


def run_trials(cfg: ExperimentConfig, value, threads=None) -> List[Dict[str, float]]:
    """Per-trial metric dicts for one sweep point, ordered by trial index."""
    trial_fn = TRIALS[cfg.kind]
    params = cfg.point(value)
    n = cfg.trials
    threads = thread_count() if threads is None else threads
    if threads <= 1 or n < 2:
        return _run_range(trial_fn, params, cfg.base_seed, 0, n)
    chunks = min(n, threads * 4)
    bounds = [(n * c // chunks, n * (c + 1) // chunks) for c in range(chunks)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = pool.map(lambda b: _run_range(trial_fn, params, cfg.base_seed, *b), bounds)
        return [row for part in parts for row in part]


def summarize(values) -> tuple:
    """Mean and standard error of the mean (0 for a single trial)."""
    a = np.asarray(values, dtype=float)
    mean = float(a.mean())
    if a.size < 2:
        return mean, 0.0
    return mean, float(a.std(ddof=1) / math.sqrt(a.size))


def run_experiment(cfg: ExperimentConfig, threads=None) -> List[ResultRecord]:
    """Run every sweep point and aggregate one record per (value, metric)."""
    if cfg.kind not in TRIALS:
        raise ConfigError(f"kind: unknown experiment kind {cfg.kind!r}", "kind")
    records = []
    for value in cfg.sweep_values:
        log.info("%s: %s = %s, %d trials", cfg.kind, cfg.sweep_param, value, cfg.trials)
        rows = run_trials(cfg, value, threads)
        for metric in rows[0]:
            mean, se = summarize([r[metric] for r in rows])
            records.append(ResultRecord(cfg.sweep_param, value, metric, mean, se, cfg.trials))
    return records
