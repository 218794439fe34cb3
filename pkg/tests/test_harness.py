import math

import numpy as np
import pytest

from fdnet import harness, mimo, ofdma, relay
from fdnet.channel import ConstantPower, RayleighFaded, RicianFaded, RngStream, rsi_power
from fdnet.config import KINDS, default_config
from fdnet.errors import ConfigError


def small(kind, **kw):
    kw.setdefault("trials", 5)
    return default_config(kind, **kw)


class TestScenarios:
    def test_mimo_shapes(self):
        cfg = small("MimoSelection")
        scn = harness.generate_scenario("MimoSelection", cfg.point(3), RngStream(1, 0))
        assert isinstance(scn, mimo.MimoScenario)
        assert scn.h_ab.shape == (3, 3) and scn.h_ba.shape == (3, 3)
        assert scn.rsi_a.shape == (3, 3) and scn.rsi_b.shape == (3, 3)
        assert scn.p_a == pytest.approx(10.0) and scn.noise == 1.0

    def test_ofdma_shapes(self):
        cfg = small("OfdmaMatching")
        scn = harness.generate_scenario("OfdmaMatching", cfg.point(10), RngStream(1, 0))
        assert isinstance(scn, ofdma.OfdmaScenario)
        assert (scn.m, scn.k) == (3, 4)
        assert scn.g_cross.shape == (3, 3, 4) and scn.rsi_bs.shape == (4,)

    def test_relay_shapes(self):
        cfg = small("RelaySelection")
        scn = harness.generate_scenario("RelaySelection", cfg.point(4), RngStream(1, 0))
        assert isinstance(scn, relay.RelayScenario)
        assert scn.n_relays == 4 and all(len(c) == 2 for c in scn.configs)
        assert scn.h_sd is None

    def test_unknown_kind(self):
        with pytest.raises(ConfigError) as e:
            harness.generate_scenario("Nope", {}, RngStream(1, 0))
        assert e.value.key == "kind"

    def test_110db_is_1e_minus_11(self):
        params = dict(small("ModeSwitch").point(110.0))
        params["rsi_model"] = "constant"
        model = harness.rsi_model(params, 10 ** (-110 / 10))
        assert isinstance(model, ConstantPower)
        assert rsi_power(model, 1.0, RngStream(0, 0)) == pytest.approx(1e-11, rel=1e-12)

    def test_rsi_model_choice(self):
        params = dict(small("ModeSwitch").point(80.0))
        assert isinstance(harness.rsi_model(params, 1.0), RayleighFaded)
        params.update(rsi_model="rician", rsi_k_factor=3.0)
        m = harness.rsi_model(params, 2.0)
        assert isinstance(m, RicianFaded) and m.k_factor == 3.0

    def test_moments_1e6(self):
        # 80 dB cancellation, Rayleigh: exponential RSI power with mean 1e-8.
        params = dict(small("ModeSwitch").point(80.0))
        g = harness.rsi_gain_array(harness.rsi_model(params, 1e-8), RngStream(5, 0), 10**6)
        se = g.std() / 1e3
        assert abs(g.mean() - 1e-8) < 4 * se
        assert g.var() / g.mean() ** 2 == pytest.approx(1.0, abs=0.01)
        h = harness._gains(RngStream(6, 0), params, 10**6)
        assert abs(h.mean() - 1.0) < 4 * h.std() / 1e3

    def test_draws_come_from_stream(self):
        cfg = small("OfdmaMatching")
        a = harness.generate_scenario("OfdmaMatching", cfg.point(5), RngStream(3, 2))
        b = harness.generate_scenario("OfdmaMatching", cfg.point(5), RngStream(3, 2))
        c = harness.generate_scenario("OfdmaMatching", cfg.point(5), RngStream(3, 3))
        np.testing.assert_array_equal(a.g_up, b.g_up)
        assert not np.array_equal(a.g_up, c.g_up)


class TestRunExperiment:
    @pytest.mark.parametrize("kind", KINDS)
    def test_single_trial_single_value(self, kind):
        cfg = default_config(kind, trials=1)
        cfg = cfg.replace(sweep_values=cfg.sweep_values[:1])
        recs = harness.run_experiment(cfg, threads=1)
        metrics = [r.metric for r in recs]
        assert len(metrics) == len(set(metrics)) > 0
        assert all(r.standard_error == 0.0 and r.trials == 1 for r in recs)
        assert all(r.sweep_value == cfg.sweep_values[0] for r in recs)

    @pytest.mark.parametrize("kind", KINDS)
    def test_deterministic_and_thread_independent(self, kind):
        cfg = default_config(kind, trials=7)
        serial = harness.run_experiment(cfg, threads=1)
        again = harness.run_experiment(cfg, threads=1)
        threaded = harness.run_experiment(cfg, threads=3)
        assert serial == again == threaded

    def test_records_ordered_by_value_then_metric(self):
        cfg = small("MimoSelection")
        recs = harness.run_experiment(cfg, threads=1)
        assert [r.sweep_value for r in recs] == [3, 3, 4, 4, 5, 5]
        assert [r.metric for r in recs[:2]] == ["maxsr_sum_rate", "minser_sum_ser"]

    def test_aggregation_matches_recomputation(self):
        cfg = small("RelaySelection", trials=9)
        recs = harness.run_experiment(cfg, threads=2)
        for value in cfg.sweep_values:
            rows = [harness.TRIALS["RelaySelection"](cfg.point(value), RngStream(cfg.base_seed, t))
                    for t in range(cfg.trials)]
            for r in (r for r in recs if r.sweep_value == value):
                vals = [row[r.metric] for row in rows]
                mean = sum(vals) / len(vals)
                var = sum((v - mean) ** 2 for v in vals) / (len(vals) - 1)
                assert r.mean == pytest.approx(mean, rel=1e-12, abs=1e-15)
                assert r.standard_error == pytest.approx(math.sqrt(var / len(vals)), rel=1e-9, abs=1e-15)

    def test_common_random_numbers(self):
        # Same trial index sees the same channel draw at every sweep point.
        cfg = small("ModeSwitch", trials=1)
        a = harness._mode_scenario(cfg.point(110.0), RngStream(1, 0))
        b = harness._mode_scenario(cfg.point(0.0), RngStream(1, 0))
        assert a[:2] == b[:2]
        assert a[2] < b[2]

    def test_ofdma_counters(self):
        recs = harness.run_experiment(small("OfdmaMatching", trials=3, sweep_values=(10,)), threads=1)
        by = {r.metric: r for r in recs}
        assert by["centralized_candidates"].mean == ofdma.candidate_count(3, 4) == 144
        assert by["centralized_candidates"].standard_error == 0.0
        assert by["matching_iterations"].mean >= 1
        assert by["centralized_sum_rate"].mean >= by["matching_sum_rate"].mean - 1e-12


class TestSummarize:
    def test_single(self):
        assert harness.summarize([2.5]) == (2.5, 0.0)

    def test_values(self):
        m, se = harness.summarize([1.0, 2.0, 3.0, 4.0])
        assert m == 2.5
        assert se == pytest.approx(math.sqrt(5 / 3 / 4))


class TestThreads:
    def test_default(self, monkeypatch):
        monkeypatch.delenv("FDNET_THREADS", raising=False)
        assert harness.thread_count() >= 1

    def test_env(self, monkeypatch):
        monkeypatch.setenv("FDNET_THREADS", "3")
        assert harness.thread_count() == 3

    @pytest.mark.parametrize("raw", ["0", "-2", "many"])
    def test_bad_env(self, monkeypatch, raw):
        monkeypatch.setenv("FDNET_THREADS", raw)
        with pytest.raises(ConfigError):
            harness.thread_count()
