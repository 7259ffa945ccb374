import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qdimtest.bounds import ProtocolParams
from qdimtest.noisemodel import NoiseParams, honest_pass_prob, scale_noise
from qdimtest.simulator import (
    BLOCK_SIZE,
    Strategy,
    confidence_lower,
    iter_trials,
    run_trials,
    strategy_store_k,
    trial_arrays,
    write_trial_log,
)


def within(p_hat, p, trials, k):
    return abs(p_hat - p) <= k * math.sqrt(p * (1 - p) / trials) + 1e-12


class TestStoreK:
    def test_full_memory(self):
        assert strategy_store_k(9, 9, 0) == 1.0

    def test_no_memory(self):
        assert strategy_store_k(7, 0, 0) == 2.0**-7

    def test_enumeration(self):
        # 2^5 guess patterns over the 5 unstored bits, count those with <= 2 errors
        count = sum(1 for g in range(32) if bin(g).count("1") <= 2)
        assert count == 16
        assert strategy_store_k(10, 5, 2) == 0.5


class TestConfidenceLower:
    def test_all_pass(self):
        for trials in (1, 50, 10_000):
            assert confidence_lower(trials, trials, 0.05) == pytest.approx(0.05 ** (1 / trials))

    def test_zero(self):
        assert confidence_lower(0, 100) == 0.0

    def test_hoeffding(self):
        got = confidence_lower(9000, 10_000, 0.05, "hoeffding")
        assert got == pytest.approx(0.9 - math.sqrt(math.log(20) / 20_000))

    def test_clopper_pearson_tail(self):
        # at the bound, P[Bin(trials, p_lower) >= passes] = delta
        from scipy import stats

        lo = confidence_lower(37, 100, 0.05)
        assert stats.binom.sf(36, 100, lo) == pytest.approx(0.05, rel=1e-8)

    @given(st.integers(1, 400), st.data(), st.sampled_from(["clopper-pearson", "hoeffding"]))
    def test_below_p_hat(self, trials, data, method):
        passes = data.draw(st.integers(0, trials))
        lo = confidence_lower(passes, trials, 0.05, method)
        assert 0.0 <= lo <= passes / trials

    def test_validation(self):
        with pytest.raises(ValueError):
            confidence_lower(5, 4)
        with pytest.raises(ValueError):
            confidence_lower(1, 4, 1.5)
        with pytest.raises(ValueError):
            confidence_lower(1, 4, 0.05, "wald")


class TestRunTrials:
    def test_zero_noise_honest(self):
        res = run_trials(ProtocolParams(12, 0), NoiseParams(), Strategy.honest(), 5000, seed=1)
        assert res.passes == res.trials == 5000
        assert res.trials_X + res.trials_Z == 5000

    def test_classical_guess(self):
        n, trials = 10, 10**7
        res = run_trials(ProtocolParams(n, 0), NoiseParams(), Strategy.classical(), trials, seed=42)
        assert within(res.p_hat, 2.0**-n, trials, 3)

    @pytest.mark.parametrize("n,k,t", [(8, 3, 1), (12, 0, 4), (15, 10, 2)])
    def test_store_k(self, n, k, t):
        trials = 200_000
        res = run_trials(ProtocolParams(n, t), NoiseParams(), Strategy.store_k(k), trials, seed=n * 100 + k)
        assert within(res.p_hat, strategy_store_k(n, k, t), trials, 3)

    def test_fixed_answer(self):
        # a fixed answer matches S on each bit with probability 1/2
        res = run_trials(ProtocolParams(6, 2), NoiseParams(), Strategy.fixed("010101"), 100_000, seed=5)
        assert within(res.p_hat, strategy_store_k(6, 0, 2), 100_000, 4)

    def test_matches_analytic(self):
        params, noise = ProtocolParams(50, 3), scale_noise(0.005)
        trials = 10**6
        res = run_trials(params, noise, Strategy.honest(), trials, seed=99, workers=4)
        assert within(res.p_hat, honest_pass_prob(params, noise).p, trials, 3)

    def test_deterministic_and_worker_independent(self):
        args = (ProtocolParams(20, 2), scale_noise(0.05), Strategy.honest(), 3 * BLOCK_SIZE + 17)
        a = run_trials(*args, seed=7)
        b = run_trials(*args, seed=7, workers=3)
        c = run_trials(*args, seed=8)
        assert a == b
        assert a != c

    def test_trial_stream_consistent(self):
        args = (ProtocolParams(9, 1), scale_noise(0.2), Strategy.honest(), 500)
        records = list(iter_trials(*args, seed=3))
        res = run_trials(*args, seed=3)
        assert sum(r.passed for r in records) == res.passes
        for r in records:
            assert r.mismatches == sum(a != b for a, b in zip(r.s, r.s_prime))
            assert r.passed == (r.mismatches <= 1)
        theta, s, sp = trial_arrays(*args, seed=3)
        assert "".join(map(str, sp[17])) == records[17].s_prime

    def test_trial_log(self, tmp_path):
        path = tmp_path / "log.jsonl"
        with open(path, "w") as fh:
            n = write_trial_log(iter_trials(ProtocolParams(4, 0), NoiseParams(), Strategy.honest(), 10, seed=0), fh)
        assert n == 10 and len(path.read_text().splitlines()) == 10

    def test_validation(self):
        with pytest.raises(ValueError):
            run_trials(ProtocolParams(4, 0), NoiseParams(), Strategy.store_k(5), 10, seed=0)
        with pytest.raises(ValueError):
            run_trials(ProtocolParams(4, 0), NoiseParams(), Strategy.fixed("01"), 10, seed=0)
        with pytest.raises(ValueError):
            Strategy.fixed("01a")
