from __future__ import annotations

import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from shadowqae.bounds import (
    QAE_FAILURE_BOUND,
    corollary_plan,
    hoeffding_bound,
    median_concentration_bound,
    proposition4_plan,
    qae_error_radius,
    theorem1_alice_scale,
)

mp.mp.dps = 50
K_COEFF = 1 / (2 * (8 / mp.pi ** 2 - mp.mpf(1) / 2) ** 2)


def mp_m_min(eps, n):
    eps = mp.mpf(eps)
    return int(mp.ceil(2 * mp.pi * mp.sqrt(3 * (2 ** n + 1)) / (6 * eps / 13) ** 2))


def mp_prop4(eps, delta, n):
    eps, delta = mp.mpf(eps), mp.mpf(delta)
    n_min = int(mp.ceil(24 / (eps ** 2 * delta)))
    n_max = (mp.mpf(13) / 6) ** 4 * delta / (12 * eps ** 4)
    k_min = int(mp.ceil(K_COEFF * mp.log(4 * n_min / delta)))
    return n_min, n_max, k_min, mp_m_min(eps, n), n_min <= n_max


def mp_corollary(eps, delta, n):
    eps, delta = mp.mpf(eps), mp.mpf(delta)
    N = int(mp.ceil(72 / eps ** 2))
    P = int(mp.ceil(18 * mp.log(1 / delta)))
    K = int(mp.ceil(K_COEFF * mp.log(12 * N)))
    return P, N, K, mp_m_min(eps, n)


class TestProposition4:
    def test_infeasible_example(self):
        plan = proposition4_plan(0.2, 0.5, 9)
        assert not plan.feasible
        assert plan.N_min == 1200
        assert plan.N_max == pytest.approx(573.9, abs=0.05)

    def test_feasible_example(self):
        plan = proposition4_plan(0.05, 0.2, 9)
        assert plan.feasible and plan.N_min == 48000 and plan.K_min == 72
        assert plan.M_min == mp_m_min("0.05", 9)
        assert plan.N_total == 48000 + 48000 * 72 * plan.M_min

    @pytest.mark.parametrize("eps,delta,n", [(0.2, 0.5, 9), (0.05, 0.2, 9), (0.01, 0.24, 4), (0.3, 0.9, 12)])
    def test_matches_high_precision(self, eps, delta, n):
        n_min, n_max, k_min, m_min, feasible = mp_prop4(str(eps), str(delta), n)
        plan = proposition4_plan(eps, delta, n)
        assert (plan.N_min, plan.K_min, plan.M_min, plan.feasible) == (n_min, k_min, m_min, feasible)
        assert plan.N_max == pytest.approx(float(n_max), rel=1e-12)

    @given(st.floats(1e-3, 1 / 24 - 1e-6))
    def test_delta_24_eps_feasible(self, eps):
        assert proposition4_plan(eps, 24 * eps, 5).feasible

    def test_domain(self):
        for bad in ((0.0, 0.5), (0.1, 1.0), (1.2, 0.5)):
            with pytest.raises(ValueError):
                proposition4_plan(*bad, 3)

    @given(st.floats(0.01, 0.5), st.floats(0.01, 0.5), st.floats(0.05, 0.99), st.integers(1, 20))
    def test_monotone(self, e1, e2, delta, n):
        lo, hi = sorted((e1, e2))
        a, b = proposition4_plan(lo, delta, n), proposition4_plan(hi, delta, n)
        assert a.M_min >= b.M_min and a.N_min >= b.N_min and a.K_min >= b.K_min
        assert proposition4_plan(lo, delta, n + 1).N_total >= a.N_total


class TestCorollary:
    def test_example(self):
        plan = corollary_plan(0.1, 0.05, 9)
        assert (plan.P, plan.N, plan.K) == (54, 7200, 59)
        assert (plan.P, plan.N, plan.K, plan.M) == mp_corollary("0.1", "0.05", 9)
        assert plan.bob_cost == 54 * 7200
        assert plan.alice_cost == 54 * 7200 * 59 * plan.M

    def test_delta_edge(self):
        assert corollary_plan(0.1, 0.09 - 1e-12, 9).P == 44
        with pytest.raises(ValueError):
            corollary_plan(0.1, 0.09, 9)
        with pytest.raises(ValueError):
            corollary_plan(0.2, 0.5, 9)

    @pytest.mark.parametrize("eps,delta,n", [(0.25, 0.05, 4), (0.02, 0.001, 9), (0.5, 0.08, 1)])
    def test_matches_high_precision(self, eps, delta, n):
        plan = corollary_plan(eps, delta, n)
        assert (plan.P, plan.N, plan.K, plan.M) == mp_corollary(str(eps), str(delta), n)

    def test_doubling_n(self):
        m1, m2 = corollary_plan(0.1, 0.05, 10).M, corollary_plan(0.1, 0.05, 20).M
        assert m2 / m1 == pytest.approx(math.sqrt((2 ** 20 + 1) / (2 ** 10 + 1)), rel=1e-4)
        assert m2 / m1 / 2 ** 5 == pytest.approx(1.0, rel=1e-3)

    def test_alice_cost_scaling(self):
        # ratio of explicit cost to the asymptotic scale stays within a bounded band
        ratios = []
        for eps in (0.3, 0.1, 0.03, 0.01):
            for delta in (0.08, 0.01, 1e-4):
                for n in (4, 9, 16, 24):
                    plan = corollary_plan(eps, delta, n)
                    ratios.append(plan.alice_cost / theorem1_alice_scale(eps, delta, n))
        assert max(ratios) / min(ratios) < 20


class TestConcentration:
    def test_radius(self):
        assert qae_error_radius(0.0, 64) == pytest.approx(math.pi ** 2 / 64 ** 2)
        exact = float(2 * mp.pi * mp.sqrt(mp.mpf(1) / 4) / 100 + mp.pi ** 2 / 10 ** 4)
        assert qae_error_radius(0.5, 100) == pytest.approx(exact, rel=1e-14)
        assert qae_error_radius(0.5, 100) == pytest.approx(0.0324034, abs=1e-6)
        grid = np.linspace(0, 1, 101)
        assert int(np.argmax([qae_error_radius(a, 50) for a in grid])) == 50
        assert QAE_FAILURE_BOUND == pytest.approx(1 - 8 / math.pi ** 2)

    def test_hoeffding(self):
        assert hoeffding_bound(1, 1.0, 1.0) == pytest.approx(2 * math.exp(-2))
        assert hoeffding_bound(10, math.inf, 1.0) == 0.0
        with pytest.raises(ValueError):
            hoeffding_bound(0, 1.0, 1.0)

    def test_hoeffding_monte_carlo(self):
        rng = np.random.default_rng(8)
        N, trials = 20, 1_000_000
        sums = rng.binomial(N, 0.5, size=trials).astype(float)
        for eps in (2.0, 4.0, 6.0):
            freq = np.mean(np.abs(sums - N / 2) >= eps)
            assert freq <= hoeffding_bound(N, eps, 1.0)

    def test_median_bound(self):
        assert median_concentration_bound(100, 1 / 3) == pytest.approx(math.exp(-50 / 9), rel=1e-12)
        assert median_concentration_bound(100, 1 / 3) == pytest.approx(0.003866, abs=5e-7)
        assert median_concentration_bound(10, 0.5 - 1e-9) == pytest.approx(1.0)
        with pytest.raises(ValueError):
            median_concentration_bound(10, 0.5)

    def test_median_bound_monte_carlo(self):
        rng = np.random.default_rng(9)
        N, delta = 31, 0.3
        fails = rng.random((200_000, N)) < delta
        freq = np.mean(fails.sum(axis=1) >= N / 2)
        assert freq <= median_concentration_bound(N, delta)
