import math

import numpy as np
import pytest

from hirelp import constants


def golden_section_max(f, lo, hi, tol=1e-12):
    phi = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c = b - phi * (b - a)
    d = a + phi * (b - a)
    while b - a > tol:
        if f(c) >= f(d):
            b = d
        else:
            a = c
        c = b - phi * (b - a)
        d = a + phi * (b - a)
    s = 0.5 * (a + b)
    return f(s), s


class TestTruncatedPoissonMean:
    def test_zero_rate(self):
        assert constants.poisson_truncated_mean(0.0, 3) == 0.0

    def test_k1_is_tail_probability(self):
        assert constants.poisson_truncated_mean(1.0, 1) == pytest.approx(1 - 1 / math.e)

    def test_inactive_truncation(self):
        assert constants.poisson_truncated_mean(1.0, 50) == pytest.approx(1.0, abs=1e-10)

    def test_matches_direct_summation(self):
        for lam, k in ((0.5, 2), (3.0, 3), (10.0, 5), (2.0, 1)):
            term = math.exp(-lam)
            direct = 0.0
            for j in range(200):
                direct += min(j, k) * term
                term *= lam / (j + 1)
            assert constants.poisson_truncated_mean(lam, k) == pytest.approx(direct, abs=1e-12)

    def test_negative_rate_rejected(self):
        with pytest.raises(ValueError):
            constants.poisson_truncated_mean(-1.0, 2)


class TestGuaranteePtk:
    def test_k1(self):
        assert constants.guarantee_ptk(1) == pytest.approx(1 - 1 / math.e, abs=1e-12)

    def test_k2(self):
        assert constants.guarantee_ptk(2) == pytest.approx(1 - 2 * math.exp(-2), abs=1e-12)

    def test_tends_to_one(self):
        assert constants.guarantee_ptk(500) > 0.98

    def test_strictly_increasing(self):
        vals = [constants.guarantee_ptk(k) for k in range(1, 201)]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_truncated_mean_identity(self):
        for k in (1, 2, 5, 17, 50):
            assert constants.guarantee_ptk(k) == pytest.approx(
                constants.poisson_truncated_mean(float(k), k) / k, abs=1e-12)

    def test_bad_k_rejected(self):
        with pytest.raises(ValueError):
            constants.guarantee_ptk(0)


class TestAlphaBeta:
    def test_closed_form_k1_tau_half(self):
        a, s_a = constants.alpha(1, 0.5)
        b, s_b = constants.beta(1, 0.5)
        assert s_a == pytest.approx(math.log(2), abs=1e-9)
        assert s_b == pytest.approx(math.log(2), abs=1e-9)
        assert a == pytest.approx(1 - math.log(2), abs=1e-9)
        assert a == pytest.approx(b, abs=1e-12)

    def test_alpha_equals_beta_below_half(self):
        for k in (1, 2, 7, 20, 50):
            for tau in (0.1, 0.3, 0.5):
                a, _ = constants.alpha(k, tau)
                b, _ = constants.beta(k, tau)
                assert abs(a - b) <= 1e-9

    def test_value_at_clamp_boundary(self):
        # k=1, tau at the threshold: the optimum sits at s = 1, where the
        # objective evaluates to 1 - e^{-1}/tau
        tau = 1 - 1 / math.e
        a, s_a = constants.alpha(1, tau)
        assert s_a == pytest.approx(1.0, abs=1e-9)
        assert a == pytest.approx(1 - math.exp(-1.0) / tau, abs=1e-9)

    def test_clamp_strictly_above_threshold(self):
        a, s_a = constants.alpha(1, 0.75)
        b, s_b = constants.beta(1, 0.75)
        assert s_a == 1.0
        assert s_b > 1.0 and b > a

    def test_alpha_never_exceeds_beta(self, rng):
        for _ in range(30):
            k = int(rng.integers(1, 30))
            tau = float(rng.uniform(0.02, 0.98))
            assert constants.alpha(k, tau)[0] <= constants.beta(k, tau)[0] + 1e-12

    def test_s_alpha_is_clamped_s_beta(self, rng):
        for _ in range(30):
            k = int(rng.integers(1, 30))
            tau = float(rng.uniform(0.02, 0.98))
            gc = constants.compute_constants(k, tau)
            assert gc.s_alpha == pytest.approx(min(gc.s_beta, 1.0), abs=1e-9)

    def test_matches_derivative_free_optimizer(self, rng):
        for _ in range(15):
            k = int(rng.integers(1, 12))
            tau = float(rng.uniform(0.05, 0.95))
            ref, _ = golden_section_max(
                lambda s: constants.sim_objective(s, k, tau), 0.0, 1.0)
            assert constants.alpha(k, tau)[0] == pytest.approx(ref, abs=1e-8)

    def test_objective_concavity(self, rng):
        for _ in range(40):
            k = int(rng.integers(1, 15))
            tau = float(rng.uniform(0.05, 0.95))
            s1, s2 = sorted(rng.uniform(0, 3, 2))
            mid = constants.sim_objective(0.5 * (s1 + s2), k, tau)
            avg = 0.5 * (constants.sim_objective(s1, k, tau)
                         + constants.sim_objective(s2, k, tau))
            assert mid >= avg - 1e-10

    def test_tau_bounds_enforced(self):
        with pytest.raises(ValueError):
            constants.alpha(1, 0.0)
        with pytest.raises(ValueError):
            constants.beta(1, 1.0)


class TestTightnessThreshold:
    def test_k1(self):
        assert constants.tightness_threshold(1) == pytest.approx(1 - 1 / math.e, abs=1e-12)

    def test_at_least_half(self):
        for k in range(1, 201):
            assert constants.tightness_threshold(k) >= 0.5

    def test_monotone_decreasing_to_half(self):
        vals = [constants.tightness_threshold(k) for k in range(1, 201)]
        assert all(b < a for a, b in zip(vals, vals[1:]))
        assert vals[-1] == pytest.approx(0.5, abs=0.02)

    def test_foc_consistency(self):
        # at tau exactly the threshold, the optimal beta level is s = 1
        for k in (1, 3, 10):
            tau = constants.tightness_threshold(k)
            _, s_b = constants.beta(k, tau)
            assert s_b == pytest.approx(1.0, abs=1e-6)
