import math

import numpy as np
import pytest

from cyclestab.gains import (ControlGains, a_to_eps, a_to_gamma, eps_to_a,
                             min_horizon, optimal_gains)


class TestOptimalGains:
    def test_depth3_matches_published_strengths(self):
        g = optimal_gains(3)
        assert g.a == (5 / 9, 3 / 9, 1 / 9)
        assert g.eps == (4 / 9, 1 / 9)

    def test_depth1_is_no_control(self):
        g = optimal_gains(1)
        assert g.a == (1.0,)
        assert g.eps == ()

    def test_depth2(self):
        g = optimal_gains(2)
        assert g.a == (3 / 4, 1 / 4)
        assert g.eps == (1 / 4,)

    def test_closed_forms_for_all_small_depths(self):
        for n in range(1, 51):
            g = optimal_gains(n)
            for j in range(1, n + 1):
                assert g.a[j - 1] == (2 * (n - j) + 1) / n ** 2
            for j in range(1, n):
                assert g.eps[j - 1] == (n - j) ** 2 / n ** 2

    def test_normalized_and_strictly_decreasing(self):
        for n in range(1, 51):
            g = optimal_gains(n)
            assert abs(math.fsum(g.a) - 1.0) <= 1e-12
            assert all(x > y for x, y in zip(g.a, g.a[1:]))

    def test_strengths_in_unit_interval(self):
        for n in range(2, 20):
            g = optimal_gains(n)
            assert all(0.0 < e < 1.0 for e in g.eps)
            assert g.admissible

    def test_invalid_depth(self):
        with pytest.raises(ValueError):
            optimal_gains(0)
        with pytest.raises(ValueError):
            optimal_gains(-3)


class TestConversions:
    def test_eps_to_a_quarter(self):
        g = eps_to_a([0.25])
        assert g.a == (0.75, 0.25)

    def test_eps_to_a_empty(self):
        g = eps_to_a([])
        assert g.a == (1.0,)

    def test_eps_to_a_published(self):
        g = eps_to_a([4 / 9, 1 / 9])
        assert g.a == pytest.approx((5 / 9, 3 / 9, 1 / 9), abs=1e-15)

    def test_inadmissible_is_flagged_not_rejected(self):
        g = eps_to_a([1.5])
        assert not g.admissible
        assert g.a == (-0.5, 1.5)

    def test_a_to_eps_published(self):
        g = a_to_eps([5 / 9, 3 / 9, 1 / 9])
        assert g.eps == pytest.approx((4 / 9, 1 / 9), abs=1e-15)

    def test_a_to_eps_single(self):
        assert a_to_eps([1.0]).eps == ()

    def test_a_to_eps_partial_sum(self):
        assert a_to_eps([0.6, 0.4]).eps == (0.4,)

    def test_a_to_eps_rejects_unnormalized(self):
        with pytest.raises(ValueError, match="1.2"):
            a_to_eps([0.6, 0.6])

    def test_round_trip_exact_on_dyadic_strengths(self):
        # values on a 2^-10 grid: every sum/difference in the bijection is
        # exact in binary floating point, so the round trip is bit-exact
        rng = np.random.default_rng(42)
        for _ in range(200):
            n = int(rng.integers(1, 9))
            eps = tuple(int(k) / 1024.0 for k in rng.integers(-1023, 1024, size=n - 1))
            g = eps_to_a(eps)
            assert a_to_eps(g.a).eps == eps
            ga = a_to_eps(g.a)
            assert eps_to_a(ga.eps).a == ga.a

    def test_round_trip_close_on_general_floats(self):
        rng = np.random.default_rng(43)
        for _ in range(200):
            n = int(rng.integers(2, 9))
            eps = tuple(rng.uniform(-0.99, 0.99, size=n - 1))
            back = a_to_eps(eps_to_a(eps).a).eps
            assert back == pytest.approx(eps, abs=1e-14)

    def test_bijection_mismatch_rejected(self):
        with pytest.raises(ValueError):
            ControlGains(a=(0.75, 0.25), eps=(0.9,))


class TestMinHorizon:
    def test_published_example(self):
        plan = min_horizon(4.0)
        assert (plan.N0, plan.N_star) == (3, 4)
        assert plan.control_required

    def test_small_excess(self):
        plan = min_horizon(1.2)
        assert (plan.N0, plan.N_star) == (2, 2)

    def test_between_squares(self):
        plan = min_horizon(8.9)
        assert (plan.N0, plan.N_star) == (3, 4)

    def test_perfect_square_is_strict(self):
        assert min_horizon(9.0).N0 == 4
        assert min_horizon(1.0000000001).N0 == 2

    def test_no_control_needed(self):
        plan = min_horizon(0.8)
        assert (plan.N0, plan.N_star) == (1, 0)
        assert not plan.control_required

    def test_invalid_magnitude(self):
        with pytest.raises(ValueError):
            min_horizon(0.0)
        with pytest.raises(ValueError):
            min_horizon(-2.0)


class TestGamma:
    def test_depth2(self):
        assert a_to_gamma([3 / 4, 1 / 4]) == (0.5, 0.25)

    def test_depth1(self):
        assert a_to_gamma([1.0]) == (1.0,)

    def test_depth3(self):
        g = a_to_gamma([5 / 9, 3 / 9, 1 / 9])
        assert g == pytest.approx((1 / 3, 2 / 9, 1 / 9), abs=1e-15)

    def test_identity_over_random_normalized_weights(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            n = int(rng.integers(1, 10))
            raw = rng.uniform(-1.0, 2.0, size=n)
            a = raw / raw.sum()
            gamma = a_to_gamma(a)
            total = gamma[0] + 2.0 * math.fsum(gamma[1:])
            assert abs(total - math.fsum(a)) <= 1e-12

    def test_optimal_weights_give_leading_gamma_one_over_n(self):
        # exact at the rational level; float rounding leaves at most ~1 ulp
        for n in range(1, 51):
            gamma = a_to_gamma(optimal_gains(n).a)
            assert abs(gamma[0] - 1.0 / n) <= 1e-15
