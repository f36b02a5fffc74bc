import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sspmsrk.methods import forward_euler, ssp_coefficient, ssprk33, to_spijker
from sspmsrk.theory import (
    gen_second_order,
    linear_order,
    optimal_gamma_sk2,
    r_sk2,
    radius_abs_monotonicity,
    second_order_gamma_residuals,
    shifted_basis,
    stability_polynomials,
    threshold_factor,
)

from conftest import random_valid_method


class TestStabilityPolynomials:
    def test_forward_euler(self):
        sp = stability_polynomials(to_spijker(forward_euler()))
        assert len(sp.psi) == 1
        np.testing.assert_allclose(sp.psi[0], [1.0, 1.0])

    def test_ssprk33_is_truncated_exponential(self):
        sp = stability_polynomials(to_spijker(ssprk33()))
        np.testing.assert_allclose(sp.psi[0], [1.0, 1.0, 0.5, 1.0 / 6.0])

    def test_consistency_at_zero(self, rng):
        # psi_i(0) must reproduce the theta weights
        m = random_valid_method(rng, 3, 3)
        sp = stability_polynomials(to_spijker(m))
        values = [psi[0] for psi in sp.psi]
        np.testing.assert_allclose(values, m.theta[::-1], atol=1e-14)

    def test_gen_so2_two_step(self):
        m = gen_second_order(2, 2)
        sp = stability_polynomials(to_spijker(m))
        # psi_1 + psi_2 evaluated at z = 0 must be 1 (consistency)
        assert sp.psi[0][0] + sp.psi[1][0] == pytest.approx(1.0)


class TestShiftedBasis:
    def test_identity_polynomial(self):
        # z = r*(t - 1) so the expansion of z in t is (-r, r)
        np.testing.assert_allclose(shifted_basis(np.array([0.0, 1.0]), 2.0), [-2.0, 2.0])

    def test_binomial(self):
        # (1 + z)^2 at r = 1 is exactly t^2
        np.testing.assert_allclose(shifted_basis(np.array([1.0, 2.0, 1.0]), 1.0), [0.0, 0.0, 1.0])

    def test_round_trip_evaluation(self, rng):
        psi = rng.standard_normal(5)
        r = 1.7
        gamma = shifted_basis(psi, r)
        for z in [-1.3, 0.0, 0.4]:
            t = 1.0 + z / r
            direct = np.polyval(psi[::-1], z)
            shifted = np.polyval(gamma[::-1], t)
            assert shifted == pytest.approx(direct, rel=1e-12, abs=1e-12)

    def test_nonpositive_r_rejected(self):
        with pytest.raises(ValueError):
            shifted_basis(np.array([1.0, 1.0]), 0.0)


class TestRadiusAbsMonotonicity:
    def test_linear(self):
        # 1 + z is absolutely monotonic up to r = 1
        assert radius_abs_monotonicity(np.array([1.0, 1.0])) == pytest.approx(1.0, abs=1e-9)

    def test_truncated_exponential_degree_three(self):
        psi = np.array([1.0, 1.0, 0.5, 1.0 / 6.0])
        assert radius_abs_monotonicity(psi) == pytest.approx(1.0, abs=1e-9)

    def test_nonnegative_constant_is_infinite(self):
        assert radius_abs_monotonicity(np.array([0.5])) == math.inf

    def test_negative_coefficient_at_origin(self):
        assert radius_abs_monotonicity(np.array([1.0, -1.0])) == 0.0

    def test_zero_polynomial_rejected(self):
        with pytest.raises(ValueError):
            radius_abs_monotonicity(np.zeros(3))

    def test_scaled_linear_exceeds_default_bracket(self):
        # 1 + z/20 has radius 20, beyond the initial bracket of 2*deg+2
        assert radius_abs_monotonicity(np.array([1.0, 0.05])) == pytest.approx(20.0, abs=1e-8)


class TestThresholdFactor:
    def test_forward_euler(self):
        sp = stability_polynomials(to_spijker(forward_euler()))
        assert threshold_factor(sp) == pytest.approx(1.0, abs=1e-9)

    def test_bounds_ssp_coefficient(self):
        # C <= threshold factor for every method (linear problems are a subset)
        for m in [forward_euler(), ssprk33(), gen_second_order(2, 2),
                  gen_second_order(4, 3), gen_second_order(6, 5)]:
            sp = to_spijker(m)
            C = ssp_coefficient(sp)
            assert C <= threshold_factor(stability_polynomials(sp)) + 1e-8

    def test_gen_so2_attains_optimum(self):
        for s, k in [(2, 2), (3, 2), (5, 3), (8, 5)]:
            sp = stability_polynomials(to_spijker(gen_second_order(s, k)))
            assert threshold_factor(sp) == pytest.approx(r_sk2(s, k), abs=1e-8)


class TestLinearOrder:
    def test_forward_euler(self):
        assert linear_order(stability_polynomials(to_spijker(forward_euler()))) == 1

    def test_ssprk33(self):
        assert linear_order(stability_polynomials(to_spijker(ssprk33()))) == 3

    def test_gen_so2(self):
        assert linear_order(stability_polynomials(to_spijker(gen_second_order(3, 3)))) == 2


class TestRsk2:
    # values published to five decimals for the optimal second-order
    # effective coefficient r_sk2(s, k) / s
    TABLE = {
        (2, 2): 0.70711, (3, 2): 0.81650, (4, 2): 0.86603,
        (5, 2): 0.89443, (6, 2): 0.91287, (8, 2): 0.93541,
        (2, 3): 0.80902, (4, 3): 0.91144, (8, 3): 0.95711,
        (2, 4): 0.86038, (5, 4): 0.94797, (8, 4): 0.96798,
        (2, 5): 0.89039, (6, 5): 0.96573, (8, 5): 0.97448,
    }

    def test_table_values(self):
        for (s, k), target in self.TABLE.items():
            assert r_sk2(s, k) / s == pytest.approx(target, abs=5e-6)

    def test_two_two(self):
        assert r_sk2(2, 2) == pytest.approx(math.sqrt(2.0), rel=1e-14)

    def test_monotone_in_s_and_k(self):
        for s in range(2, 9):
            for k in range(2, 6):
                assert r_sk2(s + 1, k) > r_sk2(s, k)
                assert r_sk2(s, k + 1) > r_sk2(s, k)

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            r_sk2(0, 2)
        with pytest.raises(ValueError):
            r_sk2(3, 1)


class TestOptimalGamma:
    @settings(max_examples=30, deadline=None)
    @given(st.integers(min_value=2, max_value=10), st.integers(min_value=2, max_value=6))
    def test_order_conditions_hold(self, s, k):
        res = second_order_gamma_residuals(optimal_gamma_sk2(s, k))
        assert np.abs(res).max() < 1e-10

    def test_weights_form_convex_combination(self):
        exp = optimal_gamma_sk2(4, 3)
        assert exp.gamma.min() >= 0.0
        assert exp.gamma.sum() == pytest.approx(1.0)


class TestGenSecondOrder:
    def test_ssp_coefficient_matches_r_sk2(self):
        for s, k in [(2, 2), (3, 2), (4, 4), (8, 5)]:
            C = ssp_coefficient(to_spijker(gen_second_order(s, k)))
            assert C == pytest.approx(r_sk2(s, k), abs=1e-8)

    def test_small_sizes_rejected(self):
        with pytest.raises(ValueError):
            gen_second_order(1, 2)
        with pytest.raises(ValueError):
            gen_second_order(2, 1)
