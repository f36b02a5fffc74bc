import numpy as np
import pytest

from sspmsrk.methods import forward_euler, ssprk33
from sspmsrk.orderlab import (
    convergence_order,
    default_problems,
    oracle_order,
    order_residual_vector,
    stage_order,
    stage_residuals,
)
from sspmsrk.theory import gen_second_order


class TestStageResiduals:
    def test_first_residual_vanishes_by_construction(self):
        for m in [forward_euler(), ssprk33(), gen_second_order(3, 4)]:
            res = stage_residuals(m, 1)
            np.testing.assert_allclose(res.stage[1], 0.0, atol=1e-14)

    def test_forward_euler_final_tau2(self):
        res = stage_residuals(forward_euler(), 2)
        assert res.final[2] == pytest.approx(0.5)

    def test_ssprk33_final_residuals(self):
        res = stage_residuals(ssprk33(), 4)
        for j in (1, 2, 3):
            assert res.final[j] == pytest.approx(0.0, abs=1e-14)
        assert np.abs(res.stage[2]).max() > 1e-3  # stage order is only 1
        # the j=4 quadrature residual also vanishes (b.c^3 = 1/4), yet
        # the nonlinear order is 3: quadrature conditions are necessary only
        assert res.final[4] == pytest.approx(0.0, abs=1e-14)


class TestStageOrder:
    def test_forward_euler(self):
        assert stage_order(forward_euler()) == 1

    def test_ssprk33(self):
        assert stage_order(ssprk33()) == 1

    def test_gen_so2(self):
        assert stage_order(gen_second_order(4, 3)) >= 1

    def test_bad_tol_rejected(self):
        with pytest.raises(ValueError):
            stage_order(forward_euler(), tol=0.0)


class TestOracleOrder:
    def test_forward_euler(self):
        assert oracle_order(forward_euler(), pmax=3) == 1

    def test_ssprk33(self):
        assert oracle_order(ssprk33(), pmax=5) == 3

    def test_gen_so2_is_second_order_not_third(self):
        m = gen_second_order(2, 2)
        assert oracle_order(m, pmax=4) == 2

    def test_seed_independence(self):
        m = gen_second_order(3, 2)
        assert oracle_order(m, seed=1) == oracle_order(m, seed=987654321)

    def test_single_problem_rejected(self):
        with pytest.raises(ValueError):
            oracle_order(forward_euler(), nproblems=1)


@pytest.fixture(scope="module")
def problems():
    return default_problems(321, 2)


class TestOrderResidualVector:
    def test_ssprk33_satisfies_order_three(self, problems):
        r = order_residual_vector(ssprk33(), 3, problems)
        assert np.abs(r).max() <= 1e-12

    def test_ssprk33_fails_order_four(self, problems):
        r = order_residual_vector(ssprk33(), 4, problems)
        assert np.abs(r).max() > 1e-3

    def test_gen_so2_family_is_second_order(self, problems):
        r = order_residual_vector(gen_second_order(5, 4), 2, problems)
        assert np.abs(r).max() <= 1e-10


class TestConvergenceOrder:
    def test_exact_quadratic(self):
        dts = [0.1, 0.05, 0.025, 0.0125, 0.00625]
        errors = [(dt, 3.7 * dt**2) for dt in dts]
        assert convergence_order(errors) == pytest.approx(2.0, abs=1e-12)

    def test_cubic_with_noise(self):
        rng = np.random.default_rng(7)
        dts = np.array([0.1, 0.08, 0.05, 0.03, 0.02, 0.0125])
        errors = [(dt, 2.0 * dt**3 * (1.0 + 0.01 * rng.standard_normal())) for dt in dts]
        assert convergence_order(errors) == pytest.approx(3.0, abs=0.1)

    def test_too_few_points_rejected(self):
        with pytest.raises(ValueError):
            convergence_order([(0.1, 1e-3)])

    def test_nonpositive_error_rejected(self):
        with pytest.raises(ValueError):
            convergence_order([(0.1, 1.0), (0.05, 0.0), (0.025, 1.0), (0.0125, 1.0)])

    def test_nondecreasing_dt_rejected(self):
        with pytest.raises(ValueError):
            convergence_order([(0.1, 1.0), (0.1, 0.5), (0.05, 0.2), (0.025, 0.1)])


def test_stage_order_necessity_for_ssp_methods():
    # SSP methods of oracle order p need stage order >= floor((p-1)/2)
    for m in [ssprk33(), gen_second_order(2, 2), gen_second_order(6, 4)]:
        p = oracle_order(m, pmax=4)
        assert stage_order(m) >= (p - 1) // 2
