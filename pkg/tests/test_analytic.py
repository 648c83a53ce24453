import math

import numpy as np
import pytest

from cellselect import (
    BinaryMetricModel,
    GeometricLaw,
    MetricDistribution,
    binary_optimal_throughput,
    binary_phi,
    expected_period_duration,
    ordinary_value,
    solve_bisection,
    stopped_value_cdf,
    stopping_time_law,
)

from conftest import REF_P_GAMMA, assert_close, make_params


class TestExpectedPeriodDuration:
    def test_reference_value(self, params_ref):
        # 5 * eta(p) + theta with the closed-form admission probability
        assert_close(
            expected_period_duration(params_ref, REF_P_GAMMA, 5), 11.619938295761845
        )

    def test_linear_in_n(self, params_ref):
        e1 = expected_period_duration(params_ref, 0.5, 1)
        e4 = expected_period_duration(params_ref, 0.5, 4)
        assert_close(e4 - e1, 3 * params_ref.eta(0.5))

    def test_rejects_bad_args(self, params_ref):
        with pytest.raises(ValueError):
            expected_period_duration(params_ref, 0.5, 0)
        with pytest.raises(ValueError):
            expected_period_duration(params_ref, 1.2, 3)


class TestBinaryClosedForms:
    def test_reference_values(self):
        p = make_params(bandwidth_hz=1.0, snr_threshold=-math.inf)
        m = BinaryMetricModel(q=0.5, r_max=2.0)
        assert_close(binary_phi(p, m), 0.06387225548902196)
        assert_close(binary_optimal_throughput(p, m), 1.876172607879925)

    def test_overhead_identity(self):
        # lambda* = W * r_max * (t_data/theta) / (1 + phi) for any q
        p = make_params(bandwidth_hz=1.0, snr_threshold=-math.inf)
        for q in (0.05, 0.2, 0.5, 0.9, 1.0):
            m = BinaryMetricModel(q=q, r_max=2.0)
            lhs = binary_optimal_throughput(p, m)
            rhs = (
                p.bandwidth_hz * m.r_max * (p.t_data / p.theta) / (1.0 + binary_phi(p, m))
            )
            assert_close(lhs, rhs, rel=1e-12)

    def test_q_one_means_no_search(self):
        # every cell is acceptable: the only loss is the first scan plus overhead
        p = make_params(bandwidth_hz=1.0, snr_threshold=-math.inf)
        m = BinaryMetricModel(q=1.0, r_max=2.0)
        expected = p.t_data * m.r_max / (p.eta(1.0) + p.theta)
        assert_close(binary_optimal_throughput(p, m), expected)

    def test_validation(self):
        with pytest.raises(ValueError):
            BinaryMetricModel(q=0.0, r_max=2.0)
        with pytest.raises(ValueError):
            BinaryMetricModel(q=1.1, r_max=2.0)
        with pytest.raises(ValueError):
            BinaryMetricModel(q=0.5, r_max=0.0)


class TestStoppingTimeLaw:
    def test_geometric_algebra(self):
        law = GeometricLaw(0.3)
        assert_close(law.mean, 10.0 / 3.0)
        assert_close(law.pmf(1), 0.3)
        assert_close(law.pmf(3), 0.7 * 0.7 * 0.3)
        assert law.pmf(0) == 0.0
        assert_close(law.sf(2), 0.49)
        assert_close(np.sum(law.pmf(np.arange(1, 200))), 1.0, rel=1e-12)

    def test_from_threshold_mass(self):
        law = stopping_time_law(0.75)
        assert law.success_prob == 0.25
        assert law.mean == 4.0

    def test_rejects_never_stopping(self):
        with pytest.raises(ValueError):
            stopping_time_law(1.0)
        with pytest.raises(ValueError):
            stopping_time_law(-0.01)


class TestStoppedValueCdf:
    def test_conditional_atoms(self):
        d = MetricDistribution([1.0, 2.0, 3.0, 4.0], p_gamma=1.0)
        p = make_params()
        cdf = stopped_value_cdf(d, 2.5 / p.theta, p)
        assert np.array_equal(cdf.samples, [3.0, 4.0])
        assert cdf(2.9) == 0.0
        assert cdf(3.0) == 0.5
        assert cdf(3.9) == 0.5
        assert cdf(4.0) == 1.0
        assert cdf(9.0) == 1.0

    def test_weighted_matches_counting(self):
        d_counts = MetricDistribution([1.0, 2.0, 3.0, 4.0], p_gamma=1.0)
        d_weights = MetricDistribution.from_atoms(
            [1.0, 2.0, 3.0, 4.0], [0.25, 0.25, 0.25, 0.25]
        )
        p = make_params()
        a = stopped_value_cdf(d_counts, 2.5 / p.theta, p)
        b = stopped_value_cdf(d_weights, 2.5 / p.theta, p)
        x = np.linspace(0.0, 5.0, 101)
        assert np.allclose(a(x), b(x), atol=1e-12)
        assert b(10.0) == 1.0

    def test_threshold_above_support_rejected(self):
        d = MetricDistribution([1.0, 2.0], p_gamma=1.0)
        p = make_params()
        with pytest.raises(ValueError):
            stopped_value_cdf(d, 5.0 / p.theta, p)


class TestOrdinaryValue:
    def test_zero_at_the_optimum(self, dist_ref, params_ref):
        sol = solve_bisection(dist_ref, params_ref)
        v = ordinary_value(dist_ref, params_ref, sol.lambda_star)
        assert abs(v) < 1e-8 * sol.lambda_star * params_ref.theta

    def test_sign_and_monotonicity(self, dist_ref, params_ref):
        sol = solve_bisection(dist_ref, params_ref)
        lo = ordinary_value(dist_ref, params_ref, 0.5 * sol.lambda_star)
        hi = ordinary_value(dist_ref, params_ref, 2.0 * sol.lambda_star)
        assert lo > 0 > hi
        grid = np.linspace(0.2, 3.0, 12) * sol.lambda_star
        vals = [ordinary_value(dist_ref, params_ref, lam) for lam in grid]
        assert np.all(np.diff(vals) < 0)

    def test_limit_at_zero(self, dist_ref, params_ref):
        assert ordinary_value(dist_ref, params_ref, 0.0) == dist_ref.max_sample

    def test_interior_root_hand_value(self):
        # atoms {2, 5}: for small lam the root lies between the atoms where
        # E[(X - c)+] = (5 - c)/2, so c = 5 - 2*lam*eta
        d = MetricDistribution([2.0, 5.0], p_gamma=1.0)
        p = make_params(bandwidth_hz=1.0, snr_threshold=-math.inf)
        lam = 0.01
        expected = (5.0 - 2.0 * lam * p.eta(1.0)) - lam * p.theta
        assert_close(ordinary_value(d, p, lam), expected, rel=1e-9)

    def test_linear_branch_hand_value(self):
        # same atoms, large lam: the root drops below the support where
        # E[(X - c)+] = mean - c, solved without bisection
        d = MetricDistribution([2.0, 5.0], p_gamma=1.0)
        p = make_params(bandwidth_hz=1.0, snr_threshold=-math.inf)
        lam = 4.7  # lam*eta = 1.504 >= mean - min_sample
        expected = (3.5 - lam * p.eta(1.0)) - lam * p.theta
        assert_close(ordinary_value(d, p, lam), expected, rel=1e-12)

    def test_binary_hand_value(self):
        # two atoms {0, 20} with q = 1/2 at lam = lambda*/2: the root sits on
        # the linear stretch between the atoms, 0.5*(20 - c) = lam*eta
        d = MetricDistribution.from_atoms([0.0, 20.0], [0.5, 0.5])
        p = make_params(bandwidth_hz=1.0, snr_threshold=-math.inf)
        lam = 0.9380863039399625
        c = 20.0 - 2.0 * lam * p.eta(1.0)
        assert_close(ordinary_value(d, p, lam), c - lam * p.theta, rel=1e-9)

    def test_rejects_negative_rate(self, dist_ref, params_ref):
        with pytest.raises(ValueError):
            ordinary_value(dist_ref, params_ref, -1.0)
