import math

import numpy as np
import pytest

from cellselect import (
    CellObservation,
    MetricDistribution,
    RngStream,
    build_distribution,
    optimal_threshold,
    partial_expectation,
    residual,
    sample_reward_distribution,
    solve_bisection,
    solve_iterative,
)

from conftest import assert_close, make_params

# q=0.5, r_max=2 two-point model on the reference timing with W=1 Hz:
# lambda* = q*W*t_data*r_max / ((L-1/2)*t_syn + (t_sib-t_syn)/2 + q*theta)
#         = 10 / (0.3175 + 0.0025 + 5.01), hand arithmetic
BINARY_LAMBDA = 1.876172607879925
BINARY_MU = 1.879924953216  # lambda* * theta / (W * t_data)


def binary_dist(q=0.5, r_max=2.0, w=1.0, t_data=10.0):
    return MetricDistribution.from_atoms(
        [0.0, w * t_data * r_max], [1.0 - q, q], p_gamma=1.0
    )


@pytest.fixture
def hand_dist():
    # multiset {1, 1, 2, 5}: every tail quantity is a small fraction
    return MetricDistribution([1.0, 1.0, 2.0, 5.0], p_gamma=1.0)


class TestMetricDistribution:
    def test_exact_counting_queries(self, hand_dist):
        d = hand_dist
        assert d.mean() == 2.25
        assert d.cdf(1.0) == 0.5
        assert d.cdf_below(1.0) == 0.0
        assert d.cdf(2.0) == 0.75
        assert d.cdf_below(2.0) == 0.5
        assert d.tail_prob(2.0) == 0.5
        assert d.tail_prob(5.0) == 0.25
        assert d.tail_prob(5.1) == 0.0
        assert d.cdf(0.0) == 0.0
        assert d.tail_prob(0.0) == 1.0
        assert d.min_sample == 1.0 and d.max_sample == 5.0

    def test_array_queries(self, hand_dist):
        x = np.array([0.5, 1.0, 3.0, 6.0])
        assert np.array_equal(hand_dist.cdf(x), [0.0, 0.5, 0.75, 1.0])
        assert np.array_equal(hand_dist.cdf_below(x), [0.0, 0.0, 0.75, 1.0])

    def test_weighted_atoms(self):
        d = MetricDistribution.from_atoms([5.0, 0.0, 2.0], [0.2, 0.5, 0.3])
        assert_close(d.mean(), 1.6)
        assert_close(d.cdf(2.0), 0.8)
        assert_close(d.tail_prob(2.0), 0.5)
        assert_close(d.cdf_below(2.0), 0.5)
        assert_close(partial_expectation(d, 3.0), 0.2 * 5.0)

    def test_validation(self):
        with pytest.raises(ValueError):
            MetricDistribution([3.0, 1.0], p_gamma=1.0)  # not sorted
        with pytest.raises(ValueError):
            MetricDistribution([-1.0, 2.0], p_gamma=1.0)
        with pytest.raises(ValueError):
            MetricDistribution([], p_gamma=1.0)
        with pytest.raises(ValueError):
            MetricDistribution([1.0], p_gamma=1.5)
        with pytest.raises(ValueError):
            MetricDistribution.from_atoms([1.0, 2.0], [0.6, 0.6])  # sums to 1.2
        # a 1e-10 normalization slip is renormalized, not rejected
        MetricDistribution.from_atoms([1.0, 2.0], [0.5, 0.5 + 1e-10])

    def test_samples_are_frozen(self, hand_dist):
        with pytest.raises(ValueError):
            hand_dist.samples[0] = 99.0


class TestPartialExpectation:
    def test_hand_values(self, hand_dist):
        # tail means over the empirical measure: (1/n) * sum of x_i >= a
        assert partial_expectation(hand_dist, 0.0) == 2.25
        assert partial_expectation(hand_dist, 1.5) == 1.75
        assert partial_expectation(hand_dist, 2.0) == 1.75
        assert partial_expectation(hand_dist, 2.1) == 1.25
        assert partial_expectation(hand_dist, 5.0) == 1.25
        assert partial_expectation(hand_dist, 5.1) == 0.0
        assert partial_expectation(hand_dist, 7.0) == 0.0

    def test_rejects_negative_cut(self, hand_dist):
        with pytest.raises(ValueError):
            partial_expectation(hand_dist, -1.0)

    def test_partition_identity(self, dist_ref):
        # the mass below a plus the tail mean reassemble the full mean
        for a in (0.0, 1e9, 5e9, 2e10):
            below = dist_ref.samples[dist_ref.samples < a]
            assert_close(
                partial_expectation(dist_ref, a) + below.sum() / dist_ref.n,
                dist_ref.mean(),
                rel=1e-9,
            )

    def test_nonincreasing(self, dist_ref):
        grid = np.linspace(0.0, dist_ref.max_sample * 1.1, 50)
        vals = np.array([partial_expectation(dist_ref, a) for a in grid])
        assert np.all(np.diff(vals) <= 0)
        assert vals[0] == dist_ref.mean()
        assert vals[-1] == 0.0


class TestBinarySolve:
    def test_matches_hand_value(self):
        p = make_params(bandwidth_hz=1.0, snr_threshold=-math.inf)
        sol = solve_bisection(binary_dist(), p)
        assert_close(sol.lambda_star, BINARY_LAMBDA, rel=1e-9)
        assert_close(sol.mu, BINARY_MU, rel=1e-9)
        assert sol.reward_threshold == sol.mu * p.bandwidth_hz * p.t_data
        assert optimal_threshold(sol, p) == sol.mu
        assert abs(residual(binary_dist(), p, sol.lambda_star)) < 1e-9

    def test_iterative_agrees(self):
        p = make_params(bandwidth_hz=1.0, snr_threshold=-math.inf)
        sol = solve_iterative(binary_dist(), p)
        assert_close(sol.lambda_star, BINARY_LAMBDA, rel=1e-7)

    def test_trace_endpoints(self):
        p = make_params(bandwidth_hz=1.0, snr_threshold=-math.inf)
        sol = solve_bisection(binary_dist(), p)
        # the returned root is the midpoint of the final bracket, one
        # halving past the last probe in the trace
        assert abs(sol.trace[-1][1] - sol.lambda_star) <= 1e-9 * sol.lambda_star
        assert sol.trace[0][0] == 1
        it = solve_iterative(binary_dist(), p, lambda0=0.001)
        assert it.trace[0] == (0, 0.001)
        assert it.trace[-1][1] == it.lambda_star


class TestIterativeSolver:
    def test_monotone_from_first_step(self, dist_ref, params_ref):
        sol = solve_iterative(dist_ref, params_ref)
        lams = [lam for _, lam in sol.trace[1:]]
        assert np.all(np.diff(lams) >= 0)

    def test_start_above_comes_back(self, dist_ref, params_ref):
        ref = solve_bisection(dist_ref, params_ref)
        sol = solve_iterative(dist_ref, params_ref, lambda0=5.0 * ref.lambda_star)
        assert_close(sol.lambda_star, ref.lambda_star, rel=1e-6)
        lams = [lam for _, lam in sol.trace[1:]]
        assert np.all(np.diff(lams) >= 0)
        assert max(lams) <= ref.lambda_star * (1 + 1e-8)

    def test_rejects_bad_start(self, dist_ref, params_ref):
        with pytest.raises(ValueError):
            solve_iterative(dist_ref, params_ref, lambda0=0.0)

    def test_max_iter_is_loud(self, dist_ref, params_ref):
        with pytest.raises(RuntimeError):
            solve_iterative(dist_ref, params_ref, rel_tol=1e-16, max_iter=3)


class TestSampledSolve:
    def test_cross_solver_agreement(self, dist_ref, params_ref):
        bis = solve_bisection(dist_ref, params_ref)
        itr = solve_iterative(dist_ref, params_ref)
        assert abs(bis.lambda_star - itr.lambda_star) / bis.lambda_star < 1e-6
        # residual at the solution is tiny against the mean reward scale
        assert abs(bis.residual) < 1e-6 * dist_ref.mean()

    def test_residual_sign_change(self, dist_ref, params_ref):
        bis = solve_bisection(dist_ref, params_ref)
        assert residual(dist_ref, params_ref, 0.5 * bis.lambda_star) > 0
        assert residual(dist_ref, params_ref, 2.0 * bis.lambda_star) < 0

    def test_sampling_is_reproducible(self, params_ref, channel_ref, load_ref):
        d1 = sample_reward_distribution(
            params_ref, channel_ref, load_ref, RngStream(5).generator(1), 10_000
        )
        d2 = sample_reward_distribution(
            params_ref, channel_ref, load_ref, RngStream(5).generator(1), 10_000
        )
        assert np.array_equal(d1.samples, d2.samples)
        assert d1.p_gamma == d2.p_gamma

    def test_zero_mean_rejected(self, params_ref):
        dead = MetricDistribution([0.0, 0.0], p_gamma=0.0)
        with pytest.raises(ValueError):
            solve_bisection(dead, params_ref)


class TestBuildDistribution:
    def test_from_observations(self):
        obs = [
            CellObservation(snr=5.0, beta=0.5, metric=1.29, admitted=True, reward_bits=10.0),
            CellObservation(snr=0.01, beta=None, metric=0.0, admitted=False, reward_bits=0.0),
            CellObservation(snr=9.0, beta=1.0, metric=3.32, admitted=True, reward_bits=30.0),
        ]
        d = build_distribution(obs)
        assert np.array_equal(d.samples, [0.0, 10.0, 30.0])
        assert_close(d.p_gamma, 2.0 / 3.0)
        assert_close(d.mean(), 40.0 / 3.0)

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            build_distribution([])
