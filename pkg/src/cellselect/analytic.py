"""Closed-form results for the search-and-connect model.

Covers the expected duration of a period with a forced number of cell
examinations, the exact optimum for a two-level (binary) metric, the
distribution of the stopping time and of the stopped reward under the
optimal threshold policy, and the value function of the auxiliary
ordinary stopping problem whose root characterizes the maximum
throughput.  Everything here is an independent check on the solver and
the simulator; nothing in this module draws random numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import SystemParams
from .solver import MetricDistribution

__all__ = [
    "BinaryMetricModel",
    "GeometricLaw",
    "StoppedValueCdf",
    "expected_period_duration",
    "binary_phi",
    "binary_optimal_throughput",
    "stopping_time_law",
    "stopped_value_cdf",
    "ordinary_value",
]


@dataclass(frozen=True)
class BinaryMetricModel:
    """Two-level selection metric: r_max with probability q, else 0."""

    q: float
    r_max: float

    def __post_init__(self):
        if not 0.0 < self.q <= 1.0:
            raise ValueError(f"q must be in (0, 1], got {self.q}")
        if not self.r_max > 0:
            raise ValueError(f"r_max must be positive, got {self.r_max}")


def expected_period_duration(params: SystemParams, p_gamma: float, n: int) -> float:
    """Expected duration of a period that examines exactly n cells.

    Each cell costs half a sync period of waiting plus a full beam scan
    on average; admitted cells (probability p_gamma) also wait half the
    broadcast-period spread for system information.  The final connect
    adds t_ra + t_data.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    return n * params.eta(p_gamma) + params.theta


def binary_phi(params: SystemParams, model: BinaryMetricModel) -> float:
    """Search-overhead-to-connect-time ratio for the binary metric.

    phi = ((beam_pairs - 1/2) * t_syn + (t_sib - t_syn)/2) / (q * theta);
    small phi means searching is cheap relative to a data session.
    """
    overhead = (params.beam_pairs - 0.5) * params.t_syn + 0.5 * (params.t_sib - params.t_syn)
    return overhead / (model.q * params.theta)


def binary_optimal_throughput(params: SystemParams, model: BinaryMetricModel) -> float:
    """Exact maximum throughput for the binary metric, every cell admitted.

    q * W * t_data * r_max / (per-cell overhead + q * theta); equivalently
    W * r_max * (t_data/theta) / (1 + phi).
    """
    overhead = (params.beam_pairs - 0.5) * params.t_syn + 0.5 * (params.t_sib - params.t_syn)
    num = model.q * params.bandwidth_hz * params.t_data * model.r_max
    return num / (overhead + model.q * params.theta)


@dataclass(frozen=True)
class GeometricLaw:
    """Geometric distribution on {1, 2, ...} with success probability p."""

    success_prob: float

    def __post_init__(self):
        if not 0.0 < self.success_prob <= 1.0:
            raise ValueError(f"success_prob must be in (0, 1], got {self.success_prob}")

    @property
    def mean(self) -> float:
        return 1.0 / self.success_prob

    def pmf(self, n):
        """P(N = n); zero for n < 1.  Accepts scalars or integer arrays."""
        n = np.asarray(n)
        p = self.success_prob
        out = np.where(n >= 1, p * (1.0 - p) ** np.maximum(n - 1, 0), 0.0)
        return float(out) if out.ndim == 0 else out

    def sf(self, n):
        """P(N > n) = (1-p)^n for n >= 0."""
        n = np.asarray(n)
        out = np.where(n >= 0, (1.0 - self.success_prob) ** np.maximum(n, 0), 1.0)
        return float(out) if out.ndim == 0 else out


def stopping_time_law(f_at_threshold: float) -> GeometricLaw:
    """Law of the number of cells searched by the optimal threshold policy.

    f_at_threshold is the reward-distribution mass strictly below the
    connection threshold, so each cell independently ends the search with
    probability 1 - f_at_threshold.  f_at_threshold = 1 means the policy
    never stops and is rejected.
    """
    if not 0.0 <= f_at_threshold <= 1.0:
        raise ValueError(f"f_at_threshold must be in [0, 1], got {f_at_threshold}")
    if f_at_threshold == 1.0:
        raise ValueError("threshold sits above the reward support: stopping never occurs")
    return GeometricLaw(1.0 - f_at_threshold)


class StoppedValueCdf:
    """Conditional CDF of the reward accepted by the threshold policy.

    The policy connects to the first cell whose reward reaches the
    threshold rho, so the accepted reward is the base distribution
    conditioned on X >= rho: zero below rho, and
    (F(x) - F(rho-)) / (1 - F(rho-)) above, with the strictly-below mass
    convention making the conditioning exact on atoms.

    Calling the object evaluates the CDF (scalars or arrays); ``samples``
    exposes the conditional support atoms for two-sample comparisons
    against simulated rewards.
    """

    def __init__(self, dist: MetricDistribution, reward_threshold: float):
        tail = dist.tail_prob(reward_threshold)
        if tail <= 0.0:
            raise ValueError("threshold sits above the reward support: stopping never occurs")
        self._dist = dist
        self.reward_threshold = float(reward_threshold)
        self._cut = int(np.searchsorted(dist.samples, reward_threshold, side="left"))

    @property
    def samples(self) -> np.ndarray:
        """Atoms of the conditional distribution (those >= the threshold)."""
        return self._dist.samples[self._cut :]

    def __call__(self, x):
        d = self._dist
        idx = np.searchsorted(d.samples, x, side="right")
        if d.weights is None:
            # integer-count arithmetic keeps the top end exactly 1
            out = np.maximum(idx - self._cut, 0) / (d.n - self._cut)
        else:
            below = d._prefix_w[self._cut]
            tail = d._suffix_w[self._cut]
            # prefix and suffix sums are accumulated separately, so guard
            # the top end against a last-ulp overshoot
            out = np.clip(np.maximum(d._prefix_w[idx] - below, 0.0) / tail, 0.0, 1.0)
        return float(out) if np.ndim(x) == 0 else out


def stopped_value_cdf(
    dist: MetricDistribution, lambda_star: float, params: SystemParams
) -> StoppedValueCdf:
    """Distribution function of the reward the optimal policy accepts."""
    if lambda_star < 0:
        raise ValueError("lambda_star must be nonnegative")
    return StoppedValueCdf(dist, lambda_star * params.theta)


def ordinary_value(
    dist: MetricDistribution,
    params: SystemParams,
    lam: float,
    p_gamma: float | None = None,
) -> float:
    """Value V(lam) of the auxiliary ordinary stopping problem, in bits.

    V solves E[(X - lam*theta - V)+] = lam * eta.  The left side is
    continuous and strictly decreasing in V, so bisection on
    c = lam*theta + V is safe; the search runs to float resolution
    (well past 1e-12 relative).  V(lambda_star) = 0, V > 0 below the
    optimum and V < 0 above it, which makes this an independent
    consistency check on the solvers.

    p_gamma defaults to the distribution's own admission probability.
    At lam = 0 the equation degenerates; the supremum of the support is
    returned as the limiting value.
    """
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    if p_gamma is None:
        p_gamma = dist.p_gamma
    if lam == 0.0:
        return dist.max_sample
    target = lam * params.eta(p_gamma)

    def excess(c: float) -> float:
        # E[(X - c)+], linear below the support and 0 above it
        return dist._tail_mean(c) - c * dist.tail_prob(c)

    # below the support the excess is mean - c, so the root is explicit
    c0 = dist.mean() - target
    if c0 <= dist.min_sample:
        return c0 - lam * params.theta
    lo, hi = dist.min_sample, dist.max_sample
    while True:
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if excess(mid) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi) - lam * params.theta
