"""Domain types and stochastic samplers for the cell-search model.

A user terminal searches candidate cells one at a time.  Examining a cell
costs a synchronization wait plus a full beam scan; cells whose SNR clears
the admission threshold additionally cost a system-information read.  Each
admitted cell advertises a load factor beta = 1/(active UEs + 1), and the
terminal ranks cells by the load-weighted spectral efficiency
beta * log2(1 + SNR).  Connecting ends the search and buys a fixed-length
data session.

This module holds the parameter containers, the per-quantity samplers, and
the seeded-stream plumbing that the solver and simulator build on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SystemParams",
    "ChannelModel",
    "LoadModel",
    "CellObservation",
    "RngStream",
    "admission_probability",
    "sample_snr",
    "sample_beta",
    "selection_metric",
    "observe_cell",
    "sample_sync_delay",
    "sample_sib_delay",
]


@dataclass(frozen=True)
class SystemParams:
    """Timing and radio constants of the search-and-connect cycle.

    Attributes
    ----------
    t_syn : float
        Synchronization signal period in seconds.
    t_sib : float
        System information broadcast period in seconds.  Must be an
        integer multiple of ``t_syn``.
    t_ra : float
        Random access (connection handshake) duration in seconds.
    t_data : float
        Data session duration in seconds.
    beam_pairs : int
        Number of transmit-receive beam pairs swept per cell; one full
        scan costs ``beam_pairs * t_syn`` seconds.
    bandwidth_hz : float
        Channel bandwidth in Hz.
    snr_threshold : float
        Linear SNR admission threshold.  ``-inf`` disables admission
        filtering; ``+inf`` rejects every cell.
    """

    t_syn: float
    t_sib: float
    t_ra: float
    t_data: float
    beam_pairs: int
    bandwidth_hz: float
    snr_threshold: float

    def __post_init__(self):
        if not self.t_syn > 0:
            raise ValueError(f"t_syn must be positive, got {self.t_syn}")
        if self.t_sib < self.t_syn:
            raise ValueError("t_sib must be >= t_syn")
        ratio = self.t_sib / self.t_syn
        if abs(ratio - round(ratio)) > 1e-9 * ratio:
            raise ValueError(
                f"t_sib/t_syn must be an integer, got {ratio!r}"
            )
        if self.t_ra < 0:
            raise ValueError("t_ra must be nonnegative")
        if not self.t_data > 0:
            raise ValueError("t_data must be positive")
        if not (isinstance(self.beam_pairs, (int, np.integer)) and self.beam_pairs >= 1):
            raise ValueError("beam_pairs must be a positive integer")
        if not self.bandwidth_hz > 0:
            raise ValueError("bandwidth_hz must be positive")
        if math.isnan(self.snr_threshold):
            raise ValueError("snr_threshold must not be NaN")

    @property
    def sib_slots(self) -> int:
        """Number of sync periods per broadcast period, t_sib/t_syn."""
        return round(self.t_sib / self.t_syn)

    @property
    def theta(self) -> float:
        """Connect-and-transmit time t_ra + t_data in seconds."""
        return self.t_ra + self.t_data

    def eta(self, p_gamma: float) -> float:
        """Mean per-cell search overhead in seconds.

        Equals (beam_pairs - 1/2) * t_syn plus half the broadcast-wait
        spread, weighted by the admission probability ``p_gamma`` (only
        admitted cells pay the system-information wait).
        """
        if not 0.0 <= p_gamma <= 1.0:
            raise ValueError(f"p_gamma must be in [0, 1], got {p_gamma}")
        return (self.beam_pairs - 0.5) * self.t_syn + 0.5 * (self.t_sib - self.t_syn) * p_gamma


@dataclass(frozen=True)
class ChannelModel:
    """Log-normal shadowing on top of a beamformed average SNR.

    A cell's SNR is g * beam_pairs * snr_avg where 10*log10(g) is a
    zero-mean normal draw with standard deviation ``shadow_sigma_db``
    (so g has median 1).
    """

    snr_avg: float
    shadow_sigma_db: float

    def __post_init__(self):
        if not self.snr_avg > 0:
            raise ValueError("snr_avg must be positive (linear ratio)")
        if self.shadow_sigma_db < 0:
            raise ValueError("shadow_sigma_db must be nonnegative")


@dataclass(frozen=True)
class LoadModel:
    """Per-cell active-UE count distribution; beta = 1/(count + 1).

    ``count_distribution`` selects the sampling strategy:
      * "poisson" - Poisson with the configured mean (default)
      * "fixed"   - deterministic count equal to the mean (must be an integer)
    """

    mean_active_ues: float
    count_distribution: str = "poisson"

    def __post_init__(self):
        if self.mean_active_ues < 0:
            raise ValueError("mean_active_ues must be nonnegative")
        if self.count_distribution not in ("poisson", "fixed"):
            raise ValueError(
                f"count_distribution must be 'poisson' or 'fixed', got {self.count_distribution!r}"
            )
        if self.count_distribution == "fixed" and self.mean_active_ues != int(self.mean_active_ues):
            raise ValueError("fixed count_distribution requires an integer mean_active_ues")


@dataclass(frozen=True)
class CellObservation:
    """One examined cell.

    ``beta`` is None when the cell was not admitted: the load factor is
    broadcast in system information, which is read only after the SNR
    clears the threshold.  Inadmissible cells carry zero metric/reward.
    """

    snr: float
    beta: float | None
    metric: float
    admitted: bool
    reward_bits: float


@dataclass
class RngStream:
    """Named, reproducible random stream.

    The same (seed, stream_id) pair always reproduces the same draw
    sequence; distinct stream_ids give statistically independent
    streams.  ``generator(*subkeys)`` derives a fresh independent
    generator keyed by the extra integers, which is how the simulator
    assigns one substream per period.
    """

    seed: int
    stream_id: int = 0
    _gen: np.random.Generator | None = field(
        default=None, init=False, repr=False, compare=False
    )

    @property
    def gen(self) -> np.random.Generator:
        """The stream's own stateful generator (created lazily)."""
        if self._gen is None:
            self._gen = np.random.default_rng((self.seed, self.stream_id))
        return self._gen

    def generator(self, *subkeys: int) -> np.random.Generator:
        """Fresh generator seeded by (seed, stream_id, *subkeys)."""
        return np.random.default_rng((self.seed, self.stream_id, *subkeys))


def _as_generator(rng) -> np.random.Generator:
    # accept either an RngStream or a raw numpy Generator
    if isinstance(rng, RngStream):
        return rng.gen
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"rng must be RngStream or numpy Generator, got {type(rng).__name__}")


def admission_probability(channel: ChannelModel, params: SystemParams) -> float:
    """P(SNR >= snr_threshold) under the shadowing model, in closed form.

    The SNR is log-normal, so the probability is a normal tail in the dB
    domain.  Thresholds at or below zero admit every cell.
    """
    gamma = params.snr_threshold
    if gamma == -math.inf or gamma <= 0.0:
        return 1.0
    if gamma == math.inf:
        return 0.0
    edge_db = 10.0 * math.log10(gamma / (params.beam_pairs * channel.snr_avg))
    if channel.shadow_sigma_db == 0.0:
        return 1.0 if edge_db <= 0.0 else 0.0
    return 0.5 * math.erfc(edge_db / (channel.shadow_sigma_db * math.sqrt(2.0)))


def sample_snr(channel: ChannelModel, params: SystemParams, rng, size=None):
    """Draw the SNR of one cell (or ``size`` cells): g * beam_pairs * snr_avg."""
    gen = _as_generator(rng)
    shadow_db = gen.normal(0.0, channel.shadow_sigma_db, size)
    return 10.0 ** (shadow_db / 10.0) * params.beam_pairs * channel.snr_avg


def _sample_counts(load: LoadModel, gen: np.random.Generator, size):
    if load.count_distribution == "fixed":
        m = int(load.mean_active_ues)
        return m if size is None else np.full(size, m, dtype=np.int64)
    return gen.poisson(load.mean_active_ues, size)


def sample_beta(load: LoadModel, rng, size=None):
    """Draw the load factor 1/(M + 1) for one cell (or ``size`` cells)."""
    gen = _as_generator(rng)
    m = _sample_counts(load, gen, size)
    return 1.0 / (np.asarray(m, dtype=np.float64) + 1.0) if size is not None else 1.0 / (m + 1.0)


def selection_metric(beta, snr):
    """Load-weighted spectral efficiency beta * log2(1 + snr) in bit/s/Hz."""
    return beta * np.log2(1.0 + snr)


def observe_cell(params: SystemParams, channel: ChannelModel, load: LoadModel, rng) -> CellObservation:
    """Examine one cell: measure SNR, and read beta only if admitted.

    Returns a fully consistent CellObservation.  The effective reward is
    bandwidth_hz * t_data * metric for admitted cells and 0 otherwise.
    """
    gen = _as_generator(rng)
    snr = float(sample_snr(channel, params, gen))
    if snr >= params.snr_threshold:
        beta = float(sample_beta(load, gen))
        metric = float(selection_metric(beta, snr))
        reward = params.bandwidth_hz * params.t_data * metric
        return CellObservation(snr=snr, beta=beta, metric=metric, admitted=True, reward_bits=reward)
    return CellObservation(snr=snr, beta=None, metric=0.0, admitted=False, reward_bits=0.0)


def sample_sync_delay(params: SystemParams, rng, size=None):
    """Wait until the next synchronization signal: uniform on [0, t_syn)."""
    gen = _as_generator(rng)
    return gen.uniform(0.0, params.t_syn, size)


def sample_sib_delay(params: SystemParams, rng, size=None):
    """Wait until the next system-information broadcast: j * t_syn, j uniform on {0..K-1}."""
    gen = _as_generator(rng)
    k = params.sib_slots
    j = gen.integers(0, k, size)
    return j * params.t_syn
