"""Two-tier heterogeneous network: load balancing and strategy comparison.

One high-power macro station plus four low-power millimeter-wave micro
stations serve uniformly dropped users.  Users associate one at a time;
a station's advertised load factor 1/(active + 1) drops as it fills, so
metric-based selection spreads users while received-power or SNR
selection piles them onto the strongest station.

The module also compares search strategies on the single-cell search
model: fixed-length scans that pick the strongest or best-metric cell
versus the optimal threshold policy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ChannelModel, LoadModel, SystemParams, _as_generator
from .sim import (
    DEFAULT_MAX_CELLS,
    _period_fixed,
    _period_stop,
    _ratio_and_std_err,
    _require_stream,
)
from .solver import sample_reward_distribution, solve_bisection

__all__ = [
    "SPEED_OF_LIGHT",
    "BaseStation",
    "NoiseParams",
    "TwoTierConfig",
    "AssociationResult",
    "StrategyResult",
    "ASSOCIATION_SCHEMES",
    "DEFAULT_STRATEGIES",
    "link_snr",
    "associate",
    "compare_schemes",
    "parse_strategy",
]

# 3-significant-figure engineering value, so path-loss numbers are
# reproducible bit for bit
SPEED_OF_LIGHT = 2.998e8

ASSOCIATION_SCHEMES = ("max_power", "max_snr", "max_metric")


@dataclass
class BaseStation:
    """One station; ``active_ues`` mutates during sequential association."""

    position: tuple[float, float]
    tx_power_dbm: float
    carrier_ghz: float
    bandwidth_hz: float
    beam_gain_db: float
    tier: str
    active_ues: int = 0

    def __post_init__(self):
        if self.tier not in ("macro", "micro"):
            raise ValueError(f"tier must be 'macro' or 'micro', got {self.tier!r}")
        if not self.bandwidth_hz > 0:
            raise ValueError("bandwidth_hz must be positive")
        if not math.isfinite(self.tx_power_dbm):
            raise ValueError("tx_power_dbm must be finite")
        if self.active_ues < 0:
            raise ValueError("active_ues must be nonnegative")

    @property
    def beta(self) -> float:
        """Broadcast load factor 1/(active_ues + 1)."""
        return 1.0 / (self.active_ues + 1)


@dataclass(frozen=True)
class NoiseParams:
    """Thermal noise density and receiver noise figure."""

    psd_dbm_hz: float = -174.0
    noise_figure_db: float = 9.0

    def floor_dbm(self, bandwidth_hz: float) -> float:
        """Noise floor over the given bandwidth in dBm."""
        return self.psd_dbm_hz + 10.0 * math.log10(bandwidth_hz) + self.noise_figure_db


@dataclass(frozen=True)
class TwoTierConfig:
    """Geometry and radio parameters of the two-tier drop experiment.

    Defaults: a 46 dBm macro at the origin on 2 GHz / 20 MHz, four
    23 dBm micros at (+-100, +-100) m on 39 GHz / 1 GHz with 30 dB beam
    gain, 100 users dropped uniformly on the [-150, 150] m square,
    path-loss exponent 3.8 and 7 dB shadowing.
    """

    macro_position: tuple[float, float] = (0.0, 0.0)
    macro_tx_power_dbm: float = 46.0
    macro_carrier_ghz: float = 2.0
    macro_bandwidth_hz: float = 2e7
    micro_positions: tuple = ((100.0, 100.0), (-100.0, 100.0), (-100.0, -100.0), (100.0, -100.0))
    micro_tx_power_dbm: float = 23.0
    micro_carrier_ghz: float = 39.0
    micro_bandwidth_hz: float = 1e9
    micro_beam_gain_db: float = 30.0
    n_ues: int = 100
    half_width_m: float = 150.0
    pathloss_exponent: float = 3.8
    shadow_sigma_db: float = 7.0
    noise_psd_dbm_hz: float = -174.0
    noise_figure_db: float = 9.0

    def __post_init__(self):
        if not self.pathloss_exponent > 2:
            raise ValueError("pathloss_exponent must exceed 2")
        if self.n_ues < 1:
            raise ValueError("n_ues must be >= 1")
        if not self.half_width_m > 0:
            raise ValueError("half_width_m must be positive")
        if self.shadow_sigma_db < 0:
            raise ValueError("shadow_sigma_db must be nonnegative")
        for p in (self.macro_tx_power_dbm, self.micro_tx_power_dbm):
            if not math.isfinite(p):
                raise ValueError("tx powers must be finite")
        if not (self.macro_bandwidth_hz > 0 and self.micro_bandwidth_hz > 0):
            raise ValueError("bandwidths must be positive")

    def build_stations(self) -> list[BaseStation]:
        """Fresh station list: the macro first, then the micros in order."""
        stations = [
            BaseStation(
                position=tuple(self.macro_position),
                tx_power_dbm=self.macro_tx_power_dbm,
                carrier_ghz=self.macro_carrier_ghz,
                bandwidth_hz=self.macro_bandwidth_hz,
                beam_gain_db=0.0,
                tier="macro",
            )
        ]
        for pos in self.micro_positions:
            stations.append(
                BaseStation(
                    position=tuple(pos),
                    tx_power_dbm=self.micro_tx_power_dbm,
                    carrier_ghz=self.micro_carrier_ghz,
                    bandwidth_hz=self.micro_bandwidth_hz,
                    beam_gain_db=self.micro_beam_gain_db,
                    tier="micro",
                )
            )
        return stations

    def noise(self) -> NoiseParams:
        return NoiseParams(self.noise_psd_dbm_hz, self.noise_figure_db)


@dataclass(frozen=True)
class AssociationResult:
    """Outcome of one sequential association pass."""

    counts: np.ndarray
    chosen_bs: np.ndarray
    metrics: np.ndarray

    def __post_init__(self):
        if int(self.counts.sum()) != self.chosen_bs.size:
            raise ValueError("per-station counts must sum to the number of UEs")


def _received_power_dbm(
    bs: BaseStation, ue_position, shadow_draw_db: float, pathloss_exponent: float
) -> float:
    dx = ue_position[0] - bs.position[0]
    dy = ue_position[1] - bs.position[1]
    d = math.hypot(dx, dy)
    if d == 0.0:
        raise ValueError("UE exactly on top of a station: path loss is singular")
    d = max(d, 1.0)  # the log-distance model is not meant for sub-meter links
    wavelength = SPEED_OF_LIGHT / (bs.carrier_ghz * 1e9)
    pathloss_db = 20.0 * math.log10(4.0 * math.pi / wavelength) + pathloss_exponent * 10.0 * math.log10(d)
    return bs.tx_power_dbm + bs.beam_gain_db - pathloss_db - shadow_draw_db


def link_snr(
    bs: BaseStation,
    ue_position,
    shadow_draw_db: float,
    noise_params: NoiseParams,
    pathloss_exponent: float = 3.8,
) -> float:
    """Linear SNR of one station-to-user link.

    Received power is tx power plus beam gain minus free-space-intercept
    path loss (20*log10(4*pi/wavelength) + alpha*10*log10(d)) minus the
    shadowing draw; the noise floor scales with the station's own
    bandwidth.  All arithmetic runs in dB and converts at the end.
    """
    rx_dbm = _received_power_dbm(bs, ue_position, shadow_draw_db, pathloss_exponent)
    return 10.0 ** ((rx_dbm - noise_params.floor_dbm(bs.bandwidth_hz)) / 10.0)


def associate(config: TwoTierConfig, scheme: str, rng) -> AssociationResult:
    """Drop users uniformly and associate them one at a time.

    scheme picks the selection criterion each user maximizes:
      * "max_power"  - received power in dBm
      * "max_snr"    - SNR (power over the station's own noise floor)
      * "max_metric" - beta * log2(1 + SNR) with beta read live, so
        every association lowers the winner's appeal to later users

    Positions and the full shadowing matrix are drawn up front in a
    scheme-independent order: the same stream compares schemes on
    identical randomness.  Users are processed in index order; ties go
    to the lowest station id.  No admission threshold applies here.
    """
    if scheme not in ASSOCIATION_SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {ASSOCIATION_SCHEMES}")
    gen = _as_generator(rng)
    stations = config.build_stations()
    n_bs = len(stations)
    hw = config.half_width_m
    positions = gen.uniform(-hw, hw, (config.n_ues, 2))
    shadows = gen.normal(0.0, config.shadow_sigma_db, (config.n_ues, n_bs))
    noise = config.noise()
    alpha = config.pathloss_exponent

    floors = np.array([noise.floor_dbm(bs.bandwidth_hz) for bs in stations])
    chosen = np.zeros(config.n_ues, dtype=np.int64)
    achieved = np.zeros(config.n_ues)
    for u in range(config.n_ues):
        rx = np.array(
            [
                _received_power_dbm(bs, positions[u], shadows[u, b], alpha)
                for b, bs in enumerate(stations)
            ]
        )
        snr = 10.0 ** ((rx - floors) / 10.0)
        if scheme == "max_power":
            pick = int(np.argmax(rx))
        elif scheme == "max_snr":
            pick = int(np.argmax(snr))
        else:
            betas = np.array([bs.beta for bs in stations])  # read live
            pick = int(np.argmax(betas * np.log2(1.0 + snr)))
        achieved[u] = stations[pick].beta * np.log2(1.0 + snr[pick])
        stations[pick].active_ues += 1
        chosen[u] = pick
    counts = np.array([bs.active_ues for bs in stations], dtype=np.int64)
    return AssociationResult(counts=counts, chosen_bs=chosen, metrics=achieved)


@dataclass(frozen=True)
class StrategyResult:
    """Throughput of one search strategy."""

    scheme: str
    n_scan: int | None
    throughput: float
    std_err: float


DEFAULT_STRATEGIES = (
    "max_power:10",
    "max_power:30",
    "max_metric:10",
    "max_metric:30",
    "optimal_stopping",
)


def parse_strategy(text: str):
    """Parse 'max_power:10' / 'max_metric:30' / 'optimal_stopping'."""
    name, _, arg = text.partition(":")
    if name == "optimal_stopping":
        if arg:
            raise ValueError("optimal_stopping takes no scan count")
        return name, None
    if name in ("max_power", "max_metric"):
        if not arg:
            raise ValueError(f"{name} needs a scan count, like {name}:10")
        n = int(arg)
        if n < 1:
            raise ValueError("scan count must be >= 1")
        return name, n
    raise ValueError(f"unknown strategy {text!r}")


def compare_schemes(
    params: SystemParams,
    channel: ChannelModel,
    load: LoadModel,
    strategies,
    n_periods: int,
    rng,
    max_cells: int = DEFAULT_MAX_CELLS,
) -> list[StrategyResult]:
    """Throughput of fixed-scan and optimal-stopping strategies.

    Fixed-scan strategies examine exactly n cells (same per-cell time
    accounting as the threshold policy, one clock for all) and connect
    to the argmax of their criterion; optimal_stopping solves for the
    threshold on a million-sample reward distribution drawn from
    substream (1,) and applies it.  All strategies run on the same
    per-period substreams, so differences are low-variance.
    """
    if n_periods < 1:
        raise ValueError("n_periods must be >= 1")
    stream = _require_stream(rng)
    parsed = [parse_strategy(s) if isinstance(s, str) else tuple(s) for s in strategies]

    fixed_cache: dict[int, tuple] = {}

    def fixed_tables(n_scan: int):
        if n_scan not in fixed_cache:
            durations = np.empty(n_periods)
            bits_power = np.empty(n_periods)
            bits_metric = np.empty(n_periods)
            for i in range(n_periods):
                gen = stream.generator(0, i)
                t_scan, r_power, r_metric = _period_fixed(gen, params, channel, load, n_scan)
                durations[i] = t_scan + params.theta
                bits_power[i] = r_power
                bits_metric[i] = r_metric
            fixed_cache[n_scan] = (durations, bits_power, bits_metric)
        return fixed_cache[n_scan]

    rows = []
    solution = None
    for name, n_scan in parsed:
        if name == "optimal_stopping":
            if solution is None:
                dist = sample_reward_distribution(params, channel, load, stream.generator(1))
                solution = solve_bisection(dist, params)
            bits = np.empty(n_periods)
            durations = np.empty(n_periods)
            for i in range(n_periods):
                out = _period_stop(
                    stream.generator(0, i), params, channel, load,
                    solution.reward_threshold, max_cells,
                )
                bits[i] = out.bits
                durations[i] = out.duration_s
            thr, se = _ratio_and_std_err(bits, durations)
        else:
            durations, bits_power, bits_metric = fixed_tables(n_scan)
            bits = bits_power if name == "max_power" else bits_metric
            thr, se = _ratio_and_std_err(bits, durations)
        rows.append(StrategyResult(scheme=name, n_scan=n_scan, throughput=thr, std_err=se))
    return rows
