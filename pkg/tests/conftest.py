import numpy as np
import pytest

from cellselect import (
    ChannelModel,
    LoadModel,
    RngStream,
    SystemParams,
    sample_reward_distribution,
)

# Reference configuration used throughout: 5 ms sync period, 10 ms
# broadcast period, 20 ms random access, 10 s data sessions, 64 beam
# pairs, 1 GHz bandwidth, -10 dB admission threshold and average SNR,
# 7 dB shadowing, mean load 10.
REF_P_GAMMA = 0.9950636609475512  # 0.5*erfc(10*log10(1/64)/(7*sqrt(2))), hand-checked


@pytest.fixture(scope="session")
def params_ref() -> SystemParams:
    return SystemParams(
        t_syn=0.005,
        t_sib=0.01,
        t_ra=0.02,
        t_data=10.0,
        beam_pairs=64,
        bandwidth_hz=1e9,
        snr_threshold=0.1,
    )


@pytest.fixture(scope="session")
def channel_ref() -> ChannelModel:
    return ChannelModel(snr_avg=0.1, shadow_sigma_db=7.0)


@pytest.fixture(scope="session")
def load_ref() -> LoadModel:
    return LoadModel(mean_active_ues=10.0)


@pytest.fixture(scope="session")
def dist_ref(params_ref, channel_ref, load_ref):
    """Shared 2e5-sample reward distribution for solver-level tests."""
    return sample_reward_distribution(
        params_ref, channel_ref, load_ref, RngStream(998877).generator(1), 200_000
    )


def make_params(**overrides) -> SystemParams:
    base = dict(
        t_syn=0.005,
        t_sib=0.01,
        t_ra=0.02,
        t_data=10.0,
        beam_pairs=64,
        bandwidth_hz=1e9,
        snr_threshold=0.1,
    )
    base.update(overrides)
    return SystemParams(**base)


def assert_close(actual, expected, rel=1e-12, abs_tol=0.0):
    actual = float(actual)
    expected = float(expected)
    err = abs(actual - expected)
    bound = max(rel * abs(expected), abs_tol)
    assert err <= bound, f"{actual!r} != {expected!r} (|err|={err:.3e}, bound={bound:.3e})"


def rng(*key) -> np.random.Generator:
    return np.random.default_rng(key)
