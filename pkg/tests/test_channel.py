import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lookback.channel import (
    ChannelConfig, ShadowMap, achievable_rate, clip_sinr, compute_sinr, link_sample,
    path_loss_db, rx_power, sample_fading, sample_shadowing,
)
from lookback.geometry import build_hex_layout


def test_path_loss_reference_points():
    assert path_loss_db(1.0) == pytest.approx(128.1)
    assert path_loss_db(0.1) == pytest.approx(128.1 - 37.6)
    # closer than 10 m is clamped
    assert path_loss_db(0.0) == pytest.approx(128.1 + 37.6 * math.log10(0.01))
    assert np.allclose(path_loss_db(np.array([0.001, 0.01])), 128.1 - 75.2)


def test_noise_power_10mhz():
    # -174 + 70 + 9 = -95 dBm
    assert ChannelConfig().noise_power == pytest.approx(10 ** (-12.5), rel=1e-12)
    assert ChannelConfig(bandwidth=5e6).noise_power == pytest.approx(10 ** (-12.5) / 2, rel=1e-12)


def test_clip_and_ceiling_rate():
    cfg = ChannelConfig()
    assert clip_sinr(1e4, cfg) == pytest.approx(100.0)  # 40 dB -> 20 dB
    assert clip_sinr(3.0, cfg) == 3.0
    assert achievable_rate(100.0, 10e6) == pytest.approx(66.58e6, rel=1e-4)
    assert achievable_rate(0.0, 10e6) == 0.0


def test_config_validation():
    with pytest.raises(ValueError):
        ChannelConfig(bandwidth=-1)
    with pytest.raises(ValueError):
        ChannelConfig(tx_power=0)
    with pytest.raises(ValueError):
        ChannelConfig(sinr_clip_db=math.inf)
    with pytest.raises(ValueError):
        ChannelConfig(interference_mode="partial")


def test_shadowing_moments():
    rng = np.random.default_rng(1)
    x = sample_shadowing(rng, 8.0, 200_000)
    assert abs(x.mean()) < 4 * 8 / math.sqrt(len(x))
    assert x.std() == pytest.approx(8.0, rel=0.01)
    assert sample_shadowing(rng, 0.0) == 0.0


def test_rayleigh_power_gain_is_unit_exponential():
    g = sample_fading(np.random.default_rng(2), 200_000)
    assert g.min() >= 0
    assert g.mean() == pytest.approx(1.0, abs=4 / math.sqrt(len(g)))
    assert (g > 1.0).mean() == pytest.approx(math.exp(-1), abs=0.005)


def test_sinr_matches_hand_computed_link_budget():
    net = build_hex_layout(1, 1000.0, n_cells=3)
    cfg = ChannelConfig(sinr_clip_db=60.0)
    user = np.array([300.0, 0.0])
    shadow = np.array([2.0, -3.0, 1.0])
    d = [0.3, math.hypot(800, 866.0254037844386) / 1000, math.hypot(200, 866.0254037844386) / 1000]
    p = [40 * 10 ** (-(128.1 + 37.6 * math.log10(dk) + s) / 10) for dk, s in zip(d, shadow)]
    noise = 10 ** ((-174 + 70 + 9 - 30) / 10)
    expected = p[0] * 0.7 / (noise + p[1] + p[2])
    assert compute_sinr(user, 0, net, shadow, 0.7, cfg) == pytest.approx(expected, rel=1e-9)
    # only active interferers count
    only1 = p[0] * 0.7 / (noise + p[1])
    assert compute_sinr(user, 0, net, shadow, 0.7, cfg, active=[True, True, False]) == pytest.approx(only1, rel=1e-9)
    quiet = ChannelConfig(sinr_clip_db=60.0, interference_mode="noise-limited")
    assert compute_sinr(user, 0, net, shadow, 0.7, quiet) == pytest.approx(p[0] * 0.7 / noise, rel=1e-9)
    s = link_sample(user, 0, net, shadow, 0.7, cfg)
    assert s.rate == pytest.approx(10e6 * math.log2(1 + expected), rel=1e-9)
    assert s.path_loss == pytest.approx(128.1 + 37.6 * math.log10(0.3))


@settings(max_examples=200, deadline=None)
@given(x=st.floats(-1500, 1500), y=st.floats(-1500, 1500), fade=st.floats(0, 50),
       sh=st.lists(st.floats(-30, 30), min_size=7, max_size=7))
def test_sinr_never_exceeds_clip(x, y, fade, sh):
    net = build_hex_layout(1, 1000.0)
    cfg = ChannelConfig()
    sinr = compute_sinr(np.array([x, y]), 0, net, np.array(sh), fade, cfg)
    assert 0 <= sinr <= 100.0
    assert achievable_rate(sinr, cfg.bandwidth) <= 10e6 * math.log2(101) + 1e-6


def test_rx_power_shape_and_monotone_in_distance():
    net = build_hex_layout(1, 1000.0)
    pos = np.array([[0.0, 0.0], [100.0, 0.0], [400.0, 0.0]])
    p = rx_power(pos, net, np.zeros((3, 7)), ChannelConfig())
    assert p.shape == (3, 7)
    assert p[0, 0] > p[1, 0] > p[2, 0]


def test_shadow_map_redraws_after_decorrelation_distance():
    cfg = ChannelConfig()
    rngs = [np.random.default_rng(i) for i in range(3)]
    sm = ShadowMap(3, 4, cfg, rngs)
    before = sm.values.copy()
    redrawn = sm.update(np.array([49.0, 50.0, 120.0]))
    assert list(redrawn) == [1, 2]
    assert np.array_equal(sm.values[0], before[0])
    assert not np.array_equal(sm.values[1], before[1])
    assert sm.travelled == pytest.approx([49.0, 0.0, 70.0])
    assert list(sm.update(np.array([1.0, 0.0, 0.0]))) == [0, 2]
