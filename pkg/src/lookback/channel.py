"""Link budget: path loss, shadowing, Rayleigh fading, SINR and Shannon rate."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import HexNetwork

MIN_DISTANCE_KM = 0.01


@dataclass
class ChannelConfig:
    carrier_frequency: float = 2e9  # informational only
    bandwidth: float | None = 10e6  # None: derived from the traffic mode
    tx_power: float = 40.0
    noise_density_dbm: float = -174.0
    ue_noise_figure_db: float = 9.0
    shadowing_std_db: float = 8.0
    shadowing_decorrelation_m: float = 50.0
    sinr_clip_db: float = 20.0
    interference_mode: str = "full-reuse"  # or "noise-limited"

    def __post_init__(self):
        if (self.bandwidth is not None and self.bandwidth <= 0) or self.tx_power <= 0:
            raise ValueError("bandwidth and tx_power must be positive")
        if not math.isfinite(self.sinr_clip_db):
            raise ValueError("sinr_clip_db must be finite")
        if self.interference_mode not in ("full-reuse", "noise-limited"):
            raise ValueError(f"unknown interference_mode {self.interference_mode!r}")

    @property
    def noise_power(self) -> float:
        """Thermal noise plus UE noise figure over the bandwidth, in watts."""
        dbm = self.noise_density_dbm + 10 * math.log10(self.bandwidth) + self.ue_noise_figure_db
        return 10 ** ((dbm - 30) / 10)

    @property
    def sinr_clip(self) -> float:
        return 10 ** (self.sinr_clip_db / 10)


@dataclass(frozen=True)
class LinkSample:
    path_loss: float
    shadowing: float
    fading_power_gain: float
    sinr: float
    rate: float


def path_loss_db(d_km):
    """Macro-cell path loss 128.1 + 37.6 log10(d), d in km (clamped at 10 m)."""
    d = np.maximum(d_km, MIN_DISTANCE_KM)
    out = 128.1 + 37.6 * np.log10(d)
    return float(out) if np.ndim(out) == 0 else out


def sample_shadowing(rng: np.random.Generator, std_db: float = 8.0, size=None):
    if std_db == 0:
        return 0.0 if size is None else np.zeros(size)
    return rng.normal(0.0, std_db, size)


def sample_fading(rng: np.random.Generator, size=None):
    """Rayleigh power gain: exponential with unit mean."""
    return rng.standard_exponential(size)


def achievable_rate(sinr, bandwidth: float):
    return bandwidth * np.log2(1.0 + sinr)


def clip_sinr(sinr, cfg: ChannelConfig):
    return np.minimum(sinr, cfg.sinr_clip)


def link_distances_km(positions: np.ndarray, network: HexNetwork) -> np.ndarray:
    diff = positions[:, None, :] - network.cell_centers[None, :, :]
    return np.hypot(diff[..., 0], diff[..., 1]) / 1000.0


def rx_power(positions: np.ndarray, network: HexNetwork, shadow_db: np.ndarray, cfg: ChannelConfig) -> np.ndarray:
    """Mean received power (W) per (user, BS) pair, fading excluded."""
    loss = path_loss_db(link_distances_km(positions, network)) + shadow_db
    return cfg.tx_power * 10 ** (-loss / 10)


def compute_sinr(
    user: np.ndarray,
    serving: int,
    network: HexNetwork,
    shadow_row: np.ndarray,
    fading_gain: float,
    cfg: ChannelConfig,
    active: np.ndarray | None = None,
) -> float:
    """Clipped linear SINR of one user on its serving link.

    `shadow_row` holds the user's shadowing in dB towards every BS. `active`
    masks which interferers transmit (all of them by default).
    """
    p = rx_power(np.atleast_2d(user), network, shadow_row[None, :], cfg)[0]
    signal = p[serving] * fading_gain
    interference = 0.0
    if cfg.interference_mode == "full-reuse":
        mask = np.ones(network.n_cells, dtype=bool) if active is None else np.asarray(active, dtype=bool).copy()
        mask[serving] = False
        interference = float(p[mask].sum())
    sinr = signal / (cfg.noise_power + interference)
    return float(clip_sinr(sinr, cfg))


def link_sample(user, serving, network, shadow_row, fading_gain, cfg, active=None) -> LinkSample:
    d = float(link_distances_km(np.atleast_2d(user), network)[0, serving])
    sinr = compute_sinr(user, serving, network, shadow_row, fading_gain, cfg, active)
    return LinkSample(
        path_loss=path_loss_db(d),
        shadowing=float(shadow_row[serving]),
        fading_power_gain=float(fading_gain),
        sinr=sinr,
        rate=float(achievable_rate(sinr, cfg.bandwidth)),
    )


class ShadowMap:
    """Per (user, BS) shadowing, redrawn after each decorrelation distance travelled."""

    def __init__(self, n_users: int, n_cells: int, cfg: ChannelConfig, rngs: list[np.random.Generator]):
        self.cfg = cfg
        self.rngs = rngs
        self.values = np.empty((n_users, n_cells))
        self.travelled = np.zeros(n_users)
        for i in range(n_users):
            self.values[i] = sample_shadowing(rngs[i], cfg.shadowing_std_db, n_cells)

    def update(self, moved: np.ndarray) -> np.ndarray:
        """Account for distance moved; returns indices of users redrawn."""
        self.travelled += moved
        redraw = np.flatnonzero(self.travelled >= self.cfg.shadowing_decorrelation_m)
        for i in redraw:
            self.values[i] = sample_shadowing(self.rngs[i], self.cfg.shadowing_std_db, self.values.shape[1])
            self.travelled[i] -= self.cfg.shadowing_decorrelation_m
        return redraw
