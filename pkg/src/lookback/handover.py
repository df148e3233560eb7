"""Strongest-server association and hand-over of long-term QoS state."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .channel import ChannelConfig, link_distances_km, path_loss_db
from .geometry import HexNetwork

MULTI_CELL = "multi-cell"
SINGLE_CELL = "single-cell"


@dataclass(frozen=True)
class HandoverRecord:
    user: int
    from_cell: int
    to_cell: int
    long_avg: float
    freeze: float
    timestamp: float


@dataclass(frozen=True)
class QosState:
    """What the serving BS knows about one user.

    The `*_pending` flags mean the average is re-seeded from the first rate
    measured in the new cell.
    """

    short_avg: float = 0.0
    long_avg: float = 0.0
    frozen_time: float = 0.0
    session_time: float = 0.0
    short_pending: bool = True
    long_pending: bool = True

    @property
    def freeze(self) -> float:
        return self.frozen_time / self.session_time if self.session_time > 0 else 0.0


def mean_rx_dbm(positions: np.ndarray, network: HexNetwork, shadow_db: np.ndarray, cfg: ChannelConfig) -> np.ndarray:
    tx_dbm = 10 * np.log10(cfg.tx_power) + 30
    return tx_dbm - path_loss_db(link_distances_km(np.atleast_2d(positions), network)) - shadow_db


def best_server(user, network: HexNetwork, shadow_row: np.ndarray, cfg: ChannelConfig, current: int | None = None) -> int:
    return int(best_servers(np.atleast_2d(user), network, np.atleast_2d(shadow_row), cfg,
                            None if current is None else np.array([current]))[0])


def best_servers(positions, network, shadow_db, cfg, current=None) -> np.ndarray:
    """Strongest mean received power per user; exact ties keep the current cell."""
    power = mean_rx_dbm(positions, network, shadow_db, cfg)
    best = np.argmax(power, axis=1)
    if current is not None:
        rows = np.arange(len(best))
        keep = power[rows, current] >= power[rows, best]
        best = np.where(keep, current, best)
    return best


def maybe_handover(
    serving: int,
    user: int,
    new_best: int,
    mode: str,
    state: QosState,
    timestamp: float,
) -> tuple[int, QosState, HandoverRecord | None]:
    if new_best == serving:
        return serving, state, None
    record = HandoverRecord(user, serving, new_best, state.long_avg, state.freeze, timestamp)
    if mode == MULTI_CELL:
        # the long-term average and freezing history travel with the user
        new_state = replace(state, short_pending=True)
    elif mode == SINGLE_CELL:
        new_state = replace(state, short_pending=True, long_pending=True, frozen_time=0.0, session_time=0.0)
    else:
        raise ValueError(f"unknown handover mode {mode!r}")
    return new_best, new_state, record
