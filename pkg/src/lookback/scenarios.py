"""Scripted scenarios built on the engine."""

from __future__ import annotations

import numpy as np

from .config import CBR, ScenarioConfig
from .engine import RunLog, Simulation
from .geometry import ScriptedUsers, build_hex_layout

# three mutually adjacent cells: 0 at the origin, 1 lower-left, 2 lower-right
CONGESTED_ORIGIN, SPARSE_ORIGIN, DESTINATION = 1, 2, 0


def _scatter(rng, center, n, radius):
    r = radius * np.sqrt(rng.uniform(0.2, 1.0, n))
    phi = rng.uniform(0, 2 * np.pi, n)
    return center + np.stack([r * np.cos(phi), r * np.sin(phi)], axis=1)


def two_user_handover(
    rule: str,
    seed: int = 0,
    origin_load: int = 26,
    destination_load: int = 22,
    move_at: float = 150.0,
    sim_time: float = 600.0,
    arrival_rate: float = 2e6,
    queue_at_handover: str = "drop",
) -> RunLog:
    """Two streaming users enter a congested cell from different histories.

    User 0 arrives from a congested cell, user 1 from a lightly loaded one;
    all other users are stationary background load. Shadowing is disabled
    so association follows geometry only. By default the destination BS
    holds no backlog for arriving users, so a no-lookback rule sees them as
    fresh; the arrival rate sits just above the media rate so queues stay
    a short-term signal.
    """
    network = build_hex_layout(1, 1000.0, n_cells=3)
    centers = network.cell_centers
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(99,)))
    paths = [
        np.array([centers[CONGESTED_ORIGIN] + (-150.0, -120.0), centers[DESTINATION] + (-120.0, 90.0)]),
        np.array([centers[SPARSE_ORIGIN] + (150.0, -120.0), centers[DESTINATION] + (120.0, 90.0)]),
    ]
    for p in _scatter(rng, centers[CONGESTED_ORIGIN], origin_load, 380.0):
        paths.append(p[None, :])
    for p in _scatter(rng, centers[DESTINATION], destination_load, 380.0):
        paths.append(p[None, :])
    n = len(paths)
    speeds = np.zeros(n)
    speeds[:2] = 40 / 3.6
    mobility = ScriptedUsers(paths, speeds, start_times=move_at)
    cfg = ScenarioConfig().replace(**{
        "rings": 1, "cells": 3, "users": n, "sim_time": sim_time, "warm_up": 0.0, "seed": seed,
        "traffic.mode": CBR, "traffic.arrival_rate": arrival_rate,
        "channel.shadowing_std_db": 0.0, "scheduler.rule": rule,
        "traffic.queue_at_handover": queue_at_handover,
    })
    return Simulation(cfg, network=network, mobility=mobility).run()
