"""Hexagonal multi-cell layout and random-waypoint mobility.

Waypoints are drawn uniformly over the convex hull of the hexagonal cells and
users never wrap around the border, which concentrates traffic in the middle
of the network.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull


@dataclass(frozen=True)
class Position:
    x: float
    y: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y])


@dataclass(frozen=True)
class HexNetwork:
    cell_centers: np.ndarray  # (M, 2) meters
    inter_bs_distance: float
    hull_vertices: np.ndarray  # (K, 2), counter-clockwise
    hull_equations: np.ndarray  # (K, 3), a*x + b*y + c <= 0 inside

    @property
    def n_cells(self) -> int:
        return len(self.cell_centers)

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        lo = self.hull_vertices.min(axis=0)
        hi = self.hull_vertices.max(axis=0)
        return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])

    def contains(self, points: np.ndarray, tol: float = 1e-9) -> np.ndarray:
        """Boolean mask of points (..., 2) lying inside the region."""
        pts = np.asarray(points, dtype=float)
        lhs = pts @ self.hull_equations[:, :2].T + self.hull_equations[:, 2]
        return np.all(lhs <= tol * self.inter_bs_distance, axis=-1)

    def centroid(self) -> np.ndarray:
        """Area centroid of the region polygon (shoelace formula)."""
        v = self.hull_vertices
        x, y = v[:, 0], v[:, 1]
        xn, yn = np.roll(x, -1), np.roll(y, -1)
        cross = x * yn - xn * y
        area = cross.sum() / 2.0
        cx = ((x + xn) * cross).sum() / (6.0 * area)
        cy = ((y + yn) * cross).sum() / (6.0 * area)
        return np.array([cx, cy])


def build_hex_layout(rings: int, D: float, n_cells: int | None = None) -> HexNetwork:
    """Cell centers on a triangular lattice of spacing D, ring by ring.

    Cell 0 sits at the origin; rings are enumerated outwards so that the
    index order is stable for any ring count. `n_cells` keeps only the first
    cells of that order (3 gives a triangle of mutually adjacent cells).
    """
    if rings < 0 or D <= 0:
        raise ValueError("rings must be >= 0 and D > 0")
    dirs = [(math.cos(math.pi / 3 * k), math.sin(math.pi / 3 * k)) for k in range(6)]
    centers = [(0.0, 0.0)]
    for r in range(1, rings + 1):
        # start at r*dir[4] and walk r steps along each of the six edges
        x, y = r * dirs[4][0] * D, r * dirs[4][1] * D
        for side in range(6):
            dx, dy = dirs[side]
            for _ in range(r):
                centers.append((x, y))
                x += dx * D
                y += dy * D
    if n_cells is not None:
        if not 1 <= n_cells <= len(centers):
            raise ValueError(f"n_cells must lie in [1, {len(centers)}]")
        centers = centers[:n_cells]
    centers_arr = np.array(centers)

    # pointy-top hexagons with circumradius D/sqrt(3)
    radius = D / math.sqrt(3.0)
    angles = np.pi / 6 + np.pi / 3 * np.arange(6)
    corners = np.stack([np.cos(angles), np.sin(angles)], axis=1) * radius
    all_vertices = (centers_arr[:, None, :] + corners[None, :, :]).reshape(-1, 2)
    hull = ConvexHull(all_vertices)
    return HexNetwork(
        cell_centers=centers_arr,
        inter_bs_distance=float(D),
        hull_vertices=all_vertices[hull.vertices],
        hull_equations=hull.equations,
    )


def distance(a: Position, b: Position) -> float:
    return math.hypot(a.x - b.x, a.y - b.y)


def sample_waypoint(network: HexNetwork, rng: np.random.Generator) -> Position:
    """Uniform point in the region by rejection from the bounding box."""
    x0, y0, x1, y1 = network.bbox
    while True:
        p = np.array([rng.uniform(x0, x1), rng.uniform(y0, y1)])
        if network.contains(p):
            return Position(float(p[0]), float(p[1]))


@dataclass(frozen=True)
class MobilityState:
    position: Position
    waypoint: Position
    speed: float


def advance_mobility(
    state: MobilityState, dt: float, network: HexNetwork, rng: np.random.Generator
) -> MobilityState:
    """Move speed*dt along the current leg; leftover distance starts the next leg."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    x, y = state.position.x, state.position.y
    wp = state.waypoint
    remaining = state.speed * dt
    while True:
        gap = math.hypot(wp.x - x, wp.y - y)
        if gap > remaining:
            x += (wp.x - x) * remaining / gap
            y += (wp.y - y) * remaining / gap
            break
        x, y = wp.x, wp.y
        remaining -= gap
        wp = sample_waypoint(network, rng)
        if remaining <= 0.0:
            break
    return MobilityState(Position(x, y), wp, state.speed)


class RandomWaypointUsers:
    """Vectorized random-waypoint mobility for a population of users.

    Each user owns its generator, so a trajectory depends only on the seed
    and the user index.
    """

    def __init__(self, network: HexNetwork, speed: float, rngs: list[np.random.Generator]):
        self.network = network
        self.speed = float(speed)
        self.rngs = rngs
        n = len(rngs)
        self.positions = np.empty((n, 2))
        self.waypoints = np.empty((n, 2))
        for i, rng in enumerate(rngs):
            self.positions[i] = sample_waypoint(network, rng).as_array()
            self.waypoints[i] = sample_waypoint(network, rng).as_array()

    def advance(self, dt: float) -> np.ndarray:
        """Advance everyone by dt seconds; returns distance moved per user."""
        step = self.speed * dt
        delta = self.waypoints - self.positions
        gap = np.hypot(delta[:, 0], delta[:, 1])
        simple = gap > step
        frac = np.where(simple, step / np.where(gap > 0, gap, 1.0), 0.0)
        self.positions[simple] += delta[simple] * frac[simple, None]
        for i in np.flatnonzero(~simple):
            st = MobilityState(
                Position(*self.positions[i]), Position(*self.waypoints[i]), self.speed
            )
            st = advance_mobility(st, dt, self.network, self.rngs[i])
            self.positions[i] = st.position.as_array()
            self.waypoints[i] = st.waypoint.as_array()
        return np.full(len(self.positions), step)


class ScriptedUsers:
    """Users following fixed piecewise-linear paths at constant speed.

    A path with a single point is a stationary user. Each user waits at the
    first point until its start time and stops at the last point.
    """

    def __init__(self, paths: list[np.ndarray], speeds: np.ndarray | float, start_times=0.0):
        self.paths = [np.atleast_2d(np.asarray(p, dtype=float)) for p in paths]
        n = len(self.paths)
        self.speeds = np.broadcast_to(np.asarray(speeds, dtype=float), (n,)).copy()
        self.start_times = np.broadcast_to(np.asarray(start_times, dtype=float), (n,)).copy()
        self.positions = np.array([p[0] for p in self.paths])
        self.clock = 0.0
        self._leg = np.ones(n, dtype=int)

    def advance(self, dt: float) -> np.ndarray:
        moved = np.zeros(len(self.paths))
        t0, self.clock = self.clock, self.clock + dt
        for i, path in enumerate(self.paths):
            remaining = self.speeds[i] * (self.clock - max(t0, min(self.start_times[i], self.clock)))
            while remaining > 0 and self._leg[i] < len(path):
                target = path[self._leg[i]]
                d = target - self.positions[i]
                gap = float(np.hypot(*d))
                if gap > remaining:
                    self.positions[i] = self.positions[i] + d * remaining / gap
                    moved[i] += remaining
                    remaining = 0.0
                else:
                    self.positions[i] = target.copy()
                    moved[i] += gap
                    remaining -= gap
                    self._leg[i] += 1
        return moved
