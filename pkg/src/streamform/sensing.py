"""Simulated onboard sensing: lidar, relative-position links, comm graph.

The lidar casts evenly spaced rays over the front semicircle against
circular obstacles (analytic ray-circle intersection) and adds Gaussian
range noise. Detected returns are grouped into contiguous ray intervals
and split into left/right half-plane fields for the avoidance logic.
Relative-position observations and the connection-zone communication graph
model the antenna-array links between agents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .geom import Angle, Vec2, wrap_angle

# contiguous detections narrower than this many rays are discarded
# (minimum obstacle footprint guarantees at least three rays on a hit)
MIN_INTERVAL_RAYS = 3


@dataclass(frozen=True)
class LidarConfig:
    resolution: float = math.radians(3.0)
    fov_min: float = -math.pi / 2
    fov_max: float = math.pi / 2
    d_min: float = 0.0
    d_max: float = 2.0
    noise_std: float = 0.2

    def __post_init__(self):
        if self.d_min >= self.d_max:
            raise ValueError(f"d_min {self.d_min} must be below d_max {self.d_max}")
        span = self.fov_max - self.fov_min
        steps = span / self.resolution
        if abs(steps - round(steps)) > 1e-9:
            raise ValueError(
                f"resolution {self.resolution} must divide the field of view {span}"
            )

    @cached_property
    def angles(self) -> np.ndarray:
        n = round((self.fov_max - self.fov_min) / self.resolution) + 1
        # built symmetrically about the fan center so that mirrored worlds
        # produce exactly mirrored scans
        mid = 0.5 * (self.fov_min + self.fov_max)
        return mid + self.resolution * (np.arange(n) - (n - 1) / 2.0)

    @property
    def n_rays(self) -> int:
        return len(self.angles)


@dataclass
class LidarScan:
    """Per-ray angles (agent frame, strictly increasing) and distances."""

    angles: np.ndarray
    distances: np.ndarray
    agent_inside: bool = False

    def endpoint(self, index: int) -> Vec2:
        """Agent-frame endpoint of ray ``index``."""
        d = float(self.distances[index])
        a = float(self.angles[index])
        return Vec2(d * math.cos(a), d * math.sin(a))


class ObstacleSet:
    """Circular obstacles stored as flat arrays for vectorized ray casts."""

    def __init__(self, centers: np.ndarray, radii: np.ndarray):
        self.centers = np.asarray(centers, dtype=float).reshape(-1, 2)
        self.radii = np.asarray(radii, dtype=float).reshape(-1)
        if len(self.centers) != len(self.radii):
            raise ValueError("centers and radii must have matching length")
        if np.any(self.radii <= 0):
            raise ValueError("obstacle radii must be positive")

    @classmethod
    def from_list(cls, items: list[tuple[Vec2, float]]) -> "ObstacleSet":
        if not items:
            return cls.empty()
        centers = np.array([[c.x, c.y] for c, _ in items])
        radii = np.array([r for _, r in items])
        return cls(centers, radii)

    @classmethod
    def empty(cls) -> "ObstacleSet":
        return cls(np.empty((0, 2)), np.empty(0))

    def __len__(self) -> int:
        return len(self.radii)

    def extended(self, centers: np.ndarray, radii: np.ndarray) -> "ObstacleSet":
        """New set with extra circles appended (used to add agent bodies)."""
        if len(centers) == 0:
            return self
        return ObstacleSet(
            np.vstack([self.centers, centers]), np.concatenate([self.radii, radii])
        )


def raycast(
    position: Vec2,
    heading: Angle,
    obstacles: ObstacleSet,
    cfg: LidarConfig,
    rng: np.random.Generator | None = None,
) -> LidarScan:
    """Cast the configured ray fan from a pose against circular obstacles.

    Each ray reports the nearest intersection distance (or d_max when the
    ray misses everything), plus Gaussian range noise when ``rng`` is given;
    results are clamped to [d_min, d_max]. If the agent center lies inside
    an obstacle every ray reads d_min and ``agent_inside`` is set.
    """
    n = cfg.n_rays
    if len(obstacles) == 0:
        true_d = np.full(n, cfg.d_max)
        inside = False
    else:
        rel = obstacles.centers - np.array([position.x, position.y])
        cc = np.einsum("ij,ij->i", rel, rel)
        inside = bool(np.any(cc < obstacles.radii**2))
        if inside:
            return LidarScan(cfg.angles.copy(), np.full(n, cfg.d_min), agent_inside=True)
        world_angles = heading + cfg.angles
        dirs = np.stack([np.cos(world_angles), np.sin(world_angles)], axis=1)
        b = dirs @ rel.T  # (n_rays, n_obs) projections of centers on rays
        disc = b * b - (cc - obstacles.radii**2)
        hit = disc >= 0.0
        t = np.where(hit, b - np.sqrt(np.where(hit, disc, 0.0)), np.inf)
        t = np.where(t >= 0.0, t, np.inf)
        true_d = t.min(axis=1)
        true_d = np.where(np.isfinite(true_d), true_d, cfg.d_max)
    d = np.clip(true_d, cfg.d_min, cfg.d_max)
    if rng is not None and cfg.noise_std > 0.0:
        d = d + rng.normal(0.0, cfg.noise_std, size=n)
        d = np.clip(d, cfg.d_min, cfg.d_max)
    return LidarScan(cfg.angles.copy(), d, agent_inside=inside)


def detect_intervals(scan: LidarScan, d_risk: float) -> list[tuple[int, int]]:
    """Maximal runs of consecutive rays closer than d_risk.

    Runs shorter than MIN_INTERVAL_RAYS are discarded. Returns inclusive
    (start, end) ray-index pairs in ascending order.
    """
    close = scan.distances < d_risk
    intervals: list[tuple[int, int]] = []
    start = None
    for i, flag in enumerate(close):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            if i - start >= MIN_INTERVAL_RAYS:
                intervals.append((start, i - 1))
            start = None
    if start is not None and len(close) - start >= MIN_INTERVAL_RAYS:
        intervals.append((start, len(close) - 1))
    return intervals


def split_sides(
    intervals: list[tuple[int, int]], scan: LidarScan
) -> tuple[tuple[int, int] | None, tuple[int, int] | None]:
    """Assign detection intervals to the left/right half-fields.

    An interval lies on the left when all its ray angles are positive and
    on the right when all are negative; one straddling the heading axis is
    assigned whole to the side of its shortest ray. Per side only the
    foremost interval (the one whose endpoint is nearest the heading axis)
    is kept.
    """
    lhs: list[tuple[int, int]] = []
    rhs: list[tuple[int, int]] = []
    for start, end in intervals:
        a_start = float(scan.angles[start])
        a_end = float(scan.angles[end])
        if a_start > 0.0:
            lhs.append((start, end))
        elif a_end < 0.0:
            rhs.append((start, end))
        else:
            m = start + int(np.argmin(scan.distances[start : end + 1]))
            a_m = float(scan.angles[m])
            if a_m > 0.0:
                lhs.append((start, end))
            elif a_m < 0.0:
                rhs.append((start, end))
            else:
                # shortest ray dead ahead: take the side covering more rays,
                # left on a perfect tie
                n_left = sum(1 for k in range(start, end + 1) if scan.angles[k] > 0)
                n_right = sum(1 for k in range(start, end + 1) if scan.angles[k] < 0)
                (lhs if n_left >= n_right else rhs).append((start, end))
    # foremost = smallest inner angle magnitude; on the left the inner
    # endpoint is the interval start, on the right it is the interval end
    best_lhs = min(lhs, key=lambda iv: iv[0]) if lhs else None
    best_rhs = max(rhs, key=lambda iv: iv[1]) if rhs else None
    return best_lhs, best_rhs


@dataclass
class CommsView:
    """One step of the communication layer.

    adjacency[i, j] is True when agents i and j are inside each other's
    connection zone. neighbors[i] maps agent id j to (distance, world-frame
    bearing from i to j). broadcast[i] carries the navigator's broadcast
    (d_0i, theta_0i) for follower i, or None when i has no communication
    path to the navigator this step.
    """

    adjacency: np.ndarray
    neighbors: list[dict[int, tuple[float, float]]]
    broadcast: list[tuple[float, float] | None]


def neighbor_observations(
    positions: list[Vec2],
    connection_zone: float,
    noise_std: float = 0.0,
    rng: np.random.Generator | None = None,
) -> CommsView:
    """Relative-position links between agents within the connection zone.

    Agent 0 is the navigator; its broadcast (distance and bearing from the
    navigator to each follower) is relayed through the network, so every
    follower in the navigator's connected component receives it.
    """
    n = len(positions)
    pts = np.array([[p.x, p.y] for p in positions])
    diff = pts[None, :, :] - pts[:, None, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    adjacency = (dist <= connection_zone) & ~np.eye(n, dtype=bool)

    neighbors: list[dict[int, tuple[float, float]]] = []
    for i in range(n):
        obs: dict[int, tuple[float, float]] = {}
        for j in range(n):
            if not adjacency[i, j]:
                continue
            d = float(dist[i, j])
            theta = math.atan2(diff[i, j, 1], diff[i, j, 0])
            if noise_std > 0.0 and rng is not None:
                d = max(0.0, d + float(rng.normal(0.0, noise_std)))
                theta = wrap_angle(theta + float(rng.normal(0.0, noise_std)))
            obs[j] = (d, theta)
        neighbors.append(obs)

    # flood from the navigator to find who can hear the broadcast
    reached = {0}
    frontier = [0]
    while frontier:
        i = frontier.pop()
        for j in range(n):
            if adjacency[i, j] and j not in reached:
                reached.add(j)
                frontier.append(j)
    broadcast: list[tuple[float, float] | None] = [None] * n
    for i in range(1, n):
        if i in reached:
            d = float(dist[0, i])
            theta = math.atan2(diff[0, i, 1], diff[0, i, 0])
            if noise_std > 0.0 and rng is not None:
                d = max(0.0, d + float(rng.normal(0.0, noise_std)))
                theta = wrap_angle(theta + float(rng.normal(0.0, noise_std)))
            broadcast[i] = (d, theta)
    return CommsView(adjacency, neighbors, broadcast)
