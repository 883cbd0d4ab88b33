"""Formation bookkeeping: desired offsets and the quadratic tracking cost."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geom import Angle, Vec2


@dataclass(frozen=True)
class FormationSpec:
    """World-frame offsets the followers hold relative to the navigator."""

    offsets: tuple[Vec2, ...]

    def __post_init__(self):
        for off in self.offsets:
            if not off.is_finite():
                raise ValueError(f"offset {off} must be finite")
        seen = {(o.x, o.y) for o in self.offsets}
        if len(seen) != len(self.offsets):
            raise ValueError("follower offsets must be distinct")

    @classmethod
    def circle(cls, n_followers: int, radius: float) -> "FormationSpec":
        """Followers evenly spaced on a circle around the navigator."""
        offsets = tuple(
            Vec2(radius * math.cos(2 * math.pi * k / n_followers),
                 radius * math.sin(2 * math.pi * k / n_followers))
            for k in range(n_followers)
        )
        return cls(offsets)

    def __len__(self) -> int:
        return len(self.offsets)


class TrackingWeight:
    """Symmetric positive definite 2x2 weight for the tracking cost."""

    def __init__(self, matrix) -> None:
        m = np.asarray(matrix, dtype=float)
        if m.shape != (2, 2):
            raise ValueError(f"weight must be 2x2, got {m.shape}")
        if not np.allclose(m, m.T, atol=1e-12):
            raise ValueError("weight must be symmetric")
        eigvals = np.linalg.eigvalsh(m)
        if eigvals.min() <= 0.0:
            raise ValueError(f"weight must be positive definite, eigenvalues {eigvals}")
        self.matrix = m

    @classmethod
    def identity(cls) -> "TrackingWeight":
        return cls(np.eye(2))


def relative_displacement(d_0i: float, theta_0i: Angle) -> Vec2:
    """Follower displacement from the navigator, rebuilt from the broadcast
    distance and world-frame bearing."""
    if d_0i < 0:
        raise ValueError(f"distance must be nonnegative, got {d_0i}")
    return Vec2(d_0i * math.cos(theta_0i), d_0i * math.sin(theta_0i))


def tracking_error(z_i: Vec2, eta_i: Vec2) -> Vec2:
    """Deviation of the observed displacement from the assigned offset."""
    return z_i - eta_i


def tracking_cost(e_i: Vec2, weight: TrackingWeight) -> float:
    """Quadratic form e^T Q e."""
    q = weight.matrix
    return (
        q[0, 0] * e_i.x * e_i.x
        + (q[0, 1] + q[1, 0]) * e_i.x * e_i.y
        + q[1, 1] * e_i.y * e_i.y
    )
