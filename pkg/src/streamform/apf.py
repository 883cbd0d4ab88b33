"""Repulsive artificial-potential-field cost, the comparison baseline.

Drop-in replacement for the stream-value avoidance cost: it scores raw
proximity of the per-side shortest detection instead of streamline
deviation, so swapping it changes nothing else in the pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable


@dataclass(frozen=True)
class ApfParams:
    cutoff: float  # influence distance d0
    gain: float = 1.0

    def __post_init__(self):
        if self.cutoff <= 0.0:
            raise ValueError(f"cutoff must be positive, got {self.cutoff}")
        if self.gain <= 0.0:
            raise ValueError(f"gain must be positive, got {self.gain}")


def apf_cost(side_distances: Iterable[float | None], params: ApfParams) -> float:
    """Sum over sides of (gain/2) * (1/d - 1/d0)^2 inside the cutoff.

    Sides without a detection pass None and contribute nothing.
    """
    total = 0.0
    for d in side_distances:
        if d is None:
            continue
        if d <= 0.0:
            raise ValueError(f"distance must be positive, got {d}")
        if d < params.cutoff:
            diff = 1.0 / d - 1.0 / params.cutoff
            total += 0.5 * params.gain * diff * diff
    return total
