"""Shared container for 2-D point patterns."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class PointPattern:
    """An ordered set of 2-D points, optionally labelled.

    ``points`` is an (n, 2) float64 array. ``class_id`` carries a class label
    when the pattern comes from the synthetic benchmark; ``seed`` records the
    64-bit RNG seed the pattern was generated from, so any sample can be
    regenerated from its header alone.
    """

    points: np.ndarray
    class_id: int | None = None
    seed: int | None = None

    def __post_init__(self) -> None:
        self.points = np.asarray(self.points, dtype=np.float64).reshape(-1, 2)

    @property
    def n_points(self) -> int:
        return int(self.points.shape[0])

    def replace_points(self, points: np.ndarray) -> "PointPattern":
        return PointPattern(points=points, class_id=self.class_id, seed=self.seed)
