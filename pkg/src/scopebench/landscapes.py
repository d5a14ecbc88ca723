"""Parametric intensity landscapes on the unit square.

A landscape assigns a nonnegative value to every point of [0, 1]^2 and is
used in two roles by the synthetic point-pattern generator: as a spatial
density for point placement and as a spatial scaler for positional noise.

Five kinds are supported:

* ``constant``      -- 1 everywhere (the uniform landscape).
* ``slope``         -- 1 + max(b - k*x, 0); a linear ramp along x.
* ``step``          -- 1 + delta * [x < a_x]; a vertical step edge.
* ``discs_emboss``  -- 1 + delta inside the union of n discs, 1 outside.
* ``discs_deboss``  -- 0 inside the union of n discs, 1 outside.

For n > 1 the disc centers sit on a ring of radius 0.25 around the square's
center; a single disc is placed uniformly at random inside [r, 1-r]^2 and
must be resolved with an RNG before evaluation.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError


class LandscapeKind(str, enum.Enum):
    CONSTANT = "constant"
    SLOPE = "slope"
    STEP = "step"
    DISCS_EMBOSS = "discs_emboss"
    DISCS_DEBOSS = "discs_deboss"


@dataclass(frozen=True)
class IntensityLandscape:
    kind: LandscapeKind
    k: float = 0.0
    b: float = 0.0
    a_x: float = 0.5
    delta: float = 0.0
    n_discs: int = 0
    radius: float = 0.0
    disc_centers: tuple[tuple[float, float], ...] | None = None

    # -- constructors --------------------------------------------------

    @staticmethod
    def constant() -> "IntensityLandscape":
        return IntensityLandscape(kind=LandscapeKind.CONSTANT)

    @staticmethod
    def slope(k: float, b: float) -> "IntensityLandscape":
        return IntensityLandscape(kind=LandscapeKind.SLOPE, k=k, b=b)

    @staticmethod
    def step(a_x: float, delta: float) -> "IntensityLandscape":
        return IntensityLandscape(kind=LandscapeKind.STEP, a_x=a_x, delta=delta)

    @staticmethod
    def discs_emboss(n: int, radius: float, delta: float) -> "IntensityLandscape":
        return IntensityLandscape(
            kind=LandscapeKind.DISCS_EMBOSS, n_discs=n, radius=radius, delta=delta
        )

    @staticmethod
    def discs_deboss(n: int, radius: float) -> "IntensityLandscape":
        return IntensityLandscape(
            kind=LandscapeKind.DISCS_DEBOSS, n_discs=n, radius=radius
        )

    # -- disc placement ------------------------------------------------

    @property
    def has_discs(self) -> bool:
        return self.kind in (LandscapeKind.DISCS_EMBOSS, LandscapeKind.DISCS_DEBOSS)

    def resolve_discs(self, rng: np.random.Generator | None = None) -> "IntensityLandscape":
        """Fill in disc centers; a no-op for disc-free landscapes.

        Multi-disc layouts are deterministic: centers evenly spaced on a
        ring of radius 0.25 around (0.5, 0.5), the first at angle 0. The
        single-disc layout draws its center uniformly from [r, 1-r]^2 and
        therefore requires ``rng``.
        """
        if not self.has_discs or self.disc_centers is not None:
            return self
        n, r = self.n_discs, self.radius
        if n < 1:
            raise ConfigError("disc landscape needs n_discs >= 1")
        if n == 1:
            if rng is None:
                raise ConfigError("single random disc requires an RNG to resolve")
            lo, hi = r, 1.0 - r
            cx, cy = rng.uniform(lo, hi, size=2)
            centers = ((float(cx), float(cy)),)
        else:
            theta = 2.0 * np.pi * np.arange(n) / n
            centers = tuple(
                (float(0.5 + 0.25 * np.cos(t)), float(0.5 + 0.25 * np.sin(t)))
                for t in theta
            )
        return replace(self, disc_centers=centers)

    # -- evaluation ----------------------------------------------------

    def _disc_cover(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        if self.disc_centers is None:
            raise ConfigError("disc centers unresolved; call resolve_discs() first")
        inside = np.zeros(np.broadcast(x, y).shape, dtype=np.int64)
        r2 = self.radius * self.radius
        for cx, cy in self.disc_centers:
            inside += ((x - cx) ** 2 + (y - cy) ** 2 <= r2).astype(np.int64)
        return np.minimum(inside, 1)

    def evaluate(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if self.kind == LandscapeKind.CONSTANT:
            return np.ones(np.broadcast(x, y).shape)
        if self.kind == LandscapeKind.SLOPE:
            return 1.0 + np.maximum(self.b - self.k * x, 0.0)
        if self.kind == LandscapeKind.STEP:
            return 1.0 + self.delta * (x < self.a_x)
        if self.kind == LandscapeKind.DISCS_EMBOSS:
            return 1.0 + self.delta * self._disc_cover(x, y)
        if self.kind == LandscapeKind.DISCS_DEBOSS:
            return 1.0 - self._disc_cover(x, y)
        raise ConfigError(f"unknown landscape kind {self.kind!r}")

    def sup(self) -> float:
        """Tight upper bound of the landscape over the unit square."""
        if self.kind == LandscapeKind.CONSTANT:
            return 1.0
        if self.kind == LandscapeKind.SLOPE:
            return 1.0 + max(self.b, 0.0)
        if self.kind == LandscapeKind.STEP:
            return 1.0 + max(self.delta, 0.0)
        if self.kind == LandscapeKind.DISCS_EMBOSS:
            return 1.0 + max(self.delta, 0.0)
        if self.kind == LandscapeKind.DISCS_DEBOSS:
            return 1.0
        raise ConfigError(f"unknown landscape kind {self.kind!r}")

    # -- serialization -------------------------------------------------

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind.value}
        if self.kind == LandscapeKind.SLOPE:
            d.update(k=self.k, b=self.b)
        elif self.kind == LandscapeKind.STEP:
            d.update(a_x=self.a_x, delta=self.delta)
        elif self.kind == LandscapeKind.DISCS_EMBOSS:
            d.update(n_discs=self.n_discs, radius=self.radius, delta=self.delta)
        elif self.kind == LandscapeKind.DISCS_DEBOSS:
            d.update(n_discs=self.n_discs, radius=self.radius)
        return d

    @staticmethod
    def from_dict(d: dict) -> "IntensityLandscape":
        kind = LandscapeKind(d["kind"])
        if kind == LandscapeKind.CONSTANT:
            return IntensityLandscape.constant()
        if kind == LandscapeKind.SLOPE:
            return IntensityLandscape.slope(d["k"], d["b"])
        if kind == LandscapeKind.STEP:
            return IntensityLandscape.step(d["a_x"], d["delta"])
        if kind == LandscapeKind.DISCS_EMBOSS:
            return IntensityLandscape.discs_emboss(d["n_discs"], d["radius"], d["delta"])
        if kind == LandscapeKind.DISCS_DEBOSS:
            return IntensityLandscape.discs_deboss(d["n_discs"], d["radius"])
        raise ConfigError(f"unknown landscape kind {d['kind']!r}")


def eval_landscape(spec: IntensityLandscape, x, y) -> np.ndarray:
    """Evaluate ``spec`` at coordinates ``(x, y)`` (scalars or arrays)."""
    return spec.evaluate(x, y)
