"""Deterministic sample-point generation for the identity suites.

A splitmix-style 64-bit generator keeps reports reproducible across
platforms: same seed, same scenario, byte-identical numbers.
"""

from __future__ import annotations

from dataclasses import dataclass

from .calculus import EPoint

__all__ = ["SplitMix64", "Box", "sample_points", "DEFAULT_SEED"]

_M64 = (1 << 64) - 1

DEFAULT_SEED = 0xA1B2


class SplitMix64:
    """splitmix64: tiny, seedable, platform-independent."""

    def __init__(self, seed: int):
        self._state = seed & _M64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _M64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
        return (z ^ (z >> 31)) & _M64

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        u = (self.next_u64() >> 11) * 2.0**-53
        return lo + (hi - lo) * u


@dataclass(frozen=True)
class Box:
    """Sampling ranges: one (lo, hi) per base coordinate plus one for y0.

    Defaults keep y0 away from 0 so that fiber-degenerate user fields
    (1/y0, log(y0), ...) stay evaluable.
    """

    x_ranges: tuple
    y_range: tuple

    def __post_init__(self):
        object.__setattr__(
            self, "x_ranges", tuple((float(a), float(b)) for a, b in self.x_ranges)
        )
        object.__setattr__(
            self, "y_range", (float(self.y_range[0]), float(self.y_range[1]))
        )
        for lo, hi in self.x_ranges + (self.y_range,):
            if not lo < hi:
                raise ValueError(f"empty sampling range [{lo}, {hi}]")

    @property
    def m(self) -> int:
        return len(self.x_ranges)

    @staticmethod
    def default(m: int) -> "Box":
        return Box(tuple((-1.0, 1.0) for _ in range(m)), (0.1, 2.0))


def sample_points(box: Box, n: int, seed: int = DEFAULT_SEED) -> list:
    """n quasi-random points in the box, deterministic in (box, n, seed)."""
    rng = SplitMix64(seed)
    points = []
    for _ in range(n):
        xs = tuple(rng.uniform(lo, hi) for lo, hi in box.x_ranges)
        y = rng.uniform(*box.y_range)
        points.append(EPoint(xs, y))
    return points
