"""
Rectangular parameter grids over ``(alpha1, alpha3)`` at fixed ``alpha2``.

Node coordinates are computed from integer indices, ``lo + i * step``,
rounded to 12 decimals, so that grids never accumulate floating-point drift
and the same node always gets the same coordinates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Tuple

from .functional import FunctionalParams

__all__ = ["Axis", "Grid", "DEFAULT_GRID", "COARSE_GRID", "fmt"]


def fmt(v) -> str:
    """Float formatting used in every CSV: 9 significant digits; empty for
    ``None``."""
    if v is None:
        return ""
    if isinstance(v, (bool,)):
        return "1" if v else "0"
    if isinstance(v, int):
        return str(v)
    return format(float(v), ".9g")


@dataclass(frozen=True)
class Axis:
    """Points ``lo, lo + step, ..., hi`` (``hi`` included when on the grid)."""

    lo: float
    hi: float
    step: float

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("grid step must be positive")
        if self.hi < self.lo:
            raise ValueError("grid upper end below lower end")

    @property
    def size(self) -> int:
        return int(math.floor((self.hi - self.lo) / self.step + 1e-9)) + 1

    def __getitem__(self, i: int) -> float:
        if not 0 <= i < self.size:
            raise IndexError(i)
        return round(self.lo + i * self.step, 12)

    def __iter__(self):
        return (self[i] for i in range(self.size))


@dataclass(frozen=True)
class Grid:
    """Nodes ``(alpha1, alpha2, alpha3)``, ``alpha1`` varying slowest."""

    alpha1: Axis = Axis(0.0, 4.0, 0.025)
    alpha3: Axis = Axis(0.0, 2.0, 0.025)
    alpha2: int = 1

    @classmethod
    def regular(cls, step: float, alpha2: int = 1, a1_max: float = 4.0,
                a3_max: float = 2.0) -> "Grid":
        return cls(Axis(0.0, a1_max, step), Axis(0.0, a3_max, step), alpha2)

    def __len__(self) -> int:
        return self.alpha1.size * self.alpha3.size

    def nodes(self) -> Iterator[Tuple[int, int, FunctionalParams]]:
        """Yield ``(i1, i3, params)``."""
        for i in range(self.alpha1.size):
            for j in range(self.alpha3.size):
                yield i, j, FunctionalParams(self.alpha1[i], self.alpha2,
                                             self.alpha3[j])


DEFAULT_GRID = Grid()
"""The full 0.025-step grid, 161 x 81 = 13041 nodes."""

COARSE_GRID = Grid.regular(0.25)
"""The 0.25-step subgrid, 17 x 9 = 153 nodes."""
