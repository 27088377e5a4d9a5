"""Planar primitives, edge handling and the constants of the pair lens."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

#: Area (divided by pi) of the intersection of two unit discs whose centres
#: lie on each other's circumference.
GAMMA = 2.0 / 3.0 - math.sqrt(3.0) / (2.0 * math.pi)


def gamma_constant() -> float:
    """Return ``2/3 - sqrt(3)/(2 pi)`` (about 0.3910)."""
    return GAMMA


def lens_union_area(r: float) -> float:
    """Area of ``B(x, r) U B(y, r)`` for two centres at distance ``r``.

    This is the region that must be empty of other atoms for ``x`` and ``y``
    to be mutual nearest neighbours.
    """
    if r < 0:
        raise DomainError(f"radius must be non-negative, got {r}")
    return math.pi * r * r * (2.0 - GAMMA)


@dataclass(frozen=True)
class Window:
    """Axis-aligned rectangle ``[x0, x0 + width) x [y0, y0 + height)``."""

    width: float
    height: float
    x0: float = 0.0
    y0: float = 0.0

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise DomainError(f"window sides must be positive, got {self.width}x{self.height}")
        if not all(map(math.isfinite, (self.width, self.height, self.x0, self.y0))):
            raise DomainError("window geometry must be finite")

    @classmethod
    def square(cls, side: float) -> "Window":
        return cls(side, side)

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> np.ndarray:
        return np.array([self.x0 + 0.5 * self.width, self.y0 + 0.5 * self.height])

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        return self.x0, self.y0, self.x0 + self.width, self.y0 + self.height

    def contains(self, points) -> np.ndarray:
        """Boolean mask of the points lying in the closed window."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        x1, y1, x2, y2 = self.bounds
        return (p[:, 0] >= x1) & (p[:, 0] <= x2) & (p[:, 1] >= y1) & (p[:, 1] <= y2)

    def erode(self, margin: float) -> "Window":
        """Window shrunk by ``margin`` on every side."""
        if margin < 0 or 2 * margin >= min(self.width, self.height):
            raise DomainError(f"margin {margin} is incompatible with a {self.width}x{self.height} window")
        return Window(self.width - 2 * margin, self.height - 2 * margin,
                      self.x0 + margin, self.y0 + margin)

    def scaled(self, c: float) -> "Window":
        return Window(self.width * c, self.height * c, self.x0 * c, self.y0 * c)


@dataclass(frozen=True)
class BoundaryPolicy:
    """How the window edge is treated.

    ``kind="guard-margin"`` uses plain Euclidean geometry and measures
    statistics only inside the window eroded by ``margin``;
    ``kind="toroidal"`` wraps the window onto a torus. A ``margin`` of
    ``None`` means the default of five mean spacings, ``5 / sqrt(lambda)``.
    """

    kind: str = "guard-margin"
    margin: float | None = None

    def __post_init__(self):
        if self.kind not in ("guard-margin", "toroidal"):
            raise DomainError(f"unknown boundary policy {self.kind!r}")
        if self.margin is not None and self.margin < 0:
            raise DomainError("margin must be non-negative")

    @classmethod
    def toroidal(cls) -> "BoundaryPolicy":
        return cls("toroidal", 0.0)

    @property
    def is_toroidal(self) -> bool:
        return self.kind == "toroidal"

    def resolve_margin(self, lam: float) -> float:
        if self.is_toroidal:
            return 0.0
        if self.margin is not None:
            return self.margin
        return 5.0 / math.sqrt(lam) if lam > 0 else 0.0

    def interior(self, window: Window, lam: float) -> Window:
        """Sub-window on which statistics are reported."""
        if self.is_toroidal:
            return window
        return window.erode(self.resolve_margin(lam))


def displacement(a, b, window: Window, policy: BoundaryPolicy) -> np.ndarray:
    """Vector ``b - a``, wrapped to the shortest torus image when toroidal."""
    d = np.asarray(b, dtype=float) - np.asarray(a, dtype=float)
    if policy.is_toroidal:
        sides = np.array([window.width, window.height])
        d = d - sides * np.round(d / sides)
    return d


def distance(a, b, window: Window, policy: BoundaryPolicy = BoundaryPolicy()):
    """Distance between points (broadcasting over leading axes).

    Raises
    ------
    DomainError
        If any point lies outside the window.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if not (window.contains(a.reshape(-1, 2)).all() and window.contains(b.reshape(-1, 2)).all()):
        raise DomainError("points must lie inside the window")
    d = displacement(a, b, window, policy)
    out = np.hypot(d[..., 0], d[..., 1])
    return float(out) if out.ndim == 0 else out
