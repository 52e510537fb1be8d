"""Piecewise-constant phantoms with a smooth jump boundary.

The phantom is defined by H(x): the boundary is S = {H = 0}, H < 0 inside.
The jump value is taken in the +grad H direction (outside minus inside).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .grids import Image, ImageGrid


@dataclass(frozen=True)
class Phantom:
    h: Callable[[np.ndarray], float]
    grad_h: Callable[[np.ndarray], np.ndarray]
    inside_value: float
    outside_value: float
    # set for disk phantoms; enables closed-form paths elsewhere
    center: Optional[Tuple[float, float]] = None
    radius: Optional[float] = None

    @property
    def jump(self) -> float:
        """Value change across S along +grad H (H < 0 inside)."""
        return self.outside_value - self.inside_value

    def value(self, x) -> float:
        """Phantom value at a point; exactly on S returns the two-sided mean."""
        hx = self.h(np.asarray(x, dtype=float))
        if hx < 0:
            return self.inside_value
        if hx > 0:
            return self.outside_value
        return 0.5 * (self.inside_value + self.outside_value)

    def values(self, pts: np.ndarray) -> np.ndarray:
        """Vectorized phantom values at points (m, 2)."""
        pts = np.asarray(pts, dtype=float)
        hv = np.array([self.h(p) for p in pts])
        return np.where(hv < 0, self.inside_value,
                        np.where(hv > 0, self.outside_value,
                                 0.5 * (self.inside_value + self.outside_value)))


def disk_phantom(center, radius: float, inside: float = 1.0,
                 outside: float = 0.0) -> Phantom:
    """Disk of given center/radius: H(x) = |x - center| - radius."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    c = np.asarray(center, dtype=float)

    def h(x):
        return float(np.linalg.norm(np.asarray(x, dtype=float) - c)) - radius

    def grad_h(x):
        d = np.asarray(x, dtype=float) - c
        n = np.linalg.norm(d)
        if n == 0.0:
            return np.array([1.0, 0.0])
        return d / n

    return Phantom(h=h, grad_h=grad_h, inside_value=inside, outside_value=outside,
                   center=(float(c[0]), float(c[1])), radius=float(radius))


def boundary_point(phantom: Phantom, beta: float) -> np.ndarray:
    """Point on a disk phantom boundary at polar angle beta."""
    if phantom.radius is None:
        raise ValueError("boundary_point requires a disk phantom")
    c = np.asarray(phantom.center, dtype=float)
    return c + phantom.radius * np.array([np.cos(beta), np.sin(beta)])


def rasterize(phantom: Phantom, grid: ImageGrid) -> Image:
    """Pixel-center sampling of the phantom (no anti-aliasing: the sinogram
    synthesis never consumes this; it is for display/comparison only)."""
    if phantom.radius is not None:
        # fast analytic path for disks
        xs = grid.xs()[:, None]
        ys = grid.ys()[None, :]
        cx, cy = phantom.center
        d = np.hypot(xs - cx, ys - cy) - phantom.radius
        vals = np.where(d < 0, phantom.inside_value,
                        np.where(d > 0, phantom.outside_value,
                                 0.5 * (phantom.inside_value + phantom.outside_value)))
        return Image(grid, vals)
    xs = grid.xs()
    ys = grid.ys()
    vals = np.empty((grid.n_x, grid.n_y))
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            vals[i, j] = phantom.value((x, y))
    return Image(grid, vals)
