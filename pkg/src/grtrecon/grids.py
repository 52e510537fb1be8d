"""Gridded data containers shared by the sampling and reconstruction code.

Sinograms live on a uniform (alpha, p) grid; images live on a uniform
pixel-node grid over a square region.  Both carry a small binary file
format (magic string + little-endian float64 header + row-major float64
payload) plus CSV export for inspection.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

SINO_MAGIC = b"GRTSINO1"
IMG_MAGIC = b"GRTIMG01"


@dataclass(frozen=True)
class SinogramGrid:
    """Uniform grid in (alpha, p). alpha_j = alpha0 + j*d_alpha, p_k = p0 + k*d_p.

    epsilon is the p-step; mu = d_alpha / epsilon.
    """

    n_alpha: int
    n_p: int
    alpha0: float
    d_alpha: float
    p0: float
    d_p: float

    @property
    def epsilon(self) -> float:
        return self.d_p

    @property
    def mu(self) -> float:
        return self.d_alpha / self.d_p

    def alphas(self) -> np.ndarray:
        return self.alpha0 + self.d_alpha * np.arange(self.n_alpha)

    def ps(self) -> np.ndarray:
        return self.p0 + self.d_p * np.arange(self.n_p)

    @staticmethod
    def full_scan(n_alpha: int, n_p: int, p_min: float, p_max: float,
                  alpha0: float = 0.0) -> "SinogramGrid":
        """Full circular scan: alpha covers [0, 2pi) without overlap,
        p covers [p_min, p_max] inclusive with n_p nodes."""
        return SinogramGrid(
            n_alpha=n_alpha,
            n_p=n_p,
            alpha0=alpha0,
            d_alpha=2.0 * np.pi / n_alpha,
            p0=p_min,
            d_p=(p_max - p_min) / (n_p - 1),
        )


@dataclass
class Sinogram:
    grid: SinogramGrid
    values: np.ndarray = field(repr=False)  # (n_alpha, n_p) float64

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        if self.values.shape != (self.grid.n_alpha, self.grid.n_p):
            raise ValueError(
                f"sinogram shape {self.values.shape} does not match grid "
                f"({self.grid.n_alpha}, {self.grid.n_p})")

    def save(self, path) -> None:
        g = self.grid
        with open(path, "wb") as f:
            f.write(SINO_MAGIC)
            f.write(struct.pack("<2q4d", g.n_alpha, g.n_p,
                                g.alpha0, g.d_alpha, g.p0, g.d_p))
            f.write(self.values.astype("<f8").tobytes())

    @staticmethod
    def load(path) -> "Sinogram":
        with open(path, "rb") as f:
            magic = f.read(len(SINO_MAGIC))
            if magic != SINO_MAGIC:
                raise IOError(f"{path}: not a sinogram file (bad magic {magic!r})")
            n_alpha, n_p, alpha0, d_alpha, p0, d_p = struct.unpack("<2q4d", f.read(48))
            data = np.frombuffer(f.read(), dtype="<f8")
        if data.size != n_alpha * n_p:
            raise IOError(f"{path}: truncated sinogram payload")
        grid = SinogramGrid(n_alpha, n_p, alpha0, d_alpha, p0, d_p)
        return Sinogram(grid, data.reshape(n_alpha, n_p).copy())

    def save_csv(self, path) -> None:
        alphas = self.grid.alphas()
        ps = self.grid.ps()
        with open(path, "w") as f:
            f.write("alpha,p,value\n")
            for i, a in enumerate(alphas):
                for k, p in enumerate(ps):
                    f.write(f"{a:.17g},{p:.17g},{self.values[i, k]:.17g}\n")


@dataclass(frozen=True)
class ImageGrid:
    """Pixel nodes x_i = x_min + i*dx (i = 0..n_x-1, x_{n_x-1} = x_max),
    same along y. Row index is x, column index is y."""

    n_x: int
    n_y: int
    x_min: float
    x_max: float
    y_min: float
    y_max: float

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n_x - 1)

    @property
    def dy(self) -> float:
        return (self.y_max - self.y_min) / (self.n_y - 1)

    def xs(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_x)

    def ys(self) -> np.ndarray:
        return np.linspace(self.y_min, self.y_max, self.n_y)

    @staticmethod
    def square(n: int, half_extent: float) -> "ImageGrid":
        return ImageGrid(n, n, -half_extent, half_extent, -half_extent, half_extent)


@dataclass
class Image:
    grid: ImageGrid
    values: np.ndarray = field(repr=False)  # (n_x, n_y) float64

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        if self.values.shape != (self.grid.n_x, self.grid.n_y):
            raise ValueError(
                f"image shape {self.values.shape} does not match grid "
                f"({self.grid.n_x}, {self.grid.n_y})")

    @staticmethod
    def zeros(grid: ImageGrid) -> "Image":
        return Image(grid, np.zeros((grid.n_x, grid.n_y)))

    def save(self, path) -> None:
        g = self.grid
        with open(path, "wb") as f:
            f.write(IMG_MAGIC)
            f.write(struct.pack("<2q4d", g.n_x, g.n_y,
                                g.x_min, g.x_max, g.y_min, g.y_max))
            f.write(self.values.astype("<f8").tobytes())

    @staticmethod
    def load(path) -> "Image":
        with open(path, "rb") as f:
            magic = f.read(len(IMG_MAGIC))
            if magic != IMG_MAGIC:
                raise IOError(f"{path}: not an image file (bad magic {magic!r})")
            n_x, n_y, x_min, x_max, y_min, y_max = struct.unpack("<2q4d", f.read(48))
            data = np.frombuffer(f.read(), dtype="<f8")
        if data.size != n_x * n_y:
            raise IOError(f"{path}: truncated image payload")
        grid = ImageGrid(n_x, n_y, x_min, x_max, y_min, y_max)
        return Image(grid, data.reshape(n_x, n_y).copy())

    def sample_bilinear(self, points: np.ndarray) -> np.ndarray:
        """Bilinear samples at points (m, 2); points outside the grid read 0."""
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        g = self.grid
        fx = (pts[:, 0] - g.x_min) / g.dx
        fy = (pts[:, 1] - g.y_min) / g.dy
        i0 = np.floor(fx).astype(np.int64)
        j0 = np.floor(fy).astype(np.int64)
        tx = fx - i0
        ty = fy - j0
        out = np.zeros(len(pts))
        v = self.values
        for di, dj, w in ((0, 0, (1 - tx) * (1 - ty)), (1, 0, tx * (1 - ty)),
                          (0, 1, (1 - tx) * ty), (1, 1, tx * ty)):
            ii = i0 + di
            jj = j0 + dj
            ok = (ii >= 0) & (ii < g.n_x) & (jj >= 0) & (jj < g.n_y)
            out[ok] += w[ok] * v[ii[ok], jj[ok]]
        return out
