"""Discrete forward/adjoint operators, the regularized cost, and the
gradient-descent solver.

The forward operator samples the image bilinearly along each data curve
(midpoint rule, step = half the smaller pixel size). The adjoint is the
exact transpose with respect to the weighted inner products
  <.,.>_V = sum d_alpha*d_p (.)(.)   on the dense sinogram grid,
  <.,.>_U = sum dx*dy (.)(.)         on the pixel grid,
so the gradient of the discrete cost is exact.  Iterates keep a zero
boundary ring (zero-trace condition of the continuous problem).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from . import _projectors as proj
from .geometry import GrtModel
from .grids import Image, ImageGrid, Sinogram, SinogramGrid

__all__ = ["ImageGrid", "Image", "SolverConfig", "IterationRecord",
           "forward", "adjoint", "cost", "gradient", "solve",
           "estimate_lipschitz"]


@dataclass
class SolverConfig:
    kappa: float
    epsilon: float          # data step entering the kappa*eps^3 penalty
    step_rule: Tuple = ("inverse-lipschitz", 30)  # or ("fixed", s)
    stop_tol: float = 1e-6
    stop_consecutive: int = 3
    max_iters: int = 2000

    def __post_init__(self):
        if self.stop_tol <= 0:
            raise ValueError("stop_tol must be positive")
        if self.max_iters < 0:
            raise ValueError("max_iters must be >= 0")

    @property
    def reg_weight(self) -> float:
        return self.kappa * self.epsilon ** 3


@dataclass
class IterationRecord:
    iteration: int
    cost: float
    update_linf: float
    step: float


def _grid_bounding_circle(grid: ImageGrid):
    gx = 0.5 * (grid.x_min + grid.x_max)
    gy = 0.5 * (grid.y_min + grid.y_max)
    rb = 0.5 * np.hypot(grid.x_max - grid.x_min, grid.y_max - grid.y_min)
    # one pixel of slack so bilinear footprints at the rim are not clipped
    return gx, gy, rb + max(grid.dx, grid.dy)


def _quad_step(grid: ImageGrid) -> float:
    return 0.5 * min(grid.dx, grid.dy)


def forward(model: GrtModel, img: Image, dense: SinogramGrid) -> Sinogram:
    """Apply the discrete GRT to an image, producing dense-grid data."""
    g = img.grid
    gx, gy, rb = _grid_bounding_circle(g)
    step = _quad_step(g)
    out = np.empty((dense.n_alpha, dense.n_p))
    if model.kind == "circle":
        proj.forward_circle(img.values, g.x_min, g.dx, g.y_min, g.dy,
                            model.scan_radius, dense.alphas(), dense.ps(),
                            step, gx, gy, rb, out)
    elif model.kind == "line":
        proj.forward_line(img.values, g.x_min, g.dx, g.y_min, g.dy,
                          dense.alphas(), dense.ps(), step, gx, gy, rb, out)
    else:
        raise NotImplementedError(
            f"no fast projector for model kind {model.kind!r}")
    return Sinogram(dense, out)


def adjoint(model: GrtModel, sino: Sinogram, grid: ImageGrid) -> Image:
    """Exact transpose of `forward` under the V/U weighted inner products."""
    gx, gy, rb = _grid_bounding_circle(grid)
    step = _quad_step(grid)
    dg = sino.grid
    if model.kind == "circle":
        acc = proj.adjoint_circle(sino.values, grid.x_min, grid.dx,
                                  grid.y_min, grid.dy, model.scan_radius,
                                  dg.alphas(), dg.ps(), step, gx, gy, rb,
                                  grid.n_x, grid.n_y)
    elif model.kind == "line":
        acc = proj.adjoint_line(sino.values, grid.x_min, grid.dx,
                                grid.y_min, grid.dy,
                                dg.alphas(), dg.ps(), step, gx, gy, rb,
                                grid.n_x, grid.n_y)
    else:
        raise NotImplementedError(
            f"no fast projector for model kind {model.kind!r}")
    scale = (dg.d_alpha * dg.d_p) / (grid.dx * grid.dy)
    return Image(grid, scale * acc.sum(axis=0))


def _grad_energy(values: np.ndarray, grid: ImageGrid) -> float:
    """sum |grad_h f|^2 dx dy with forward differences; the zero ring makes
    differences across the grid edge vanish."""
    gx = np.diff(values, axis=0) / grid.dx
    gy = np.diff(values, axis=1) / grid.dy
    return (np.sum(gx * gx) + np.sum(gy * gy)) * grid.dx * grid.dy


def _neg_laplacian(values: np.ndarray, grid: ImageGrid) -> np.ndarray:
    """5-point -Laplacian with zero Dirichlet padding (exact adjoint pair of
    the forward-difference energy)."""
    out = np.zeros_like(values)
    out += 2.0 * values / grid.dx ** 2 + 2.0 * values / grid.dy ** 2
    out[1:, :] -= values[:-1, :] / grid.dx ** 2
    out[:-1, :] -= values[1:, :] / grid.dx ** 2
    out[:, 1:] -= values[:, :-1] / grid.dy ** 2
    out[:, :-1] -= values[:, 1:] / grid.dy ** 2
    return out


def _zero_ring(values: np.ndarray) -> np.ndarray:
    values[0, :] = 0.0
    values[-1, :] = 0.0
    values[:, 0] = 0.0
    values[:, -1] = 0.0
    return values


def data_norm_sq(sino: Sinogram) -> float:
    g = sino.grid
    return float(g.d_alpha * g.d_p * np.sum(sino.values ** 2))


def cost(model: GrtModel, img: Image, data: Sinogram, cfg: SolverConfig) -> float:
    """Discretized cost: weighted squared residual + kappa*eps^3 gradient energy."""
    res = forward(model, img, data.grid).values - data.values
    g = data.grid
    return float(g.d_alpha * g.d_p * np.sum(res * res)
                 + cfg.reg_weight * _grad_energy(img.values, img.grid))


def gradient(model: GrtModel, img: Image, data: Sinogram,
             cfg: SolverConfig) -> Image:
    """Exact gradient of the discrete cost in the U inner product:
    2*(R^*(Rf - g) + kappa*eps^3 * (-Lap) f), zero on the boundary ring."""
    res = forward(model, img, data.grid)
    res = Sinogram(data.grid, res.values - data.values)
    back = adjoint(model, res, img.grid).values
    vals = 2.0 * (back + cfg.reg_weight * _neg_laplacian(img.values, img.grid))
    return Image(img.grid, _zero_ring(vals))


def estimate_lipschitz(model: GrtModel, grid: ImageGrid, dense: SinogramGrid,
                       cfg: SolverConfig, iters: int = 30, seed: int = 0) -> float:
    """Largest eigenvalue of the cost Hessian v -> 2(R*R v + kappa*eps^3(-Lap)v)
    by power iteration on interior pixels."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((grid.n_x, grid.n_y))
    _zero_ring(v)
    v /= np.linalg.norm(v)
    lam = 1.0
    for _ in range(iters):
        rv = forward(model, Image(grid, v), dense)
        av = 2.0 * (adjoint(model, rv, grid).values
                    + cfg.reg_weight * _neg_laplacian(v, grid))
        _zero_ring(av)
        lam = float(np.linalg.norm(av))
        if lam == 0.0:
            return 1.0
        v = av / lam
    return lam


def solve(model: GrtModel, data: Sinogram, grid: ImageGrid,
          cfg: SolverConfig) -> Tuple[Image, List[IterationRecord], bool]:
    """Gradient descent on the discrete cost.

    Stops when the L-inf norm of the update stays below cfg.stop_tol for
    cfg.stop_consecutive consecutive iterations.  Returns (image, log,
    converged)."""
    rule = cfg.step_rule[0]
    if rule == "fixed":
        step = float(cfg.step_rule[1])
    elif rule == "inverse-lipschitz":
        iters = int(cfg.step_rule[1]) if len(cfg.step_rule) > 1 else 30
        step = 1.0 / estimate_lipschitz(model, grid, data.grid, cfg, iters)
    else:
        raise ValueError(f"unknown step rule {rule!r}")

    f = np.zeros((grid.n_x, grid.n_y))
    g = data.grid
    w_v = g.d_alpha * g.d_p
    log: List[IterationRecord] = []
    consecutive = 0
    converged = False
    for it in range(cfg.max_iters):
        res = forward(model, Image(grid, f), g).values - data.values
        back = adjoint(model, Sinogram(g, res), grid).values
        grad = 2.0 * (back + cfg.reg_weight * _neg_laplacian(f, grid))
        _zero_ring(grad)
        cur_cost = float(w_v * np.sum(res * res)
                         + cfg.reg_weight * _grad_energy(f, grid))
        update = step * grad
        f -= update
        linf = float(np.max(np.abs(update)))
        log.append(IterationRecord(it, cur_cost, linf, step))
        consecutive = consecutive + 1 if linf < cfg.stop_tol else 0
        if consecutive >= cfg.stop_consecutive:
            converged = True
            break
    return Image(grid, f), log, converged


def save_iteration_log(log: List[IterationRecord], path) -> None:
    with open(path, "w") as f:
        f.write("iter,cost,update_linf,step\n")
        for rec in log:
            f.write(f"{rec.iteration},{rec.cost:.17g},"
                    f"{rec.update_linf:.17g},{rec.step:.17g}\n")
