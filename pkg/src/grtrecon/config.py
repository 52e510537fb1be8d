"""Flat key-value experiment configuration.

The config file is plain text, one `dotted.key = value` per line, `#`
comments allowed.  Unknown keys are rejected with a diagnostic naming the
key.  `ExperimentConfig.write` emits the full effective configuration, so a
written-back config reproduces the run exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Tuple

import numpy as np

from .dtb import DtbConfig
from .geometry import GrtModel, circular_grt, classical_radon
from .grids import ImageGrid, SinogramGrid
from .phantom import Phantom, disk_phantom
from .recon import SolverConfig
from .sampling import KernelSpec, bspline_spec, keys_spec


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    model_kind: str = "circular"          # circular | classical-radon
    model_scan_radius: float = 10.0
    phantom_center_x: float = 1.0
    phantom_center_y: float = 1.0
    phantom_radius: float = 2.0
    phantom_inside: float = 1.0
    phantom_outside: float = 0.0
    boundary_beta0_over_pi: float = -0.17
    coarse_n_alpha: int = 300
    coarse_n_p: int = 451
    dense_n_alpha: int = 800
    dense_n_p: int = 1201
    image_n: int = 801
    image_half_extent: float = 3.7
    kernel_alpha: str = "keys"
    kernel_p: str = "keys"
    solver_kappa: float = 0.5
    solver_step_rule: str = "inverse-lipschitz"
    solver_power_iters: int = 30
    solver_fixed_step: float = 0.0
    solver_stop_tol: float = 1e-6
    solver_stop_consecutive: int = 3
    solver_max_iters: int = 2000
    dtb_lambda_max: float = 400.0
    dtb_quad_points: int = 64
    dtb_r_min: float = -8.0
    dtb_r_max: float = 8.0
    dtb_r_step: float = 0.05
    compare_window_lo: float = -6.0
    compare_window_hi: float = 6.0
    compare_step: float = 0.25
    output_dir: str = "out"

    # --- file format ------------------------------------------------------

    _KEYMAP = None  # built lazily: dotted key -> field name

    @classmethod
    def _keymap(cls):
        if cls._KEYMAP is None:
            cls._KEYMAP = {f.name.replace("_", ".", 1): f.name
                           for f in fields(cls)}
        return cls._KEYMAP

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        cfg = cls()
        keymap = cls._keymap()
        with open(path) as f:
            for lineno, raw in enumerate(f, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
                key, val = (s.strip() for s in line.split("=", 1))
                fname = keymap.get(key)
                if fname is None:
                    raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
                ftype = type(getattr(cfg, fname))
                try:
                    if ftype is int:
                        setattr(cfg, fname, int(val))
                    elif ftype is float:
                        setattr(cfg, fname, float(val))
                    else:
                        setattr(cfg, fname, val)
                except ValueError as e:
                    raise ConfigError(f"{path}:{lineno}: bad value for "
                                      f"{key!r}: {e}") from None
        cfg.validate()
        return cfg

    def write(self, path) -> None:
        keymap = self._keymap()
        with open(path, "w") as f:
            for key, fname in keymap.items():
                f.write(f"{key} = {getattr(self, fname)}\n")

    def validate(self) -> None:
        if self.model_kind not in ("circular", "classical-radon"):
            raise ConfigError(f"model.kind must be 'circular' or "
                              f"'classical-radon', got {self.model_kind!r}")
        if self.phantom_radius <= 0:
            raise ConfigError("phantom.radius must be positive")
        for key in ("coarse_n_alpha", "coarse_n_p", "dense_n_alpha",
                    "dense_n_p", "image_n"):
            if getattr(self, key) < 2:
                raise ConfigError(f"{key.replace('_', '.', 1)} must be >= 2")
        if self.kernel_alpha not in _KERNELS or self.kernel_p not in _KERNELS:
            raise ConfigError(f"unknown kernel (choices: {sorted(_KERNELS)})")
        if self.solver_step_rule not in ("inverse-lipschitz", "fixed"):
            raise ConfigError("solver.step_rule must be 'inverse-lipschitz' "
                              "or 'fixed'")
        if self.solver_step_rule == "fixed" and self.solver_fixed_step <= 0:
            raise ConfigError("solver.fixed_step must be positive with the "
                              "fixed step rule")
        if self.solver_max_iters < 0:
            raise ConfigError("solver.max_iters must be >= 0")
        reach = self.phantom_radius + max(abs(self.phantom_center_x),
                                          abs(self.phantom_center_y))
        if reach > self.image_half_extent:
            raise ConfigError("image.half_extent: image grid does not cover "
                              "the phantom support")

    # --- derived objects --------------------------------------------------

    def model(self) -> GrtModel:
        if self.model_kind == "circular":
            return circular_grt(self.model_scan_radius)
        return classical_radon()

    def phantom(self) -> Phantom:
        return disk_phantom((self.phantom_center_x, self.phantom_center_y),
                            self.phantom_radius, self.phantom_inside,
                            self.phantom_outside)

    def p_range(self) -> Tuple[float, float]:
        half_diag = self.image_half_extent * np.sqrt(2.0)
        if self.model_kind == "circular":
            R = self.model_scan_radius
            return (R - half_diag, R + half_diag)
        return (-half_diag, half_diag)

    def coarse_grid(self) -> SinogramGrid:
        pmin, pmax = self.p_range()
        return SinogramGrid.full_scan(self.coarse_n_alpha, self.coarse_n_p,
                                      pmin, pmax)

    def dense_grid(self) -> SinogramGrid:
        pmin, pmax = self.p_range()
        return SinogramGrid.full_scan(self.dense_n_alpha, self.dense_n_p,
                                      pmin, pmax)

    def image_grid(self) -> ImageGrid:
        return ImageGrid.square(self.image_n, self.image_half_extent)

    def kernel(self, which: str) -> KernelSpec:
        name = self.kernel_alpha if which == "alpha" else self.kernel_p
        return _KERNELS[name]()

    def solver_config(self) -> SolverConfig:
        if self.solver_step_rule == "fixed":
            rule = ("fixed", self.solver_fixed_step)
        else:
            rule = ("inverse-lipschitz", self.solver_power_iters)
        return SolverConfig(
            kappa=self.solver_kappa,
            epsilon=self.coarse_grid().epsilon,
            step_rule=rule,
            stop_tol=self.solver_stop_tol,
            stop_consecutive=self.solver_stop_consecutive,
            max_iters=self.solver_max_iters,
        )

    def dtb_config(self) -> DtbConfig:
        n = int(round((self.dtb_r_max - self.dtb_r_min) / self.dtb_r_step))
        r_grid = self.dtb_r_min + self.dtb_r_step * np.arange(n + 1)
        return DtbConfig(
            kappa=self.solver_kappa,
            mu=self.coarse_grid().mu,
            kernel_alpha=self.kernel("alpha"),
            kernel_p=self.kernel("p"),
            lambda_max=self.dtb_lambda_max,
            quad_points=self.dtb_quad_points,
            r_grid=r_grid,
        )

    def beta0(self) -> float:
        return self.boundary_beta0_over_pi * np.pi

    def x0(self) -> np.ndarray:
        b = self.beta0()
        return np.array([self.phantom_center_x + self.phantom_radius * np.cos(b),
                         self.phantom_center_y + self.phantom_radius * np.sin(b)])

    def theta0(self) -> np.ndarray:
        ph = self.phantom()
        g = np.asarray(ph.grad_h(self.x0()), dtype=float)
        return g / np.linalg.norm(g)

    def x_check_grid(self) -> np.ndarray:
        # symmetric grid containing 0, padded one step beyond the window
        n = int(np.ceil(max(abs(self.compare_window_lo),
                            abs(self.compare_window_hi)) / self.compare_step)) + 1
        return self.compare_step * np.arange(-n, n + 1)


_KERNELS = {
    "keys": keys_spec,
    "bspline1": lambda: bspline_spec(1),
    "bspline2": lambda: bspline_spec(2),
    "bspline3": lambda: bspline_spec(3),
}
