"""Generalized Radon transform data synthesis, Tikhonov-regularized
iterative reconstruction, and closed-form edge-transition prediction."""

from .analysis import ProfileReport, compare, extract_profile
from .config import ConfigError, ExperimentConfig
from .dtb import DtbConfig, DtbCurve, combined_dtb, h_l, r_kernel, upsilon_l
from .geometry import (GrtModel, Tangency, check_curvature_gap, circular_grt,
                       classical_radon, curvature_of_curve, delta_phi,
                       find_tangencies)
from .grids import Image, ImageGrid, Sinogram, SinogramGrid
from .phantom import Phantom, disk_phantom, rasterize
from .recon import SolverConfig, adjoint, cost, forward, gradient, solve
from .sampling import (KernelSpec, bspline, keys_kernel, keys_spec,
                       synthesize_sinogram, upsample)

__version__ = "0.1.0"
