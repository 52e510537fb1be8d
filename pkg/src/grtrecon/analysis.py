"""Edge-profile extraction and comparison against the predicted transition.

The profile is sampled along the boundary normal at x0 in units of the data
step epsilon; the prediction is baseline + jump * curve(x_check), where the
baseline is the measured value at x0 itself (the theorem is a statement
about the difference from that value).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .dtb import DtbCurve
from .grids import Image


@dataclass
class ProfileReport:
    x_check: np.ndarray
    measured: np.ndarray
    predicted: np.ndarray
    baseline: float
    max_abs_dev: float
    rms_dev: float
    window: Tuple[float, float]

    def save_csv(self, path) -> None:
        with open(path, "w") as f:
            f.write("x_check,measured,predicted\n")
            for xc, m, p in zip(self.x_check, self.measured, self.predicted):
                f.write(f"{xc:.17g},{m:.17g},{p:.17g}\n")

    def save_metrics(self, path) -> None:
        with open(path, "w") as f:
            f.write(f"baseline={self.baseline:.17g}\n")
            f.write(f"window_lo={self.window[0]:.17g}\n")
            f.write(f"window_hi={self.window[1]:.17g}\n")
            f.write(f"max_abs_dev={self.max_abs_dev:.17g}\n")
            f.write(f"rms_dev={self.rms_dev:.17g}\n")

    def summary(self) -> str:
        return (f"profile window [{self.window[0]:g}, {self.window[1]:g}] "
                f"(units of eps): baseline={self.baseline:.6g}, "
                f"max|dev|={self.max_abs_dev:.6g}, rms={self.rms_dev:.6g}")


def extract_profile(img: Image, x0, theta0, epsilon: float,
                    x_check_grid) -> np.ndarray:
    """Bilinear samples of the image at x0 + eps * x_check * theta0.
    Raises if any sample point falls outside the grid."""
    x0 = np.asarray(x0, dtype=float)
    theta0 = np.asarray(theta0, dtype=float)
    theta0 = theta0 / np.linalg.norm(theta0)
    xc = np.asarray(x_check_grid, dtype=float)
    pts = x0[None, :] + epsilon * xc[:, None] * theta0[None, :]
    g = img.grid
    if (pts[:, 0].min() < g.x_min or pts[:, 0].max() > g.x_max
            or pts[:, 1].min() < g.y_min or pts[:, 1].max() > g.y_max):
        raise ValueError("profile sample points fall outside the image grid")
    return img.sample_bilinear(pts)


def compare(x_check, measured, curve: DtbCurve, delta_f: float,
            window: Tuple[float, float]) -> ProfileReport:
    """Predicted(x) = measured(0) + delta_f * curve(x); metrics taken over
    the stated window.  x_check must contain 0 (the baseline sample)."""
    x_check = np.asarray(x_check, dtype=float)
    measured = np.asarray(measured, dtype=float)
    if np.any(np.diff(x_check) <= 0):
        raise ValueError("x_check must be strictly increasing")
    i0 = np.argmin(np.abs(x_check))
    if abs(x_check[i0]) > 1e-12:
        raise ValueError("x_check grid must include 0 for the baseline")
    lo, hi = window
    if x_check[0] > lo or x_check[-1] < hi:
        raise ValueError("x_check grid does not cover the comparison window")
    if curve.r_values[0] > lo or curve.r_values[-1] < hi:
        raise ValueError("DTB curve does not cover the comparison window")
    baseline = float(measured[i0])
    predicted = baseline + delta_f * curve(x_check)
    sel = (x_check >= lo) & (x_check <= hi)
    dev = measured[sel] - predicted[sel]
    return ProfileReport(
        x_check=x_check,
        measured=measured,
        predicted=predicted,
        baseline=baseline,
        max_abs_dev=float(np.max(np.abs(dev))),
        rms_dev=float(np.sqrt(np.mean(dev * dev))),
        window=(float(lo), float(hi)),
    )
