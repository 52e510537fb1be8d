"""GRT model geometry: defining functions, differential quantities, tangencies.

A model is a family of integration curves S_(alpha,p) = {x : Phi(x, alpha) = p}
with a smooth weight W(x, y).  Two concrete models are provided: the circular
GRT (curves are circles of radius p centered at R*(cos a, sin a)) and the
classical Radon transform (curves are lines alpha_vec . x = p).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

TWO_PI = 2.0 * np.pi


class ModelViolationWarning(UserWarning):
    """Raised-as-warning when a model assumption is violated numerically
    (e.g. tangency of order > 1)."""


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def _perp(v: np.ndarray) -> np.ndarray:
    """Rotate by +90 degrees."""
    return np.array([-v[1], v[0]])


def wrap_angle(a: float) -> float:
    """Reduce to [0, 2*pi)."""
    return a % TWO_PI


def angle_distance(a: float, b: float) -> float:
    """Wrap-aware distance on the circle [0, 2*pi)."""
    d = (a - b) % TWO_PI
    return min(d, TWO_PI - d)


@dataclass(frozen=True)
class GrtModel:
    """Defining function Phi, weight W and their analytic derivatives.

    alpha is always taken on [0, 2*pi) with endpoint identification.
    `kind` tags models with an analytic curve parameterization that the
    fast projectors understand ("circle" with scan radius, or "line").
    """

    phi: Callable[[np.ndarray, float], float]
    weight: Callable[[np.ndarray, Tuple[float, float]], float]
    grad_x_phi: Callable[[np.ndarray, float], np.ndarray]
    dalpha_phi: Callable[[np.ndarray, float], float]
    grad_x_dalpha_phi: Callable[[np.ndarray, float], np.ndarray]
    p_domain: Tuple[float, float]
    kind: str = "generic"
    scan_radius: float = 0.0


def circular_grt(scan_radius: float = 10.0) -> GrtModel:
    """Circular GRT: Phi(x, a) = |x - R*a_vec|, W = 1, curves are circles of
    radius p centered at R*a_vec.  p ranges over (0, 2R)."""
    R = float(scan_radius)

    def avec(a):
        return np.array([np.cos(a), np.sin(a)])

    def phi(x, a):
        return float(np.linalg.norm(np.asarray(x, dtype=float) - R * avec(a)))

    def grad_x_phi(x, a):
        d = np.asarray(x, dtype=float) - R * avec(a)
        return d / np.linalg.norm(d)

    def dalpha_phi(x, a):
        d = np.asarray(x, dtype=float) - R * avec(a)
        aperp = np.array([-np.sin(a), np.cos(a)])
        return float(-R * (d @ aperp) / np.linalg.norm(d))

    def grad_x_dalpha_phi(x, a):
        d = np.asarray(x, dtype=float) - R * avec(a)
        rho = np.linalg.norm(d)
        theta = d / rho
        aperp = np.array([-np.sin(a), np.cos(a)])
        return -R * (aperp - (theta @ aperp) * theta) / rho

    return GrtModel(
        phi=phi,
        weight=lambda x, y: 1.0,
        grad_x_phi=grad_x_phi,
        dalpha_phi=dalpha_phi,
        grad_x_dalpha_phi=grad_x_dalpha_phi,
        p_domain=(0.0, 2.0 * R),
        kind="circle",
        scan_radius=R,
    )


def classical_radon() -> GrtModel:
    """Classical Radon transform: Phi(x, a) = a_vec . x, W = 1, curves are lines."""

    def avec(a):
        return np.array([np.cos(a), np.sin(a)])

    def aperp(a):
        return np.array([-np.sin(a), np.cos(a)])

    return GrtModel(
        phi=lambda x, a: float(avec(a) @ np.asarray(x, dtype=float)),
        weight=lambda x, y: 1.0,
        grad_x_phi=lambda x, a: avec(a),
        dalpha_phi=lambda x, a: float(aperp(a) @ np.asarray(x, dtype=float)),
        grad_x_dalpha_phi=lambda x, a: aperp(a),
        p_domain=(-np.inf, np.inf),
        kind="line",
    )


@dataclass(frozen=True)
class Tangency:
    """A data point y_l = (alpha_l, p_l) whose curve is tangent to the phantom
    boundary at x0, with the derived quantities entering the transition
    prediction.  theta_l is oriented so that theta_l . grad H(x0) > 0;
    dalpha and delta_phi are the raw model values at (x0, alpha_l)."""

    alpha_l: float
    p_l: float
    theta_l: np.ndarray
    grad_norm: float
    dalpha: float
    delta_phi: float
    nu_l: float


def delta_phi(model: GrtModel, x, alpha: float) -> float:
    """det of the 2x2 matrix with rows grad_x Phi and grad_x Phi'_alpha."""
    g = model.grad_x_phi(x, alpha)
    ga = model.grad_x_dalpha_phi(x, alpha)
    return float(g[0] * ga[1] - g[1] * ga[0])


def delta_phi_fd(model: GrtModel, x, alpha: float, h: Optional[float] = None) -> float:
    """Finite-difference oracle for delta_phi: both determinant rows from
    central differences of phi alone, Richardson-extrapolated to O(h^4)."""
    x = np.asarray(x, dtype=float)
    if h is None:
        h = 1e-4 * max(1.0, float(np.linalg.norm(x)))

    def det_at(step):
        def grad_phi(xx, a):
            return np.array([
                (model.phi(xx + [step, 0], a)
                 - model.phi(xx - [step, 0], a)) / (2 * step),
                (model.phi(xx + [0, step], a)
                 - model.phi(xx - [0, step], a)) / (2 * step),
            ])

        g = grad_phi(x, alpha)
        ga = (grad_phi(x, alpha + step) - grad_phi(x, alpha - step)) \
            / (2 * step)
        return g[0] * ga[1] - g[1] * ga[0]

    coarse, fine = det_at(h), det_at(h / 2)
    return float((4.0 * fine - coarse) / 3.0)


def _second_deriv_along(grad_fn, x, e, h: Optional[float] = None) -> float:
    """d^2 F (e, e) by central differencing the analytic gradient along e."""
    x = np.asarray(x, dtype=float)
    if h is None:
        h = 1e-5 * max(1.0, float(np.linalg.norm(x)))
    gp = np.asarray(grad_fn(x + h * e))
    gm = np.asarray(grad_fn(x - h * e))
    return float((gp - gm) @ e / (2 * h))


def curvature_of_curve(model: GrtModel, x, alpha: float) -> float:
    """Signed curvature of the integration curve through x at angle alpha:
    kappa = -d2Phi(e,e)/|grad Phi| with e the unit tangent."""
    g = np.asarray(model.grad_x_phi(x, alpha), dtype=float)
    gn = np.linalg.norm(g)
    if gn < 1e-12:
        raise ValueError("degenerate curve: |grad_x Phi| < 1e-12")
    e = _perp(g / gn)
    d2 = _second_deriv_along(lambda xx: model.grad_x_phi(xx, alpha), x, e)
    return -d2 / gn


def boundary_curvature(phantom, x) -> float:
    """Signed curvature of the phantom boundary S = {H = 0} at x."""
    g = np.asarray(phantom.grad_h(x), dtype=float)
    gn = np.linalg.norm(g)
    if gn < 1e-12:
        raise ValueError("degenerate boundary: |grad H| < 1e-12")
    e = _perp(g / gn)
    d2 = _second_deriv_along(phantom.grad_h, x, e)
    return -d2 / gn


def _make_tangency(model: GrtModel, phantom, x0, alpha: float) -> Tangency:
    x0 = np.asarray(x0, dtype=float)
    alpha = wrap_angle(alpha)
    p = model.phi(x0, alpha)
    g = np.asarray(model.grad_x_phi(x0, alpha), dtype=float)
    gn = float(np.linalg.norm(g))
    theta = g / gn
    gh = np.asarray(phantom.grad_h(x0), dtype=float)
    if theta @ gh < 0:
        theta = -theta
    dphi = delta_phi(model, x0, alpha)
    w = model.weight(x0, (alpha, p))
    return Tangency(
        alpha_l=alpha,
        p_l=p,
        theta_l=theta,
        grad_norm=gn,
        dalpha=float(model.dalpha_phi(x0, alpha)),
        delta_phi=dphi,
        nu_l=w * w * gn / abs(dphi),
    )


def _disk_circle_tangencies(model: GrtModel, phantom, x0) -> list:
    """Closed-form tangency fan for a circular GRT and a disk phantom.

    Solve |x_c + t*b0| = R for t (quadratic); the circle centers are
    R*a_vec_l = x_c + t_l*b0 and the radii follow from the geometry."""
    R = model.scan_radius
    xc = np.asarray(phantom.center, dtype=float)
    r = phantom.radius
    x0 = np.asarray(x0, dtype=float)
    b0 = (x0 - xc) / r
    bq = float(xc @ b0)
    disc = bq * bq - (float(xc @ xc) - R * R)
    if disc <= 0:
        return []
    s = np.sqrt(disc)
    t1 = -bq + s
    t2 = -bq - s
    out = []
    for t in (t1, t2):
        center = xc + t * b0
        alpha = np.arctan2(center[1], center[0])
        out.append(_make_tangency(model, phantom, x0, alpha))
    return out


def find_tangencies(model: GrtModel, phantom, x0, n_scan: int = 4096) -> list:
    """All data points y_l = (alpha_l, p_l) with S_{y_l} tangent to the
    boundary S at x0.  Returns [] when no tangency exists within the scan
    tolerance (x0 invisible from the data).

    Uses the closed-form construction for the circular GRT + disk phantom
    pair; otherwise scans alpha over [0, 2*pi) and refines by bisection."""
    x0 = np.asarray(x0, dtype=float)
    if abs(phantom.h(x0)) > 1e-8:
        raise ValueError("x0 does not lie on the phantom boundary")

    if model.kind == "circle" and getattr(phantom, "radius", None) is not None:
        return _disk_circle_tangencies(model, phantom, x0)

    gh = np.asarray(phantom.grad_h(x0), dtype=float)
    e = _perp(gh / np.linalg.norm(gh))

    def residual(a):
        return float(np.asarray(model.grad_x_phi(x0, a)) @ e)

    alphas = np.linspace(0.0, TWO_PI, n_scan, endpoint=False)
    res = np.array([residual(a) for a in alphas])
    roots = []
    for i in range(n_scan):
        j = (i + 1) % n_scan
        ra, rb = res[i], res[j]
        if ra == 0.0:
            roots.append(alphas[i])
            continue
        if ra * rb < 0:
            lo = alphas[i]
            hi = alphas[i] + TWO_PI / n_scan
            flo = ra
            while hi - lo > 1e-12:
                mid = 0.5 * (lo + hi)
                fm = residual(mid)
                if flo * fm <= 0:
                    hi = mid
                else:
                    lo, flo = mid, fm
            roots.append(0.5 * (lo + hi))

    out = []
    pmin, pmax = model.p_domain
    for a in roots:
        p = model.phi(x0, a)
        if pmin < p < pmax:
            out.append(_make_tangency(model, phantom, x0, a))
    return out


def check_curvature_gap(model: GrtModel, phantom, t: Tangency, x0) -> float:
    """Curvature separation at a tangency, with both curves oriented
    consistently: positive means the simple-tangency assumption holds.
    Warns (ModelViolationWarning) when the gap is below 1e-8, which signals
    tangency of order > 1."""
    k_s = abs(boundary_curvature(phantom, x0))
    k_sy = abs(curvature_of_curve(model, x0, t.alpha_l))
    gap = k_s - k_sy
    if abs(gap) < 1e-8:
        warnings.warn(
            f"curvature gap {gap:.3e} at alpha={t.alpha_l:.6f}: "
            "tangency of order > 1 (model assumption violated)",
            ModelViolationWarning,
        )
    return gap
