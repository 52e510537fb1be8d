"""Numba kernels for the discrete GRT forward projector and its exact
transpose.

Both models with an analytic curve parameterization are covered: circles of
radius p centered at R*(cos a, sin a), and lines a_vec . x = p.  The kernels
assume unit weight W, which holds for the bundled models.  Quadrature is the
midpoint rule along the curve restricted to the angular/param window that can
intersect the image grid's bounding circle.  The adjoint scatters exactly the
same (weight, arc element) pairs that the forward gathers, so the dot-product
identity holds up to rounding.
"""

import numpy as np
from numba import njit, prange

N_CHUNKS = 64  # fixed chunk count keeps the adjoint reduction order
               # independent of the thread count


@njit(cache=True, inline="always")
def _bilinear_gather(img, nx, ny, fx, fy):
    i0 = int(np.floor(fx))
    j0 = int(np.floor(fy))
    tx = fx - i0
    ty = fy - j0
    acc = 0.0
    if 0 <= i0 < nx and 0 <= j0 < ny:
        acc += (1 - tx) * (1 - ty) * img[i0, j0]
    if 0 <= i0 + 1 < nx and 0 <= j0 < ny:
        acc += tx * (1 - ty) * img[i0 + 1, j0]
    if 0 <= i0 < nx and 0 <= j0 + 1 < ny:
        acc += (1 - tx) * ty * img[i0, j0 + 1]
    if 0 <= i0 + 1 < nx and 0 <= j0 + 1 < ny:
        acc += tx * ty * img[i0 + 1, j0 + 1]
    return acc


@njit(cache=True, inline="always")
def _bilinear_scatter(img, nx, ny, fx, fy, val):
    i0 = int(np.floor(fx))
    j0 = int(np.floor(fy))
    tx = fx - i0
    ty = fy - j0
    if 0 <= i0 < nx and 0 <= j0 < ny:
        img[i0, j0] += (1 - tx) * (1 - ty) * val
    if 0 <= i0 + 1 < nx and 0 <= j0 < ny:
        img[i0 + 1, j0] += tx * (1 - ty) * val
    if 0 <= i0 < nx and 0 <= j0 + 1 < ny:
        img[i0, j0 + 1] += (1 - tx) * ty * val
    if 0 <= i0 + 1 < nx and 0 <= j0 + 1 < ny:
        img[i0 + 1, j0 + 1] += tx * ty * val


@njit(cache=True, inline="always")
def _circle_window(cx, cy, rho, gx, gy, rb):
    """Angular window [start, width] of the circle (center (cx,cy), radius rho)
    that can intersect the disk (center (gx,gy), radius rb).
    Returns (start, width); width <= 0 means no intersection."""
    mx = gx - cx
    my = gy - cy
    m = np.sqrt(mx * mx + my * my)
    if m < 1e-12:
        if rho <= rb:
            return 0.0, 2.0 * np.pi
        return 0.0, -1.0
    q = (rb * rb - m * m - rho * rho) / (2.0 * rho * m)
    # window around the direction of m: cos(theta - phi_m) >= -q'... condition
    # |c + rho e(th) - g|^2 <= rb^2  <=>  cos(th - phi_m) >= -q
    if q >= 1.0:
        return 0.0, 2.0 * np.pi
    if q <= -1.0:
        return 0.0, -1.0
    phi_m = np.arctan2(my, mx)
    half = np.arccos(-q)
    return phi_m - half, 2.0 * half


@njit(cache=True, parallel=True)
def forward_circle(img, xmin, dx, ymin, dy, R, alphas, ps, step, gx, gy, rb, out):
    nx, ny = img.shape
    na = alphas.shape[0]
    npp = ps.shape[0]
    for ia in prange(na):
        ca = np.cos(alphas[ia])
        sa = np.sin(alphas[ia])
        cx = R * ca
        cy = R * sa
        for ip in range(npp):
            rho = ps[ip]
            acc = 0.0
            if rho > 0.0:
                start, width = _circle_window(cx, cy, rho, gx, gy, rb)
                if width > 0.0:
                    n = int(np.ceil(width * rho / step))
                    if n < 4:
                        n = 4
                    dth = width / n
                    th = start + 0.5 * dth
                    cth = np.cos(th)
                    sth = np.sin(th)
                    cd = np.cos(dth)
                    sd = np.sin(dth)
                    dl = rho * dth
                    for _ in range(n):
                        px = cx + rho * cth
                        py = cy + rho * sth
                        acc += _bilinear_gather(img, nx, ny,
                                                (px - xmin) / dx, (py - ymin) / dy)
                        c_new = cth * cd - sth * sd
                        sth = sth * cd + cth * sd
                        cth = c_new
                    acc *= dl
            out[ia, ip] = acc


@njit(cache=True, parallel=True)
def adjoint_circle(sino, xmin, dx, ymin, dy, R, alphas, ps, step, gx, gy, rb, out_nx, out_ny):
    na = alphas.shape[0]
    npp = ps.shape[0]
    acc = np.zeros((N_CHUNKS, out_nx, out_ny))
    chunk = (na + N_CHUNKS - 1) // N_CHUNKS
    for ic in prange(N_CHUNKS):
        ia0 = ic * chunk
        ia1 = min(ia0 + chunk, na)
        buf = acc[ic]
        for ia in range(ia0, ia1):
            ca = np.cos(alphas[ia])
            sa = np.sin(alphas[ia])
            cx = R * ca
            cy = R * sa
            for ip in range(npp):
                rho = ps[ip]
                g = sino[ia, ip]
                if rho <= 0.0 or g == 0.0:
                    continue
                start, width = _circle_window(cx, cy, rho, gx, gy, rb)
                if width <= 0.0:
                    continue
                n = int(np.ceil(width * rho / step))
                if n < 4:
                    n = 4
                dth = width / n
                th = start + 0.5 * dth
                cth = np.cos(th)
                sth = np.sin(th)
                cd = np.cos(dth)
                sd = np.sin(dth)
                val = g * rho * dth
                for _ in range(n):
                    px = cx + rho * cth
                    py = cy + rho * sth
                    _bilinear_scatter(buf, out_nx, out_ny,
                                      (px - xmin) / dx, (py - ymin) / dy, val)
                    c_new = cth * cd - sth * sd
                    sth = sth * cd + cth * sd
                    cth = c_new
    return acc


@njit(cache=True, inline="always")
def _line_window(av_x, av_y, p, gx, gy, rb):
    """Param window [t0, t1] of the line p*a + t*a_perp inside the bounding
    disk; t1 < t0 means no intersection."""
    # |p*a + t*a_perp - g|^2 <= rb^2, with a_perp = (-av_y, av_x)
    bx = p * av_x - gx
    by = p * av_y - gy
    apx = -av_y
    apy = av_x
    beta = bx * apx + by * apy
    c0 = bx * bx + by * by - rb * rb
    disc = beta * beta - c0
    if disc <= 0.0:
        return 0.0, -1.0
    s = np.sqrt(disc)
    return -beta - s, -beta + s


@njit(cache=True, parallel=True)
def forward_line(img, xmin, dx, ymin, dy, alphas, ps, step, gx, gy, rb, out):
    nx, ny = img.shape
    na = alphas.shape[0]
    npp = ps.shape[0]
    for ia in prange(na):
        av_x = np.cos(alphas[ia])
        av_y = np.sin(alphas[ia])
        for ip in range(npp):
            p = ps[ip]
            t0, t1 = _line_window(av_x, av_y, p, gx, gy, rb)
            acc = 0.0
            if t1 > t0:
                n = int(np.ceil((t1 - t0) / step))
                if n < 4:
                    n = 4
                dt = (t1 - t0) / n
                for k in range(n):
                    t = t0 + (k + 0.5) * dt
                    px = p * av_x - t * av_y
                    py = p * av_y + t * av_x
                    acc += _bilinear_gather(img, nx, ny,
                                            (px - xmin) / dx, (py - ymin) / dy)
                acc *= dt
            out[ia, ip] = acc


@njit(cache=True, parallel=True)
def adjoint_line(sino, xmin, dx, ymin, dy, alphas, ps, step, gx, gy, rb, out_nx, out_ny):
    na = alphas.shape[0]
    npp = ps.shape[0]
    acc = np.zeros((N_CHUNKS, out_nx, out_ny))
    chunk = (na + N_CHUNKS - 1) // N_CHUNKS
    for ic in prange(N_CHUNKS):
        ia0 = ic * chunk
        ia1 = min(ia0 + chunk, na)
        buf = acc[ic]
        for ia in range(ia0, ia1):
            av_x = np.cos(alphas[ia])
            av_y = np.sin(alphas[ia])
            for ip in range(npp):
                p = ps[ip]
                g = sino[ia, ip]
                if g == 0.0:
                    continue
                t0, t1 = _line_window(av_x, av_y, p, gx, gy, rb)
                if t1 <= t0:
                    continue
                n = int(np.ceil((t1 - t0) / step))
                if n < 4:
                    n = 4
                dt = (t1 - t0) / n
                val = g * dt
                for k in range(n):
                    t = t0 + (k + 0.5) * dt
                    px = p * av_x - t * av_y
                    py = p * av_y + t * av_x
                    _bilinear_scatter(buf, out_nx, out_ny,
                                      (px - xmin) / dx, (py - ymin) / dy, val)
    return acc
