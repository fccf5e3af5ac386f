"""Pure-Python reference kernels (used when the compiled extension is absent).

Signatures mirror ``_kernels.pyx`` exactly; ``data`` is always a
contiguous float64 array of shape (C, nx, ny, nz) with singleton axes for
missing dimensions.
"""

import math

import numpy as np

OK, ZERO_SPIN, MASKED, MAX_STEPS = 0, 1, 2, 3


def _axis_weights(f, n, order):
    if n == 1:
        return np.zeros(1, dtype=np.intp), np.ones(1)
    i0 = math.floor(f)
    t = f - i0
    if order == 1:
        idx = np.array([i0, i0 + 1]) % n
        w = np.array([1.0 - t, t])
    else:
        t2, t3 = t * t, t * t * t
        idx = np.array([i0 - 1, i0, i0 + 1, i0 + 2]) % n
        if order == 3:
            # Catmull-Rom
            w = 0.5 * np.array([-t3 + 2 * t2 - t, 3 * t3 - 5 * t2 + 2, -3 * t3 + 4 * t2 + t, t3 - t2])
        else:
            # uniform cubic B-spline; data must hold prefiltered coefficients
            u = 1.0 - t
            w = np.array([u * u * u, 3 * t3 - 6 * t2 + 4, -3 * t3 + 3 * t2 + 3 * t + 1, t3]) / 6.0
    return idx, w


def interp(data, origin, spacing, p, order):
    _, nx, ny, nz = data.shape
    ix, wx = _axis_weights((p[0] - origin[0]) / spacing[0], nx, order)
    iy, wy = _axis_weights((p[1] - origin[1]) / spacing[1], ny, order)
    iz, wz = _axis_weights((p[2] - origin[2]) / spacing[2], nz, order)
    block = data[:, ix[:, None, None], iy[None, :, None], iz[None, None, :]]
    return np.einsum("cijk,i,j,k->c", block, wx, wy, wz)


def interp_many(data, origin, spacing, points, order):
    out = np.empty((len(points), data.shape[0]))
    for n, p in enumerate(points):
        out[n] = interp(data, origin, spacing, p, order)
    return out


def _direction(data, origin, spacing, x, order, min_norm):
    v = interp(data, origin, spacing, x, order)
    s = v[:3]
    norm = math.sqrt(s[0] * s[0] + s[1] * s[1] + s[2] * s[2])
    if norm < min_norm:
        return None, ZERO_SPIN
    if v[3] < 0.999:
        return None, MASKED
    return s / norm, OK


def trace(data, origin, spacing, seed, ds, nsteps, order, min_norm):
    """RK4 on dx/ds = s(x)/|s(x)|; ``data`` holds (sx, sy, sz, valid).

    Returns (points, tangents, count, status).
    """
    pts = np.zeros((nsteps + 1, 3))
    tan = np.zeros((nsteps + 1, 3))
    x = np.array(seed, dtype=float)
    d, status = _direction(data, origin, spacing, x, order, min_norm)
    if d is None:
        pts[0] = x
        return pts, tan, 0, status
    pts[0], tan[0] = x, d
    for n in range(nsteps):
        k1 = d
        k2, status = _direction(data, origin, spacing, x + 0.5 * ds * k1, order, min_norm)
        if k2 is None:
            return pts, tan, n + 1, status
        k3, status = _direction(data, origin, spacing, x + 0.5 * ds * k2, order, min_norm)
        if k3 is None:
            return pts, tan, n + 1, status
        k4, status = _direction(data, origin, spacing, x + ds * k3, order, min_norm)
        if k4 is None:
            return pts, tan, n + 1, status
        x = x + ds / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        d, status = _direction(data, origin, spacing, x, order, min_norm)
        if d is None:
            return pts, tan, n + 1, status
        pts[n + 1], tan[n + 1] = x, d
    return pts, tan, nsteps + 1, MAX_STEPS
