"""Finite-difference calculus and interpolation on periodic grids.

Every module differentiates through :func:`partial`, so that identities
comparing two formulations see the same discrete derivative. The default is
the second-order central stencil; ``method="spectral"`` is available for
exactness checks on band-limited data.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .grid import GridSpec, ScalarField, VectorField

METHODS = ("central", "spectral")


def partial(arr: np.ndarray, axis: int, grid: GridSpec, method: str = "central") -> np.ndarray:
    """Derivative of ``arr`` along spatial ``axis``; the grid occupies the trailing axes."""
    if axis >= grid.dims:
        return np.zeros_like(arr)
    ax = arr.ndim - grid.dims + axis
    h = grid.spacing[axis]
    if method == "central":
        return (np.roll(arr, -1, axis=ax) - np.roll(arr, 1, axis=ax)) / (2 * h)
    if method == "spectral":
        n = grid.points[axis]
        k = 2 * np.pi * np.fft.fftfreq(n, d=h)
        if n % 2 == 0:
            k[n // 2] = 0.0
        shape = [1] * arr.ndim
        shape[ax] = n
        out = np.fft.ifft(1j * k.reshape(shape) * np.fft.fft(arr, axis=ax), axis=ax)
        return out if np.iscomplexobj(arr) else out.real
    raise ValueError(f"unknown derivative method {method!r}")


def spinor_partial(psi: np.ndarray, axis: int, grid: GridSpec, method: str = "central") -> np.ndarray:
    """Central derivative of a (2, *grid) spinor array with neighbours sign-aligned to the centre.

    Spinor textures may be double-valued on the torus (psi -> -psi across the
    seam) while every bilinear stays periodic. Flipping a neighbour whenever
    Re(psi^dag psi_nb) < 0 makes bilinear combinations such as
    Im(psi^dag d psi) insensitive to that sign. For single-valued smooth data it
    is identical to :func:`partial`.
    """
    if axis >= grid.dims or method != "central":
        return partial(psi, axis, grid, method)
    ax = psi.ndim - grid.dims + axis
    h = grid.spacing[axis]
    out = []
    for shift in (-1, 1):
        nb = np.roll(psi, shift, axis=ax)
        sign = np.where(np.real(np.sum(np.conj(psi) * nb, axis=0)) < 0, -1.0, 1.0)
        out.append(nb * sign)
    return (out[0] - out[1]) / (2 * h)


def grad(arr: np.ndarray, grid: GridSpec, method: str = "central") -> np.ndarray:
    """Stack of the three partials, shape ``(3, *arr.shape)``."""
    return np.stack([partial(arr, i, grid, method) for i in range(3)])


def div(vec: np.ndarray, grid: GridSpec, method: str = "central") -> np.ndarray:
    return sum(partial(vec[i], i, grid, method) for i in range(grid.dims))


def curl(vec: np.ndarray, grid: GridSpec, method: str = "central") -> np.ndarray:
    d = lambda c, a: partial(vec[c], a, grid, method)  # noqa: E731
    return np.stack([d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1)])


def laplacian(arr: np.ndarray, grid: GridSpec, method: str = "central") -> np.ndarray:
    """Compact three-point Laplacian (or the exact spectral one)."""
    out = np.zeros_like(arr)
    for i in range(grid.dims):
        ax = arr.ndim - grid.dims + i
        h = grid.spacing[i]
        if method == "central":
            out = out + (np.roll(arr, -1, axis=ax) - 2 * arr + np.roll(arr, 1, axis=ax)) / h**2
        else:
            out = out + partial(partial(arr, i, grid, method), i, grid, method)
    return out


def directional(u: np.ndarray, arr: np.ndarray, grid: GridSpec, method: str = "central") -> np.ndarray:
    """(u . grad) arr, for ``u`` of shape (3, *grid) and ``arr`` of shape (..., *grid)."""
    return sum(u[i] * partial(arr, i, grid, method) for i in range(grid.dims))


def differential(fld, kind: str, method: str = "central"):
    """grad / div / curl / laplacian of a Scalar- or VectorField."""
    g = fld.grid
    if kind == "grad":
        if not isinstance(fld, ScalarField):
            raise TypeError("grad needs a ScalarField")
        return VectorField(g, grad(fld.values, g, method))
    if kind == "div":
        if not isinstance(fld, VectorField):
            raise TypeError("div needs a VectorField")
        return ScalarField(g, div(fld.values, g, method))
    if kind == "curl":
        if not isinstance(fld, VectorField):
            raise TypeError("curl needs a VectorField")
        return VectorField(g, curl(fld.values, g, method))
    if kind == "laplacian":
        return type(fld)(g, laplacian(fld.values, g, method))
    raise ValueError(f"unknown differential kind {kind!r}")


def _as3d(values: np.ndarray, grid: GridSpec) -> np.ndarray:
    """View as (C, nx, ny, nz) with singleton axes for missing dimensions."""
    lead = values.shape[: values.ndim - grid.dims]
    c = int(np.prod(lead)) if lead else 1
    shape = grid.shape + (1,) * (3 - grid.dims)
    return np.ascontiguousarray(values.reshape((c,) + shape), dtype=float)


def kernel_geometry(grid: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    origin = np.zeros(3)
    spacing = np.ones(3)
    origin[: grid.dims] = grid.origin
    spacing[: grid.dims] = grid.spacing
    return origin, spacing


INTERP_ORDERS = {"linear": 1, "cubic": 3, "spline": 4}


def interp_order(kind: str) -> int:
    try:
        return INTERP_ORDERS[kind]
    except KeyError:
        raise ValueError(f"unknown interpolation kind {kind!r}") from None


def spline_coefficients(values: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Periodic cubic B-spline coefficients of ``values`` (grid on the trailing axes)."""
    out = np.asarray(values, dtype=float)
    for i in range(grid.dims):
        ax = out.ndim - grid.dims + i
        n = grid.points[i]
        theta = 2 * np.pi * np.fft.fftfreq(n)
        shape = [1] * out.ndim
        shape[ax] = n
        symbol = ((4 + 2 * np.cos(theta)) / 6).reshape(shape)
        out = np.fft.ifft(np.fft.fft(out, axis=ax) / symbol, axis=ax).real
    return out


def interpolate(fld, point, kind: str = "linear"):
    """Value of ``fld`` at a physical ``point`` (wrapped into the periodic box).

    ``kind="linear"`` is the multilinear kernel; ``kind="cubic"`` is a
    Catmull-Rom tensor-product kernel (C1, exact on quadratics);
    ``kind="spline"`` is the periodic cubic B-spline interpolant (C2).
    """
    p = np.zeros(3)
    pt = np.atleast_1d(np.asarray(point, dtype=float))
    if not np.all(np.isfinite(pt)):
        raise ValueError(f"non-finite interpolation point {point!r}")
    p[: min(3, pt.size)] = pt[:3]
    order = interp_order(kind)
    lead = fld.values.shape[: fld.values.ndim - fld.grid.dims]
    vals = spline_coefficients(fld.values, fld.grid) if order == 4 else fld.values
    data = _as3d(vals, fld.grid)
    origin, spacing = kernel_geometry(fld.grid)
    out = kernels.interp(data, origin, spacing, p, order)
    return float(out[0]) if not lead else out.reshape(lead)


def interpolate_many(values: np.ndarray, grid: GridSpec, points: np.ndarray, kind: str = "linear") -> np.ndarray:
    """Interpolate raw component arrays at many points; returns (npts, *lead)."""
    order = interp_order(kind)
    lead = values.shape[: values.ndim - grid.dims]
    data = _as3d(spline_coefficients(values, grid) if order == 4 else values, grid)
    origin, spacing = kernel_geometry(grid)
    pts = np.zeros((len(points), 3))
    pts[:, : points.shape[1]] = points[:, :3]
    out = kernels.interp_many(data, origin, spacing, pts, order)
    return out.reshape((len(points),) + lead)
