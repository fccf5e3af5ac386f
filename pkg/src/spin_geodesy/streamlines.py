"""Spin streamlines: integral curves of the spin direction and their Serret-Frenet apparatus."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import calculus, kernels
from .grid import GridSpec, VectorField, _atomic_write

DEGENERATE = 1  # curvature below threshold: normal carried by parallel transport, tau := 0
TRUNCATED = 2  # last sample before the path entered a masked region

CSV_COLUMNS = ("s", "x", "y", "z", "kappa", "tau", "flags")


class ZeroSpinError(ValueError):
    """The spin field vanishes at a point on the path, so the direction is undefined."""

    def __init__(self, location):
        self.location = tuple(float(c) for c in location)
        super().__init__(f"spin field vanishes near {self.location}")


@dataclass(frozen=True)
class StreamlineGeometry:
    s: np.ndarray  # arc length per sample
    points: np.ndarray  # (n, 3)
    tangent: np.ndarray  # (n, 3)
    normal: np.ndarray | None = None
    binormal: np.ndarray | None = None
    kappa: np.ndarray | None = None
    tau: np.ndarray | None = None
    flags: np.ndarray | None = None
    spacing: float = 1.0  # grid spacing of the field the line was traced in
    truncated: bool = False

    def __len__(self) -> int:
        return len(self.s)


def _field_data(s_field: VectorField, order: int) -> np.ndarray:
    vals = s_field.values
    valid = np.all(np.isfinite(vals), axis=0)
    vals = np.where(valid, vals, 0.0)
    if order == 4:
        # only the spin channels are prefiltered; the validity channel is smoothed by the positive weights
        vals = calculus.spline_coefficients(vals, s_field.grid)
    return calculus._as3d(np.concatenate([vals, valid[None].astype(float)]), s_field.grid)


def trace_spin_streamline(
    s_field: VectorField,
    seed,
    ds: float | None = None,
    max_len: float = 10.0,
    kind: str = "spline",
    min_norm: float = 1e-12,
) -> StreamlineGeometry:
    """RK4 integration of dx/ds = s_hat(x) from ``seed``.

    The step defaults to a quarter of the smallest grid spacing. The default
    interpolant is the C2 cubic B-spline: curvature and torsion are second and
    third derivatives of the path, which the multilinear kernel
    (``kind="linear"``) only resolves to first order. A path that
    reaches a masked point stops there and its last sample is flagged
    TRUNCATED; a path that hits a point with zero spin raises
    :class:`ZeroSpinError`.
    """
    g = s_field.grid
    dx = min(g.spacing)
    ds = dx / 4 if ds is None else float(ds)
    if not ds > 0 or not max_len > 0:
        raise ValueError("ds and max_len must be positive")
    seed3 = np.zeros(3)
    seed = np.atleast_1d(np.asarray(seed, dtype=float))
    if not np.all(np.isfinite(seed)):
        raise ValueError("seed must be finite")
    seed3[: min(3, seed.size)] = seed[:3]
    origin, spacing = calculus.kernel_geometry(g)
    nsteps = max(1, int(round(max_len / ds)))
    order = calculus.interp_order(kind)
    pts, tan, count, status = kernels.trace(_field_data(s_field, order), origin, spacing, seed3, ds, nsteps, order, min_norm)
    if status == kernels.ZERO_SPIN:
        where = pts[count - 1] if count else seed3
        raise ZeroSpinError(where)
    if count == 0:
        raise ValueError(f"seed {tuple(seed3)} lies in a masked region")
    pts, tan = pts[:count].copy(), tan[:count].copy()
    flags = np.zeros(count, dtype=int)
    truncated = status == kernels.MASKED
    if truncated:
        flags[-1] |= TRUNCATED
    return StreamlineGeometry(ds * np.arange(count), pts, tan, flags=flags, spacing=dx, truncated=truncated)


def _perpendicular(t: np.ndarray) -> np.ndarray:
    trial = np.eye(3)[int(np.argmin(np.abs(t)))]
    v = trial - np.dot(trial, t) * t
    return v / np.linalg.norm(v)


def frenet_apparatus(line: StreamlineGeometry, eps_kappa: float | None = None) -> StreamlineGeometry:
    """Curvature, torsion and Frenet frame by centred differences along the arc.

    Where kappa < ``eps_kappa`` (default 1e-8/dx) the normal is carried
    forward by parallel transport, tau is set to 0 and the sample is
    flagged DEGENERATE.
    """
    n = len(line)
    if n < 5:
        raise ValueError(f"frenet_apparatus needs at least 5 samples, got {n}")
    ds = float(line.s[1] - line.s[0])
    eps = 1e-8 / line.spacing if eps_kappa is None else eps_kappa
    t = line.tangent
    dt = np.gradient(t, ds, axis=0, edge_order=2)
    kappa = np.linalg.norm(dt, axis=1)
    degenerate = kappa < eps
    m = np.empty_like(t)
    prev = None
    for i in range(n):
        if not degenerate[i]:
            m[i] = dt[i] / kappa[i]
        else:
            cand = _perpendicular(t[i]) if prev is None else prev - np.dot(prev, t[i]) * t[i]
            nrm = np.linalg.norm(cand)
            m[i] = cand / nrm if nrm > 1e-12 else _perpendicular(t[i])
        prev = m[i]
    b = np.cross(t, m)
    db = np.gradient(b, ds, axis=0, edge_order=2)
    tau = -np.einsum("ij,ij->i", m, db)
    tau = np.where(degenerate, 0.0, tau)
    flags = (line.flags if line.flags is not None else np.zeros(n, dtype=int)) | np.where(degenerate, DEGENERATE, 0)
    return replace(line, normal=m, binormal=b, kappa=kappa, tau=tau, flags=flags)


def kappa_tau_from_torsion(T: np.ndarray, grid: GridSpec, line: StreamlineGeometry, kind: str = "spline"):
    """Project the flat-space torsion on the Frenet frame along the line.

    kappa_T = s_i T^i_jk m^j u^k and tau_T = m_i T^i_jk n^j u^k with u the
    unit tangent; for a frame whose m, n are the Frenet normal and binormal
    these equal kappa and tau. Also returns the frame-antisymmetry defect
    s_i T^i_jk m^j u^k + m_i T^i_jk s^j u^k.
    """
    if line.normal is None:
        raise ValueError("run frenet_apparatus first")
    flat = T.reshape((27,) + grid.shape)
    if kind == "spline":
        # the prefilter is global, so masked (NaN) entries must not leak into it
        flat = np.nan_to_num(flat)
    Tl = calculus.interpolate_many(flat, grid, line.points, kind).reshape(len(line), 3, 3, 3)
    u, m, b = line.tangent, line.normal, line.binormal
    kT = np.einsum("ni,nijk,nj,nk->n", u, Tl, m, u)
    tT = np.einsum("ni,nijk,nj,nk->n", m, Tl, b, u)
    anti = kT + np.einsum("ni,nijk,nj,nk->n", m, Tl, u, u)
    return kT, tT, anti


def first_return(line: StreamlineGeometry, min_fraction: float = 0.5) -> float:
    """Arc length at which the path passes closest to its seed again (for closed lines).

    The distance minimum over samples is refined by a parabola through the
    three nearest samples.
    """
    d = np.linalg.norm(line.points - line.points[0], axis=1)
    start = int(min_fraction * np.argmax(d)) + 1 if np.argmax(d) > 0 else 1
    i = start + int(np.argmin(d[start:]))
    if i <= 0 or i >= len(d) - 1:
        return float(line.s[i])
    y0, y1, y2 = d[i - 1] ** 2, d[i] ** 2, d[i + 1] ** 2
    denom = y0 - 2 * y1 + y2
    shift = 0.5 * (y0 - y2) / denom if denom > 0 else 0.0
    return float(line.s[i] + shift * (line.s[1] - line.s[0]))


def streamline_csv(line: StreamlineGeometry) -> str:
    """CSV text with columns s, x, y, z, kappa, tau, flags."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    n = len(line)
    kappa = line.kappa if line.kappa is not None else np.full(n, np.nan)
    tau = line.tau if line.tau is not None else np.full(n, np.nan)
    flags = line.flags if line.flags is not None else np.zeros(n, dtype=int)
    for i in range(n):
        x, y, z = line.points[i]
        w.writerow([f"{line.s[i]:.12g}", f"{x:.12g}", f"{y:.12g}", f"{z:.12g}", f"{kappa[i]:.12g}", f"{tau[i]:.12g}", int(flags[i])])
    return buf.getvalue()


def write_streamline_csv(path, line: StreamlineGeometry) -> None:
    _atomic_write(Path(path), streamline_csv(line).encode())
