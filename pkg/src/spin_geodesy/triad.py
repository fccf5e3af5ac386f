"""Spinor triad, its torsion in flat space, and the geometric forms of the guidance velocity.

Frame arrays use the layout ``E[a, k, ...]``: component ``k`` of frame vector
``e_(a)``. Because the triad is orthonormal, the co-frame e^a_k has the same
components, so no index raising is needed in flat Cartesian space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import calculus
from .grid import HBAR, MASS, GridSpec, ScalarField, SpinorField, VectorField
from .observables import RHO_EPS, bilinear_MN, density, density_spin, valid_mask


@dataclass(frozen=True)
class TriadField:
    e1: VectorField
    e2: VectorField
    e3: VectorField
    mask: np.ndarray

    @property
    def grid(self) -> GridSpec:
        return self.e1.grid

    def stacked(self) -> np.ndarray:
        return np.stack([self.e1.values, self.e2.values, self.e3.values])

    @classmethod
    def from_stacked(cls, grid, E, mask) -> "TriadField":
        return cls(VectorField(grid, E[0]), VectorField(grid, E[1]), VectorField(grid, E[2]), mask)


def triad_from_spinor(psi: SpinorField, rel_eps: float = RHO_EPS) -> TriadField:
    """e1 = M/rho, e2 = N/rho, e3 = 2s/hbar; no re-orthogonalisation."""
    g = psi.grid
    rho = density(psi)
    mask = valid_mask(rho, rel_eps)
    safe = np.where(mask, rho, 1.0)
    M, N = bilinear_MN(psi)
    _, s = density_spin(psi, rel_eps)
    nan = lambda a: np.where(mask, a, np.nan)  # noqa: E731
    return TriadField(
        VectorField(g, nan(M.values / safe)),
        VectorField(g, nan(N.values / safe)),
        VectorField(g, 2 * s.values / HBAR),
        mask,
    )


def orthonormality_defect(triad: TriadField) -> tuple[float, float]:
    """(max |e_a.e_b - delta_ab|, max |e1 x e2 - e3|) over unmasked points."""
    E = triad.stacked()
    gram = np.einsum("ak...,bk...->ab...", E, E) - np.eye(3).reshape((3, 3) + (1,) * triad.grid.dims)
    hand = np.cross(E[0], E[1], axis=0) - E[2]
    ok = triad.mask
    return float(np.max(np.abs(gram[:, :, ok]), initial=0.0)), float(np.max(np.abs(hand[:, ok]), initial=0.0))


def frame_gradient(triad: TriadField, method: str = "central") -> np.ndarray:
    """dE[i, a, k] = d_i e_(a)k."""
    return calculus.grad(triad.stacked(), triad.grid, method)


def spin_space_anholonomity(triad: TriadField, method: str = "central") -> np.ndarray:
    """Omega^a_bc = (d_i e^a_k - d_k e^a_i) e^k_b e^i_c, shape (3, 3, 3, ...)."""
    E = triad.stacked()
    dE = frame_gradient(triad, method)
    curl = dE - np.swapaxes(dE, 0, 2)  # [i, a, k]: d_i e^a_k - d_k e^a_i
    return np.einsum("iak...,bk...,ci...->abc...", curl, E, E)


TORSION_ROUTES = ("identity", "frame")


def torsion3(triad: TriadField, method: str = "central", route: str = "identity") -> np.ndarray:
    """Flat-space torsion T[i, j, k] = T^i_jk.

    ``route="frame"`` evaluates e^i_b d_k e^b_j literally. The default
    ``route="identity"`` evaluates the same quantity as -(d_k e^i_b) e^b_j;
    the two are equal by orthonormality, but only the second makes the
    geodesic residual vanish to round-off on a discrete grid.
    """
    E = triad.stacked()
    dE = frame_gradient(triad, method)  # [k, b, i]
    if route == "identity":
        return -np.einsum("kbi...,bj...->ijk...", dE, E)
    if route == "frame":
        return np.einsum("bi...,kbj...->ijk...", E, dE)
    raise ValueError(f"unknown torsion route {route!r}")


def frame_torsion(triad: TriadField, T: np.ndarray) -> np.ndarray:
    """T_abk = -e_a^i T^i_jk e_b^j; with T from torsion3 this is e_a . d_k e_b."""
    E = triad.stacked()
    return -np.einsum("ai...,ijk...,bj...->abk...", E, T, E)


def triad_geodesic_residual(triad: TriadField, T: np.ndarray, method: str = "central") -> float:
    """max |d_k e^i_a + T^i_jk e^j_a| over points where every term is finite."""
    E = triad.stacked()
    dE = frame_gradient(triad, method)  # [k, a, i]
    r = np.einsum("kai...->aik...", dE) + np.einsum("ijk...,aj...->aik...", T, E)
    return float(np.nanmax(np.abs(r))) if np.any(np.isfinite(r)) else 0.0


def guidance_velocity_geometric(
    triad: TriadField, A: VectorField | None = None, gyro: float = 0.0, method: str = "central"
) -> VectorField:
    """v_i = -(hbar/2m) e2_k d_i e1_k (minus (e/mc)A when a potential is given)."""
    g = triad.grid
    de1 = calculus.grad(triad.e1.values, g, method)
    v = -HBAR / (2 * MASS) * np.einsum("k...,ik...->i...", triad.e2.values, de1)
    if A is not None:
        v = v - gyro * A.values
    return VectorField(g, v)


# --- frame adapted to the spin lines ---------------------------------------


def spin_line_curvature_vector(triad: TriadField, method: str = "central") -> np.ndarray:
    """(s . grad) s for the unit spin direction s = e3."""
    s = triad.e3.values
    return calculus.directional(s, s, triad.grid, method)


def _frame_angle(triad: TriadField, method: str) -> float:
    kv = spin_line_curvature_vector(triad, method)
    z = np.einsum("k...,k...->...", kv, triad.e1.values) + 1j * np.einsum("k...,k...->...", kv, triad.e2.values)
    total = np.nansum(z**2)
    if abs(total) < 1e-14 * max(1.0, float(np.nansum(np.abs(z) ** 2))):
        return 0.0
    beta = 0.5 * float(np.angle(total))
    # the angle is defined modulo pi; keep it in (-pi/2 + tiny, pi/2 + tiny]
    return beta + np.pi if beta < -np.pi / 2 + 1e-9 else beta


@dataclass(frozen=True)
class SpinLineFrame:
    """Grid frame (s, m, n): the triad rotated about s by one global angle beta0."""

    s: VectorField
    m: VectorField
    n: VectorField
    beta0: float
    mask: np.ndarray


def spin_line_frame(triad: TriadField, method: str = "central", beta0: float | None = None) -> SpinLineFrame:
    """Rotate (e1, e2) about e3 by a constant angle that best aligns e1 with the spin-line normal.

    A constant rotation leaves every velocity formula unchanged in form, and
    when the triad already carries the Frenet normal up to a constant angle
    (plane waves, helices) the rotated frame is exactly the Frenet frame.
    Where it is not, :func:`frenet_adaptation_defect` measures the mismatch.
    """
    if beta0 is None:
        beta0 = _frame_angle(triad, method)
    c, s = np.cos(beta0), np.sin(beta0)
    e1, e2 = triad.e1.values, triad.e2.values
    g = triad.grid
    return SpinLineFrame(
        triad.e3, VectorField(g, c * e1 + s * e2), VectorField(g, -s * e1 + c * e2), float(beta0), triad.mask
    )


def frenet_adaptation_defect(frame: SpinLineFrame, method: str = "central") -> np.ndarray:
    """n . (s . grad) s: zero wherever m is the Frenet normal of the spin lines."""
    s = frame.s.values
    return np.einsum("k...,k...->...", frame.n.values, calculus.directional(s, s, frame.s.grid, method))


def rotation_angle_stats(triad: TriadField, method: str = "central", rel_kappa: float = 1e-8) -> dict:
    """Statistics of the local angle from e1 to the spin-line normal, taken modulo pi.

    The normal line is used rather than its orientation because signed
    curvature lets the normal flip where the spin lines inflect. Points where
    the spin lines are straight (|k| below ``rel_kappa``/dx) have no normal
    and are skipped.
    """
    kv = spin_line_curvature_vector(triad, method)
    mag = np.sqrt(np.sum(kv**2, axis=0))
    thresh = rel_kappa / min(triad.grid.spacing)
    ok = np.isfinite(mag) & (mag > thresh)
    out = {"samples": int(ok.sum()), "beta0": _frame_angle(triad, method)}
    if not ok.any():
        out.update(mean=0.0, circular_std=0.0, min=0.0, max=0.0)
        return out
    ang = np.arctan2(np.sum(kv * triad.e2.values, axis=0)[ok], np.sum(kv * triad.e1.values, axis=0)[ok])
    zbar = np.mean(np.exp(2j * ang))
    mean = 0.5 * float(np.angle(zbar))
    dev = 0.5 * np.angle(np.exp(2j * (ang - mean)))
    out.update(
        mean=mean,
        circular_std=0.5 * float(np.sqrt(max(0.0, -2 * np.log(max(abs(zbar), 1e-300))))),
        min=float(mean + dev.min()),
        max=float(mean + dev.max()),
    )
    return out


@dataclass(frozen=True)
class FrameDerivedScalars:
    theta_ms: ScalarField
    theta_ns: ScalarField
    div_s: ScalarField
    div_m: ScalarField
    div_n: ScalarField
    omega_m: ScalarField
    omega_n: ScalarField
    kappa: ScalarField
    tau: ScalarField

    def relation_residuals(self, frame: SpinLineFrame, method: str = "central") -> dict:
        """Max |lhs - rhs| of the three divergence relations."""
        g = frame.s.grid
        m, n = frame.m.values, frame.n.values
        n_dm_m = np.sum(n * calculus.directional(m, m, g, method), axis=0)
        n_dn_m = np.sum(n * calculus.directional(n, m, g, method), axis=0)
        r1 = self.div_s.values - self.theta_ms.values - self.theta_ns.values
        r2 = self.div_n.values + n_dm_m
        r3 = self.div_m.values + self.kappa.values - n_dn_m
        f = lambda r: float(np.nanmax(np.abs(r))) if np.any(np.isfinite(r)) else 0.0  # noqa: E731
        return {"div_s": f(r1), "div_n": f(r2), "div_m": f(r3)}


def frame_divergences(frame: SpinLineFrame, method: str = "central") -> FrameDerivedScalars:
    """Divergences, expansion rates, signed curvature and torsion of the (s, m, n) frame."""
    g = frame.s.grid
    s, m, n = frame.s.values, frame.m.values, frame.n.values
    dot = lambda a, b: np.sum(a * b, axis=0)  # noqa: E731
    dd = lambda u, f: calculus.directional(u, f, g, method)  # noqa: E731
    ds_s = dd(s, s)
    dm_s = dd(m, s)
    dn_s = dd(n, s)
    kappa = dot(m, ds_s)
    tau = dot(n, dd(s, m))
    S = lambda a: ScalarField(g, a)  # noqa: E731
    return FrameDerivedScalars(
        theta_ms=S(dot(m, dm_s)),
        theta_ns=S(dot(n, dn_s)),
        div_s=S(calculus.div(s, g, method)),
        div_m=S(calculus.div(m, g, method)),
        div_n=S(calculus.div(n, g, method)),
        omega_m=S(-dot(m, dn_s) - tau),
        omega_n=S(dot(n, dm_s) - tau),
        kappa=S(kappa),
        tau=S(tau),
    )


def velocity_frenet(frame: SpinLineFrame, scalars: FrameDerivedScalars, sigma_frenet: int = 1, A=None, gyro=0.0) -> VectorField:
    """v = sigma (hbar/2m)(tau s - div(n) m + (kappa + div m) n)."""
    s, m, n = frame.s.values, frame.m.values, frame.n.values
    v = (HBAR / (2 * MASS)) * (
        scalars.tau.values * s - scalars.div_n.values * m + (scalars.kappa.values + scalars.div_m.values) * n
    )
    v = sigma_frenet * v
    if A is not None:
        v = v - gyro * A.values
    return VectorField(frame.s.grid, v)
