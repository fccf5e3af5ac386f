"""Bilinear observables of a Pauli spinor and its Euler-angle form.

Masked points (density below ``RHO_EPS`` times the maximum) carry NaN in every
quantity that divides by the density, so finite-difference stencils spread
the mask to their neighbours automatically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import calculus
from .grid import HBAR, MASS, PhysicalConstants, ScalarField, SpinorField, VectorField

RHO_EPS = 1e-10
THETA_EPS = 1e-6

SIGMA = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)


def density(psi: SpinorField) -> np.ndarray:
    return np.sum(np.abs(psi.values) ** 2, axis=0)


def valid_mask(rho: np.ndarray, rel: float = RHO_EPS) -> np.ndarray:
    return rho > rel * np.max(rho)


def _masked(arr: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return np.where(mask, arr, np.nan)


def density_spin(psi: SpinorField, rel_eps: float = RHO_EPS):
    """Return ``(rho, s)``; s = (hbar/2) psi^dag sigma psi / rho, NaN where masked."""
    a, b = psi.values
    rho = density(psi)
    mask = valid_mask(rho, rel_eps)
    safe = np.where(mask, rho, 1.0)
    ab = np.conj(a) * b
    s = HBAR * np.stack([ab.real, ab.imag, 0.5 * (np.abs(a) ** 2 - np.abs(b) ** 2)]) / safe
    return ScalarField(psi.grid, rho), VectorField(psi.grid, _masked(s, mask))


def bilinear_MN(psi: SpinorField):
    """M + iN = psibar^T sigma psi with psibar = (-psi2, psi1), no extra conjugation."""
    a, b = psi.values
    F = np.stack([a * a - b * b, 1j * (a * a + b * b), -2 * a * b])
    return VectorField(psi.grid, F.real), VectorField(psi.grid, F.imag)


def bilinear_velocity(
    psi: SpinorField,
    A: VectorField | None = None,
    k: PhysicalConstants = PhysicalConstants(),
    method: str = "central",
    rel_eps: float = RHO_EPS,
) -> VectorField:
    """v = (hbar/m) Im(psi^dag grad psi)/rho - (e/mc) A."""
    g = psi.grid
    rho = density(psi)
    mask = valid_mask(rho, rel_eps)
    dpsi = np.stack([calculus.spinor_partial(psi.values, i, g, method) for i in range(3)])
    j = np.imag(np.sum(np.conj(psi.values)[None] * dpsi, axis=1))
    v = HBAR / MASS * j / np.where(mask, rho, 1.0)
    if A is not None:
        v = v - k.gyro * A.values
    return VectorField(g, _masked(v, mask))


@dataclass(frozen=True)
class HydroFields:
    rho: ScalarField
    v: VectorField
    s: VectorField
    M: VectorField
    N: VectorField
    mask: np.ndarray


def hydro_fields(psi: SpinorField, A=None, k=PhysicalConstants(), method="central") -> HydroFields:
    rho, s = density_spin(psi)
    M, N = bilinear_MN(psi)
    v = bilinear_velocity(psi, A, k, method)
    return HydroFields(rho, v, s, M, N, valid_mask(rho.values))


# --- Euler-angle representation --------------------------------------------


@dataclass(frozen=True)
class EulerFields:
    R: ScalarField
    theta: ScalarField
    phi: ScalarField
    chi: ScalarField
    pole: np.ndarray  # points where the pole gauge phi := 0 was applied
    mask: np.ndarray


def _wrap(angle):
    return np.angle(np.exp(1j * angle))


def euler_decompose(psi: SpinorField, rel_eps: float = RHO_EPS, theta_eps: float = THETA_EPS) -> EulerFields:
    """Invert psi = R (cos(t/2) e^{-i(phi+chi)/2}, sin(t/2) e^{i(chi-phi)/2}).

    At the poles phi is undefined; the gauge phi := 0 is applied and chi
    absorbs the whole phase.
    """
    a, b = psi.values
    rho = density(psi)
    mask = valid_mask(rho, rel_eps)
    R = np.sqrt(rho)
    theta = 2 * np.arctan2(np.abs(b), np.abs(a))
    a1, a2 = np.angle(a), np.angle(b)
    phi = -a1 - a2
    chi = a2 - a1
    north = theta < theta_eps
    south = theta > np.pi - theta_eps
    phi = np.where(north | south, 0.0, phi)
    chi = np.where(north, -2 * a1, np.where(south, 2 * a2, chi))
    g = psi.grid
    return EulerFields(
        ScalarField(g, R),
        ScalarField(g, theta),
        ScalarField(g, _wrap(phi)),
        ScalarField(g, _wrap(chi)),
        north | south,
        mask,
    )


def euler_compose(e: EulerFields) -> SpinorField:
    R, th, ph, ch = e.R.values, e.theta.values, e.phi.values, e.chi.values
    psi1 = R * np.cos(th / 2) * np.exp(-0.5j * (ph + ch))
    psi2 = R * np.sin(th / 2) * np.exp(0.5j * (-ph + ch))
    return SpinorField(e.R.grid, np.stack([psi1, psi2]))


def euler_from_angles(grid, R, theta, phi, chi) -> EulerFields:
    """Wrap raw angle arrays (broadcast to the grid) into an EulerFields."""
    arrs = [np.broadcast_to(np.asarray(x, dtype=float), grid.shape).copy() for x in (R, theta, phi, chi)]
    pole = (arrs[1] < THETA_EPS) | (arrs[1] > np.pi - THETA_EPS)
    return EulerFields(*(ScalarField(grid, x) for x in arrs), pole, arrs[0] > 0)


def angle_gradient(angle: np.ndarray, grid) -> np.ndarray:
    """Central differences of an angle, unwrapping the 2 pi branch cut first."""
    out = np.zeros((3,) + angle.shape)
    for i in range(grid.dims):
        h = grid.spacing[i]
        out[i] = _wrap(np.roll(angle, -1, axis=i) - np.roll(angle, 1, axis=i)) / (2 * h)
    return out


def _gauge_seam(pole: np.ndarray, dims: int) -> np.ndarray:
    seam = np.zeros_like(pole)
    for i in range(dims):
        seam |= pole != np.roll(pole, 1, axis=i)
        seam |= pole != np.roll(pole, -1, axis=i)
    return seam


@dataclass(frozen=True)
class ConventionSignature:
    """Sign/role choices reconciling the Euler- and Frenet-form velocities with psi-bilinears."""

    sigma_euler: int
    sigma_frenet: int
    role_swap: bool
    status: str = "unique"
    discrepancy: float = 0.0

    def as_dict(self) -> dict:
        return {
            "sigma_euler": self.sigma_euler,
            "sigma_frenet": self.sigma_frenet,
            "role_swap": self.role_swap,
            "status": self.status,
            "discrepancy": self.discrepancy,
        }


def velocity_euler(
    e: EulerFields,
    A: VectorField | None,
    conv: ConventionSignature,
    k: PhysicalConstants = PhysicalConstants(),
) -> VectorField:
    """v = sigma (hbar/2m)(grad chi + cos(theta) grad phi) - (e/mc)A, with phi/chi swapped if requested."""
    g = e.R.grid
    dphi = angle_gradient(e.phi.values, g)
    dchi = angle_gradient(e.chi.values, g)
    if conv.role_swap:
        dphi, dchi = dchi, dphi
    v = conv.sigma_euler * HBAR / (2 * MASS) * (dchi + np.cos(e.theta.values) * dphi)
    if A is not None:
        v = v - k.gyro * A.values
    ok = e.mask & ~_gauge_seam(e.pole, g.dims)
    return VectorField(g, _masked(v, ok))
