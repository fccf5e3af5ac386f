"""Terms of the spinning-fluid momentum and spin-transport equations, and their residuals
against a spinor evolution."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import calculus
from .grid import HBAR, MASS, PhysicalConstants, ScalarField, VectorField
from .observables import bilinear_velocity, density_spin, valid_mask
from .pauli import EvolutionRun, ExternalFields

RESIDUAL_RHO_EPS = 1e-6


def _nan_where_thin(rho: np.ndarray, rel: float) -> np.ndarray:
    return np.where(valid_mask(rho, rel), rho, np.nan)


def madelung_force(rho: ScalarField, method: str = "central", rel_eps: float = 1e-10):
    """(hbar^2/4m) grad(lap rho / rho - |grad rho|^2 / 2 rho^2).

    Returns ``(force, mismatch)`` where ``mismatch`` is the pointwise
    difference to the equivalent form (hbar^2/2m) grad(lap sqrt(rho)/sqrt(rho)).
    """
    g = rho.grid
    r = _nan_where_thin(rho.values, rel_eps)
    dr = calculus.grad(r, g, method)
    inner = calculus.laplacian(r, g, method) / r - np.sum(dr**2, axis=0) / (2 * r**2)
    force = HBAR**2 / (4 * MASS) * calculus.grad(inner, g, method)
    sq = np.sqrt(r)
    alt = HBAR**2 / (2 * MASS) * calculus.grad(calculus.laplacian(sq, g, method) / sq, g, method)
    return VectorField(g, force), VectorField(g, force - alt)


def spin_stress_force(rho: ScalarField, s: VectorField, method: str = "central", rel_eps: float = 1e-10) -> VectorField:
    """F_i = -(1/m rho) d_k(rho d_i s_j d_k s_j)."""
    g = rho.grid
    r = _nan_where_thin(rho.values, rel_eps)
    ds = calculus.grad(s.values, g, method)  # ds[i, j] = d_i s_j
    stress = r * np.einsum("ij...,kj...->ik...", ds, ds)
    f = np.stack([calculus.div(stress[i], g, method) for i in range(3)])
    return VectorField(g, -f / (MASS * r))


def spin_torque(rho: ScalarField, s: VectorField, method: str = "central", rel_eps: float = 1e-10) -> VectorField:
    """(1/m rho) s x d_k(rho d_k s)."""
    g = rho.grid
    r = _nan_where_thin(rho.values, rel_eps)
    flux = np.stack([calculus.div(r * calculus.grad(s.values[j], g, method), g, method) for j in range(3)])
    return VectorField(g, np.cross(s.values, flux, axis=0) / (MASS * r))


def magnetic_terms(s: VectorField, B: VectorField | None, v: VectorField, rho: ScalarField, k: PhysicalConstants, method="central"):
    """Lorentz force (e/c) v x B (no electric field), spin-gradient force (e/mc) s_k grad B^k,
    and precession (e/mc) s x B."""
    g = s.grid
    if B is None or k.charge == 0:
        z = VectorField.zeros(g)
        return z, z, z
    Bv = B.values
    lorentz = (k.charge / k.light_speed) * np.cross(v.values, Bv, axis=0)
    dB = calculus.grad(Bv, g, method)  # dB[i, k] = d_i B_k
    spin_grad = k.gyro * np.einsum("k...,ik...->i...", s.values, dB)
    prec = k.gyro * np.cross(s.values, Bv, axis=0)
    return VectorField(g, lorentz), VectorField(g, spin_grad), VectorField(g, prec)


@dataclass(frozen=True)
class HydroForceBreakdown:
    lorentz: VectorField
    spin_gradient: VectorField
    madelung: VectorField
    spin_stress: VectorField
    material_accel: VectorField

    def rhs(self) -> np.ndarray:
        return self.lorentz.values + self.spin_gradient.values + self.madelung.values + self.spin_stress.values


@dataclass(frozen=True)
class SpinTorqueBreakdown:
    precession: VectorField
    spin_torque: VectorField
    material_spin_rate: VectorField

    def rhs(self) -> np.ndarray:
        return self.precession.values + self.spin_torque.values


def _check_run(run: EvolutionRun):
    if len(run.snapshots) < 3:
        raise ValueError("need at least 3 snapshots")
    steps = np.diff(run.times)
    if not np.allclose(steps, steps[0], rtol=1e-9):
        raise ValueError("snapshots must be equally spaced in time")
    return steps[0]


def _l2(arr: np.ndarray, ok: np.ndarray, cell: float) -> float:
    sel = arr[:, ok] if arr.ndim > ok.ndim else arr[ok]
    return float(np.sqrt(np.sum(sel**2) * cell))


def _observables(run, ext, k, method):
    A = ext.A
    out = []
    for snap in run.snapshots:
        rho, s = density_spin(snap)
        out.append((rho, s, bilinear_velocity(snap, A, k, method)))
    return out


def breakdowns(run: EvolutionRun, ext=ExternalFields(), k=PhysicalConstants(), method="central"):
    """Per interior snapshot: (time, HydroForceBreakdown, SpinTorqueBreakdown, rho)."""
    ht = _check_run(run)
    g = run.initial.grid
    obs = _observables(run, ext, k, method)
    out = []
    for i in range(1, len(obs) - 1):
        rho, s, v = obs[i]
        dv_dt = (obs[i + 1][2].values - obs[i - 1][2].values) / (2 * ht)
        ds_dt = (obs[i + 1][1].values - obs[i - 1][1].values) / (2 * ht)
        accel = MASS * (dv_dt + calculus.directional(v.values, v.values, g, method))
        spin_rate = ds_dt + calculus.directional(v.values, s.values, g, method)
        lor, sgrad, prec = magnetic_terms(s, ext.B, v, rho, k, method)
        mad, _ = madelung_force(rho, method)
        hf = HydroForceBreakdown(lor, sgrad, mad, spin_stress_force(rho, s, method), VectorField(g, accel))
        st = SpinTorqueBreakdown(prec, spin_torque(rho, s, method), VectorField(g, spin_rate))
        out.append((run.times[i], hf, st, rho))
    return out


def _residual_mask(rho: ScalarField, *arrays) -> np.ndarray:
    ok = valid_mask(rho.values, RESIDUAL_RHO_EPS)
    for a in arrays:
        ok &= np.all(np.isfinite(a), axis=0)
    return ok


def momentum_residual(run: EvolutionRun, ext=ExternalFields(), k=PhysicalConstants(), method="central", include_spin_stress=True):
    """L2 norm of m(d_t + v.grad)v - [F_L + spin gradient + Madelung + spin stress] per interior snapshot."""
    g = run.initial.grid
    times, norms = [], []
    for t, hf, _, rho in breakdowns(run, ext, k, method):
        rhs = hf.lorentz.values + hf.spin_gradient.values + hf.madelung.values
        if include_spin_stress:
            rhs = rhs + hf.spin_stress.values
        r = hf.material_accel.values - rhs
        ok = _residual_mask(rho, r)
        times.append(t)
        norms.append(_l2(r, ok, g.cell_volume))
    return np.array(norms), np.array(times)


def spin_residual(run: EvolutionRun, ext=ExternalFields(), k=PhysicalConstants(), method="central"):
    """L2 norm of (d_t + v.grad)s - precession - spin torque per interior snapshot."""
    g = run.initial.grid
    times, norms = [], []
    for t, _, st, rho in breakdowns(run, ext, k, method):
        r = st.material_spin_rate.values - st.rhs()
        ok = _residual_mask(rho, r)
        times.append(t)
        norms.append(_l2(r, ok, g.cell_volume))
    return np.array(norms), np.array(times)


def spin_rhs_orthogonality(rho: ScalarField, s: VectorField, B=None, k=PhysicalConstants(), method="central") -> float:
    """max |s . RHS| of the spin equation; zero analytically since both terms are s x (...)."""
    v = VectorField.zeros(s.grid)
    _, _, prec = magnetic_terms(s, B, v, rho, k, method)
    rhs = prec.values + spin_torque(rho, s, method).values
    dot = np.sum(s.values * rhs, axis=0)
    return float(np.nanmax(np.abs(dot)))
