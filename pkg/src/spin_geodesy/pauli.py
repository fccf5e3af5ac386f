"""Time evolution under the Pauli Hamiltonian and the continuity residual."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import calculus
from .grid import HBAR, MASS, GridSpec, PhysicalConstants, ScalarField, SpinorField, VectorField
from .observables import SIGMA, density

log = logging.getLogger(__name__)


class InstabilityError(RuntimeError):
    """Raised when an evolution produces non-finite values or leaves its stability guard."""


@dataclass(frozen=True)
class ExternalFields:
    """Vector potential A and Zeeman field B; B is not forced to equal curl A."""

    A: VectorField | None = None
    B: VectorField | None = None
    linked: bool = False

    def check_linked(self, tol: float) -> float:
        """max |curl A - B|; raises if ``linked`` and it exceeds ``tol``."""
        if self.A is None or self.B is None:
            return 0.0
        err = float(np.max(np.abs(calculus.curl(self.A.values, self.A.grid) - self.B.values)))
        if self.linked and err > tol:
            raise ValueError(f"curl A differs from B by {err:.3e} (> {tol:.1e})")
        return err

    def _grid_ok(self, grid: GridSpec):
        for f in (self.A, self.B):
            if f is not None and f.grid != grid:
                raise ValueError("external field grid does not match the spinor grid")


def apply_hamiltonian(
    psi: SpinorField,
    ext: ExternalFields = ExternalFields(),
    k: PhysicalConstants = PhysicalConstants(),
    method: str = "central",
) -> SpinorField:
    """H psi = (-i hbar grad - (e/c)A)^2 psi / 2m - mu_B sigma.B psi."""
    g = psi.grid
    ext._grid_ok(g)
    p = psi.values
    out = -(HBAR**2) * calculus.laplacian(p, g, method)
    if ext.A is not None:
        a = (k.charge / k.light_speed) * ext.A.values
        adotgrad = sum(a[i][None] * calculus.partial(p, i, g, method) for i in range(g.dims))
        div_ap = sum(calculus.partial(a[i][None] * p, i, g, method) for i in range(g.dims))
        out = out + 1j * HBAR * (div_ap + adotgrad) + np.sum(a**2, axis=0)[None] * p
    out = out / (2 * MASS)
    if ext.B is not None and k.mu_B != 0:
        sb = np.einsum("jab,j...,b...->a...", SIGMA, ext.B.values, p)
        out = out - k.mu_B * sb
    return SpinorField(g, out)


def norm(psi: SpinorField) -> float:
    return float(np.sum(density(psi)) * psi.grid.cell_volume)


def energy(psi: SpinorField, ext=ExternalFields(), k=PhysicalConstants(), method="central") -> float:
    hp = apply_hamiltonian(psi, ext, k, method).values
    return float(np.real(np.sum(np.conj(psi.values) * hp)) * psi.grid.cell_volume)


@dataclass
class EvolutionRun:
    initial: SpinorField
    dt: float
    steps: int
    stride: int
    snapshots: list = field(default_factory=list)
    times: list = field(default_factory=list)
    norms: list = field(default_factory=list)
    energies: list = field(default_factory=list)

    @property
    def final(self) -> SpinorField:
        return self.snapshots[-1]


def _uniform_vector(A: VectorField | None, grid: GridSpec) -> np.ndarray:
    if A is None:
        return np.zeros(3)
    flat = A.values.reshape(3, -1)
    if not np.allclose(flat, flat[:, :1], rtol=0, atol=1e-14):
        raise NotImplementedError("evolve supports only spatially uniform vector potentials")
    return flat[:, 0].copy()


def _kinetic_symbol(grid: GridSpec, a: np.ndarray, kinetic: str) -> np.ndarray:
    ks = grid.wavenumbers()
    sym = np.zeros(grid.shape)
    for i in range(grid.dims):
        h = grid.spacing[i]
        if kinetic == "spectral":
            sym = sym + (HBAR * ks[i] - a[i]) ** 2
        else:
            # symbol of the shared central-difference Hamiltonian
            lap = (2 - 2 * np.cos(ks[i] * h)) / h**2
            sym = sym + HBAR**2 * lap - 2 * a[i] * HBAR * np.sin(ks[i] * h) / h + a[i] ** 2
    for i in range(grid.dims, 3):
        sym = sym + a[i] ** 2
    return sym / (2 * MASS)


def _zeeman_rotation(B: np.ndarray, mu_B: float, dt: float) -> np.ndarray:
    """exp(i mu_B sigma.B dt / hbar) as a (2, 2, ...) array."""
    bmag = np.sqrt(np.sum(B**2, axis=0))
    beta = mu_B * bmag * dt / HBAR
    safe = np.where(bmag > 0, bmag, 1.0)
    n = B / safe
    c, s = np.cos(beta), np.sin(beta)
    U = np.empty((2, 2) + B.shape[1:], dtype=complex)
    U[0, 0] = c + 1j * s * n[2]
    U[1, 1] = c - 1j * s * n[2]
    U[0, 1] = 1j * s * (n[0] - 1j * n[1])
    U[1, 0] = 1j * s * (n[0] + 1j * n[1])
    return U


def evolve(
    initial: SpinorField,
    ext: ExternalFields = ExternalFields(),
    dt: float = 1e-3,
    steps: int = 1,
    stride: int = 1,
    k: PhysicalConstants = PhysicalConstants(),
    kinetic: str = "spectral",
    safety: float = 1.0,
    track_energy: bool = True,
) -> EvolutionRun:
    """Strang-split evolution: kinetic half step, exact SU(2) Zeeman rotation, kinetic half step.

    ``kinetic`` is ``"spectral"`` (exact free propagator) or
    ``"crank-nicolson"`` (Cayley form of the central-difference Hamiltonian,
    diagonalised by FFT on the periodic grid).
    """
    g = initial.grid
    ext._grid_ok(g)
    if not dt > 0:
        raise ValueError("dt must be positive")
    if kinetic not in ("spectral", "crank-nicolson"):
        raise ValueError(f"unknown kinetic stepper {kinetic!r}")
    limit = safety * MASS * min(g.spacing) ** 2 / HBAR
    if dt > limit:
        raise InstabilityError(f"dt={dt:.3e} exceeds guard {limit:.3e} (safety={safety})")
    axes = tuple(range(1, g.dims + 1))
    a = (k.charge / k.light_speed) * _uniform_vector(ext.A, g)
    E = _kinetic_symbol(g, a, kinetic)
    if kinetic == "spectral":
        half = np.exp(-1j * E * dt / (2 * HBAR))
    else:
        z = 1j * E * dt / (4 * HBAR)
        half = (1 - z) / (1 + z)
    U = None
    if ext.B is not None and k.mu_B != 0:
        U = _zeeman_rotation(ext.B.values, k.mu_B, dt)

    run = EvolutionRun(initial, dt, steps, stride)

    def record(p, t):
        snap = SpinorField(g, p.copy())
        run.snapshots.append(snap)
        run.times.append(t)
        run.norms.append(norm(snap))
        if track_energy:
            run.energies.append(energy(snap, ext, k))

    p = initial.values.copy()
    record(p, 0.0)
    for n in range(1, steps + 1):
        p = np.fft.ifftn(half * np.fft.fftn(p, axes=axes), axes=axes)
        if U is not None:
            p = np.einsum("ab...,b...->a...", U, p)
        p = np.fft.ifftn(half * np.fft.fftn(p, axes=axes), axes=axes)
        if n % stride == 0 or n == steps:
            if not np.all(np.isfinite(p)):
                raise InstabilityError(f"non-finite values after step {n}")
            record(p, n * dt)
    return run


def continuity_residual(run: EvolutionRun, ext=ExternalFields(), k=PhysicalConstants(), method="central"):
    """d_t rho + div(rho v) at interior snapshots (centered in time and space).

    Returns ``(residual_fields, l2_norms, times)``; snapshots must be equally spaced.
    """
    snaps, times = run.snapshots, np.asarray(run.times)
    if len(snaps) < 3:
        raise ValueError("continuity_residual needs at least 3 snapshots")
    steps = np.diff(times)
    if not np.allclose(steps, steps[0], rtol=1e-9):
        raise ValueError("snapshots must be equally spaced in time")
    ht = steps[0]
    g = snaps[0].grid
    fields, norms = [], []
    for i in range(1, len(snaps) - 1):
        drho = (density(snaps[i + 1]) - density(snaps[i - 1])) / (2 * ht)
        p = snaps[i].values
        dp = np.stack([calculus.spinor_partial(p, a, g, method) for a in range(3)])
        j = HBAR / MASS * np.imag(np.sum(np.conj(p)[None] * dp, axis=1))
        if ext.A is not None:
            j = j - k.gyro * ext.A.values * density(snaps[i])
        r = drho + calculus.div(j, g, method)
        fields.append(ScalarField(g, r))
        norms.append(float(np.sqrt(np.sum(r**2) * g.cell_volume)))
    return fields, np.array(norms), times[1:-1]
