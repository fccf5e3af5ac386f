"""Analytic initial states and external fields with closed-form reference values.

Every scenario lives on the periodic box [-L/2, L/2)^d with L = 16 by
default, so that k = 2 pi 2/L, q = 2 pi 3/L and sigma0 = L/16 are resolved by
at least ten samples per oscillation on a 64-point axis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import GridSpec, PhysicalConstants, SpinorField, VectorField
from .observables import euler_compose, euler_from_angles
from .pauli import ExternalFields

DEFAULT_EXTENT = 16.0


def default_params(extent: float = DEFAULT_EXTENT) -> dict:
    return {
        "k": 2 * np.pi * 2 / extent,
        "q": 2 * np.pi * 3 / extent,
        "sigma0": extent / 16,
        "B0": 1.0,
        "alpha": np.pi / 5,
        "theta0": np.pi / 2,
        "radius": extent / 4,
        "pitch_b": extent / 8,
    }


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    dims: int
    params: dict = field(default_factory=dict)
    extent: float = DEFAULT_EXTENT
    charge: float = 0.0

    def grid(self, resolution: int) -> GridSpec:
        return GridSpec.cube(self.dims, self.extent, resolution)


@dataclass(frozen=True)
class Scenario:
    spec: ScenarioSpec
    psi: SpinorField
    ext: ExternalFields
    constants: PhysicalConstants
    references: dict

    @property
    def grid(self) -> GridSpec:
        return self.psi.grid


def _gaussian(grid: GridSpec, sigma0: float, center=None) -> np.ndarray:
    X = grid.coords()
    c = np.zeros(grid.dims) if center is None else np.asarray(center, dtype=float)
    r2 = sum((x - ci) ** 2 for x, ci in zip(X, c))
    # |psi|^2 has standard deviation sigma0 per axis
    f = np.exp(-r2 / (4 * sigma0**2))
    return f / np.sqrt(np.sum(f**2) * grid.cell_volume)


def _check_wavelength(grid: GridSpec, wavenumber: float, what: str):
    if wavenumber != 0 and 2 * np.pi / abs(wavenumber) < 4 * max(grid.spacing):
        raise ValueError(f"{what} wavelength {2 * np.pi / abs(wavenumber):.3g} is below 4 grid spacings")


def dispersion_width2(sigma0: float, t):
    """Variance of a free Gaussian packet: sigma0^2 (1 + (hbar t / 2 m sigma0^2)^2)."""
    return sigma0**2 * (1 + (np.asarray(t) / (2 * sigma0**2)) ** 2)


# --- builders: (spec, grid) -> (psi values, ExternalFields, references) -----


def _plane_wave(p, g):
    (x,) = g.coords()[:1]
    _check_wavelength(g, 2 * p["k"], "plane-wave triad")
    ph = np.exp(1j * p["k"] * x)
    refs = {"v": [p["k"], 0.0, 0.0], "kappa": 0.0, "tau": 0.0, "triad_rate": 2 * p["k"]}
    return np.stack([ph, 0 * ph]), ExternalFields(), refs


def _two_component_plane_wave(p, g):
    (x,) = g.coords()[:1]
    _check_wavelength(g, 2 * p["k"], "plane-wave triad")
    ph = np.exp(1j * p["k"] * x)
    a = p["alpha"]
    s = [0.5 * np.sin(2 * a), 0.0, 0.5 * np.cos(2 * a)]
    refs = {"v": [p["k"], 0.0, 0.0], "s": s, "kappa": 0.0, "tau": 0.0}
    return np.stack([np.cos(a) * ph, np.sin(a) * ph]), ExternalFields(), refs


def _spin_helix(p, g):
    """theta = theta0, chi = q x, phi = 0: the spin turns about z with wavenumber q.

    The spinor is double-valued on the box when q L / 2 is an odd multiple of
    pi; every bilinear is periodic and the derivatives used for velocities
    are sign-aligned, so this is harmless.
    """
    (x,) = g.coords()[:1]
    q, th = p["q"], p["theta0"]
    _check_wavelength(g, q, "helix")
    e = euler_from_angles(g, 1.0, th, 0.0, q * x)
    sin, cos = np.sin(th), np.cos(th)
    curv = q * sin * abs(sin)  # |(s.grad)s| at s_x = +-sin(theta0)
    refs = {
        "v": [-0.5 * q * cos, 0.0, 0.0],
        "s_amplitude": 0.5 * sin,
        "s_z": 0.5 * cos,
        "spin_wavenumber": q,
        "kappa_max": curv,
    }
    return euler_compose(e).values, ExternalFields(), refs


def _euler_phase_wave(p, g):
    """theta = pi/2, phi = q x, chi = 0 taken literally: a plane wave with uniform spin along x."""
    (x,) = g.coords()[:1]
    e = euler_from_angles(g, 1.0, np.pi / 2, p["q"] * x, 0.0)
    refs = {"v": [p["q"] / 2, 0.0, 0.0], "s": [0.5, 0.0, 0.0]}
    return euler_compose(e).values, ExternalFields(), refs


def _free_gaussian(p, g):
    f = _gaussian(g, p["sigma0"])
    refs = {"sigma0": p["sigma0"], "v": [0.0, 0.0, 0.0], "s": [0.0, 0.0, 0.5]}
    return np.stack([f, 0 * f]).astype(complex), ExternalFields(), refs


def _helix_packet(p, g):
    """Gaussian envelope times the equatorial helix spinor (e^{-iqx/2}, e^{iqx/2})/sqrt 2."""
    f = _gaussian(g, p["sigma0"])
    x = g.coords()[0]
    q = p["q"]
    _check_wavelength(g, q, "helix")
    refs = {"sigma0": p["sigma0"], "spin_wavenumber": q}
    return np.stack([f * np.exp(-0.5j * q * x), f * np.exp(0.5j * q * x)]) / np.sqrt(2), ExternalFields(), refs


def _textured_gaussian(p, g):
    """Gaussian with a smooth spin texture: theta and chi vary along every axis."""
    X = g.coords3()
    f = _gaussian(g, p["sigma0"] * 2)
    w = 2 * np.pi / g.extents[0]
    theta = np.pi / 2 + 0.6 * np.sin(w * X[0]) * np.cos(w * X[1])
    chi = 2 * w * X[0] + np.sin(w * X[2]) + 0.5 * np.cos(w * X[1])
    e = euler_from_angles(g, f, theta, 0.0, chi)
    return euler_compose(e).values, ExternalFields(), {"sigma0": 2 * p["sigma0"]}


def _larmor(p, g):
    one = np.ones(g.shape, dtype=complex) / np.sqrt(2)
    B = VectorField.uniform(g, (0.0, 0.0, p["B0"]))
    omega = p["charge"] * p["B0"] / p["light_speed"]
    refs = {"omega": omega, "s0": [0.5, 0.0, 0.0]}
    return np.stack([one, one]), ExternalFields(B=B), refs


def _uniform(p, g):
    one = np.ones(g.shape, dtype=complex)
    return np.stack([one, 0 * one]), ExternalFields(), {"v": [0.0, 0.0, 0.0], "s": [0.0, 0.0, 0.5]}


def _polar(g):
    x, y = g.coords()[:2]
    return x, y, np.arctan2(y, x) + np.pi / 2


def _spin_vortex(p, g):
    """s = (-y, x, 0)/r: spin lines are circles about the z axis."""
    x, y, chi = _polar(g)
    e = euler_from_angles(g, 1.0, np.pi / 2, 0.0, chi)
    r = p["radius"]
    refs = {"radius": r, "kappa": 1 / r, "tau": 0.0, "circumference": 2 * np.pi * r, "seed": [r, 0.0, 0.0]}
    return euler_compose(e).values, ExternalFields(), refs


def _helix_texture(p, g):
    """s = (-y, x, b)/sqrt(r^2 + b^2): spin lines are helices of radius r and pitch 2 pi b."""
    x, y, chi = _polar(g)
    b = p["pitch_b"]
    rho = np.sqrt(x**2 + y**2)
    theta = np.arccos(b / np.sqrt(rho**2 + b**2))
    e = euler_from_angles(g, 1.0, theta, 0.0, chi)
    r = p["radius"]
    d = r**2 + b**2
    refs = {"radius": r, "pitch_b": b, "kappa": r / d, "tau": b / d, "seed": [r, 0.0, 0.0]}
    return euler_compose(e).values, ExternalFields(), refs


_CATALOG = {
    "uniform": (1, _uniform, 0.0),
    "plane_wave": (1, _plane_wave, 0.0),
    "two_component_plane_wave": (1, _two_component_plane_wave, 0.0),
    "spin_helix": (1, _spin_helix, 0.0),
    "euler_phase_wave": (1, _euler_phase_wave, 0.0),
    "free_gaussian": (1, _free_gaussian, 0.0),
    "helix_packet": (1, _helix_packet, 0.0),
    "textured_gaussian": (3, _textured_gaussian, 0.0),
    "larmor": (1, _larmor, 1.0),
    "spin_vortex": (2, _spin_vortex, 0.0),
    "helix_texture": (2, _helix_texture, 0.0),
}

SCENARIOS = tuple(sorted(_CATALOG))


def make_spec(name: str, dims: int | None = None, extent: float = DEFAULT_EXTENT, charge=None, **params) -> ScenarioSpec:
    if name not in _CATALOG:
        raise ValueError(f"unknown scenario {name!r}; known: {', '.join(SCENARIOS)}")
    d0, _, e0 = _CATALOG[name]
    merged = default_params(extent)
    unknown = set(params) - set(merged) - {"light_speed"}
    if unknown:
        raise ValueError(f"unknown parameter(s) for {name}: {', '.join(sorted(unknown))}")
    merged.update({k: float(v) for k, v in params.items()})
    return ScenarioSpec(name, d0 if dims is None else int(dims), merged, float(extent), e0 if charge is None else float(charge))


def instantiate(spec: ScenarioSpec | str, resolution: int = 64):
    """Sample a scenario on a grid with ``resolution`` points per axis."""
    if isinstance(spec, str):
        spec = make_spec(spec)
    if spec.name not in _CATALOG:
        raise ValueError(f"unknown scenario {spec.name!r}")
    k = PhysicalConstants(charge=spec.charge, light_speed=spec.params.get("light_speed", 1.0))
    params = dict(spec.params, charge=k.charge, light_speed=k.light_speed)
    g = spec.grid(resolution)
    values, ext, refs = _CATALOG[spec.name][1](params, g)
    return Scenario(spec, SpinorField(g, values), ext, k, refs)


def calibration_family(resolution: int = 128, extent: float = DEFAULT_EXTENT):
    """Reference states for calibrate_conventions: (name, Scenario) pairs."""
    return [
        ("plane_wave", instantiate(make_spec("plane_wave", extent=extent), resolution)),
        ("two_component_plane_wave", instantiate(make_spec("two_component_plane_wave", extent=extent), resolution)),
        ("spin_helix", instantiate(make_spec("spin_helix", extent=extent, theta0=np.pi / 3), resolution)),
        ("euler_phase_wave", instantiate(make_spec("euler_phase_wave", extent=extent), resolution)),
    ]
