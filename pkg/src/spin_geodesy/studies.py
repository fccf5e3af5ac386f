"""Measurements shared by the verification suites and the acceptance tests.

Each routine builds its states from the scenario catalog, measures one
quantity at one resolution and returns plain floats or dicts, so that the
caller decides tolerances and convergence windows.
"""

from __future__ import annotations

import numpy as np

from . import hydro, pauli
from . import streamlines as sl
from . import teleparallel as tp
from . import triad as tr
from .calibration import calibrate_conventions
from .grid import SpinorField
from .observables import bilinear_velocity, density, density_spin, euler_decompose, velocity_euler
from .scenarios import calibration_family, dispersion_width2, instantiate, make_spec

DEFAULT_RESOLUTIONS = (64, 128, 256)


def rel_max(candidate: np.ndarray, ref: np.ndarray, where=None) -> float:
    """max |candidate - ref| / max |ref| over points where both are finite."""
    ok = np.all(np.isfinite(candidate), axis=0) & np.all(np.isfinite(ref), axis=0)
    if where is not None:
        ok &= where
    if not ok.any():
        return 0.0
    scale = max(float(np.max(np.abs(ref[:, ok]))), 1e-300)
    return float(np.max(np.abs(candidate[:, ok] - ref[:, ok]))) / scale


def evolved_state(name: str, resolution: int, t_final: float = 0.5, **params) -> SpinorField:
    """Scenario state propagated freely to ``t_final`` with dt <= 0.5 dx^2."""
    sc = instantiate(make_spec(name, **params), resolution)
    dx = min(sc.grid.spacing)
    steps = int(np.ceil(t_final / (0.5 * dx**2)))
    run = pauli.evolve(sc.psi, sc.ext, t_final / steps, steps, stride=steps, k=sc.constants, track_energy=False)
    return run.final


def guidance_states(resolution: int):
    """The three state families for the guidance and triad checks: (name, psi, A, constants)."""
    pw = instantiate("plane_wave", resolution)
    helix = instantiate(make_spec("spin_helix", theta0=np.pi / 3), resolution)
    gauss = evolved_state("helix_packet", resolution)
    return [
        ("plane_wave", pw.psi, pw.ext.A, pw.constants),
        ("spin_helix", helix.psi, helix.ext.A, helix.constants),
        ("evolved_gaussian", gauss, None, pw.constants),
    ]


# --- triad and guidance -------------------------------------------------------


def triad_defects(psi: SpinorField) -> dict:
    gram, hand = tr.orthonormality_defect(tr.triad_from_spinor(psi))
    return {"gram": gram, "handedness": hand}


def evolved_texture(resolution: int = 64, t_final: float = 0.25) -> SpinorField:
    """3D textured Gaussian after a short free evolution."""
    return evolved_state("textured_gaussian", resolution, t_final)


def guidance_discrepancy(psi: SpinorField, A=None, k=None) -> float:
    """Relative max difference of the triad-gradient velocity and the bilinear velocity.

    Points below the residual density floor are excluded: in the far tails
    of a packet the relative stencil error grows like (x/sigma^2)^3 and is
    not yet in the asymptotic regime at practical resolutions.
    """
    k = k if k is not None else instantiate("uniform", 8).constants
    rho = density(psi)
    geo = tr.guidance_velocity_geometric(tr.triad_from_spinor(psi), A, k.gyro).values
    return rel_max(geo, bilinear_velocity(psi, A, k).values, rho > hydro.RESIDUAL_RHO_EPS * rho.max())


def plane_wave_hand_value(resolution: int) -> float:
    """max |v - hbar k/m| over both velocity forms, spectral derivatives."""
    sc = instantiate("plane_wave", resolution)
    ref = np.zeros((3,) + sc.grid.shape)
    ref[0] = sc.references["v"][0]
    v_bil = bilinear_velocity(sc.psi, method="spectral").values
    v_geo = tr.guidance_velocity_geometric(tr.triad_from_spinor(sc.psi), method="spectral").values
    return float(max(np.max(np.abs(v_bil - ref)), np.max(np.abs(v_geo - ref))))


# --- calibrated Euler and Frenet forms -----------------------------------------


def calibrate(resolution: int = 128, fault=None, tol: float | None = None):
    kw = {} if tol is None else {"tol": tol}
    return calibrate_conventions(calibration_family(resolution), fault=fault, **kw)


def frenet_discrepancy(sc, sigma_frenet: int) -> float:
    """Relative max difference of the Frenet-form velocity and the bilinear velocity."""
    frame = tr.spin_line_frame(tr.triad_from_spinor(sc.psi))
    v = tr.velocity_frenet(frame, tr.frame_divergences(frame), sigma_frenet, sc.ext.A, sc.constants.gyro).values
    return rel_max(v, bilinear_velocity(sc.psi, sc.ext.A, sc.constants).values)


def euler_discrepancy(sc, signature) -> float:
    v = velocity_euler(euler_decompose(sc.psi), sc.ext.A, signature, sc.constants).values
    return rel_max(v, bilinear_velocity(sc.psi, sc.ext.A, sc.constants).values)


def plane_wave_divergences(resolution: int) -> dict:
    """Errors of div m = -2k sin 2kx and div n = 2k cos 2kx, and the frame angle used."""
    sc = instantiate("plane_wave", resolution)
    frame = tr.spin_line_frame(tr.triad_from_spinor(sc.psi))
    sc_ = tr.frame_divergences(frame)
    k = sc.spec.params["k"]
    x = sc.grid.coords()[0]
    return {
        "div_m": float(np.max(np.abs(sc_.div_m.values + 2 * k * np.sin(2 * k * x)))),
        "div_n": float(np.max(np.abs(sc_.div_n.values - 2 * k * np.cos(2 * k * x)))),
        "beta0": frame.beta0,
    }


def frame_relations(resolution: int) -> dict:
    """Divergence relations and torsion-route checks on the conical helix."""
    sc = instantiate(make_spec("spin_helix", theta0=np.pi / 3), resolution)
    triad = tr.triad_from_spinor(sc.psi)
    frame = tr.spin_line_frame(triad)
    out = {f"relation_{k}": v for k, v in tr.frame_divergences(frame).relation_residuals(frame).items()}
    T = tr.torsion3(triad)
    out["geodesic_residual"] = tr.triad_geodesic_residual(triad, T)
    out["torsion_routes"] = float(np.nanmax(np.abs(T - tr.torsion3(triad, route="frame"))))
    out["adaptation_defect"] = float(np.nanmax(np.abs(tr.frenet_adaptation_defect(frame))))
    out["rotation_angle"] = tr.rotation_angle_stats(triad)
    return out


# --- spin streamlines ----------------------------------------------------------


def streamline_errors(name: str, resolution: int, **params) -> dict:
    """Frenet apparatus of one traced turn of the circle or helix texture against its closed form."""
    sc = instantiate(make_spec(name, **params), resolution)
    refs = sc.references
    triad = tr.triad_from_spinor(sc.psi)
    r, b = refs["radius"], refs.get("pitch_b", 0.0)
    turn = 2 * np.pi * np.hypot(r, b)
    line = sl.frenet_apparatus(sl.trace_spin_streamline(triad.e3, refs["seed"], max_len=1.1 * turn))
    kT, tT, anti = sl.kappa_tau_from_torsion(tr.torsion3(triad), sc.grid, line)
    return {
        "kappa_rel": float(np.max(np.abs(line.kappa - refs["kappa"]))) / refs["kappa"],
        "tau_abs": float(np.max(np.abs(line.tau - refs["tau"]))),
        "kappa_T": float(np.max(np.abs(kT - line.kappa))),
        "tau_T": float(np.max(np.abs(tT - line.tau))),
        "antisymmetry": float(np.max(np.abs(anti))),
        "return_length": sl.first_return(line) if b == 0 else float("nan"),
        "samples": len(line),
    }


# --- hydrodynamics ---------------------------------------------------------------


def fixed_time_run(name: str, resolution: int, t_star: float = 0.5, base: int = 64, dt_factor: float = 0.5, stride0: int = 4):
    """Snapshots at t* - h_t, t*, t* + h_t under joint refinement.

    dt = dt_factor dx^2 and the snapshot stride doubles per halving of dx,
    so the time-difference step h_t = stride dt stays proportional to dx and
    both truncation errors fall as dx^2.
    """
    if resolution % base:
        raise ValueError(f"resolution {resolution} must be a multiple of {base}")
    sc = instantiate(name, resolution)
    dx = min(sc.grid.spacing)
    dt = dt_factor * dx**2
    stride = stride0 * resolution // base
    h_t = stride * dt
    pre = int(round((t_star - h_t) / dt))
    if pre < 0 or abs(pre * dt - (t_star - h_t)) > 1e-9 * t_star:
        raise ValueError("t_star must be a multiple of the time-difference step")
    psi = sc.psi
    if pre:
        psi = pauli.evolve(psi, sc.ext, dt, pre, stride=pre, k=sc.constants, track_energy=False).final
    run = pauli.evolve(psi, sc.ext, dt, 2 * stride, stride=stride, k=sc.constants, track_energy=False)
    return sc, run


def hydro_residuals(name: str, resolution: int, t_star: float = 0.5) -> dict:
    sc, run = fixed_time_run(name, resolution, t_star)
    ext, k = sc.ext, sc.constants
    return {
        "continuity": float(pauli.continuity_residual(run, ext, k)[1][0]),
        "momentum": float(hydro.momentum_residual(run, ext, k)[0][0]),
        "spin": float(hydro.spin_residual(run, ext, k)[0][0]),
    }


def larmor_frequency(resolution: int = 32, periods: float = 2.0, steps_per_period: int = 400) -> dict:
    """Precession frequency fitted to the mean spin against the closed form eB0/mc."""
    sc = instantiate("larmor", resolution)
    omega = sc.references["omega"]
    period = 2 * np.pi / abs(omega)
    steps = int(periods * steps_per_period)
    run = pauli.evolve(sc.psi, sc.ext, period / steps_per_period, steps, stride=10, k=sc.constants, track_energy=False)
    sx, sy = [], []
    for snap in run.snapshots:
        _, s = density_spin(snap)
        sx.append(np.mean(s.values[0]))
        sy.append(np.mean(s.values[1]))
    phase = np.unwrap(np.arctan2(-np.array(sy), np.array(sx)))
    fit = np.polyfit(np.array(run.times), phase, 1)[0]
    return {"omega": float(fit), "reference": float(omega), "rel_error": float(abs(fit - omega) / abs(omega))}


def dispersion_error(resolution: int = 128, samples: int = 9) -> float:
    """max relative error of the packet variance over t in [0, 2 m sigma0^2/hbar]."""
    sc = instantiate("free_gaussian", resolution)
    s0 = sc.references["sigma0"]
    t_end = 2 * s0**2
    dx = min(sc.grid.spacing)
    steps = (samples - 1) * int(np.ceil(t_end / (samples - 1) / (0.5 * dx**2)))
    run = pauli.evolve(sc.psi, sc.ext, t_end / steps, steps, stride=steps // (samples - 1), k=sc.constants, track_energy=False)
    x = sc.grid.coords()[0]
    worst = 0.0
    for t, snap in zip(run.times, run.snapshots):
        rho = np.sum(np.abs(snap.values) ** 2, axis=0)
        w2 = np.sum(x**2 * rho) / np.sum(rho)
        worst = max(worst, abs(w2 / dispersion_width2(s0, t) - 1))
    return float(worst)


def unitarity(name: str = "larmor", resolution: int = 64, steps: int = 1000) -> dict:
    sc = instantiate(name, resolution)
    dt = 0.5 * min(sc.grid.spacing) ** 2
    run = pauli.evolve(sc.psi, sc.ext, dt, steps, stride=steps // 10, k=sc.constants)
    n, e = np.array(run.norms), np.array(run.energies)
    # <H> can vanish (the Larmor state has zero energy); fall back on the energy scale |H psi|/|psi|
    hp = pauli.apply_hamiltonian(sc.psi, sc.ext, sc.constants).values
    scale = max(abs(e[0]), float(np.sqrt(np.sum(np.abs(hp) ** 2) * sc.grid.cell_volume / n[0])) * n[0])
    return {
        "norm_drift": float(np.max(np.abs(n - n[0])) / n[0]),
        "energy_drift": float(np.max(np.abs(e - e[0])) / scale),
    }


# --- teleparallel ------------------------------------------------------------------


def group_draws(draws: int = 1000, seed: int = 0, c: float = 1.0) -> dict:
    """Worst defects of L^T eta L = eta and R^T R = I over random parameters."""
    rng = np.random.default_rng(seed)
    worst_L = worst_R = 0.0
    for _ in range(draws):
        d = rng.standard_normal(3)
        v = rng.uniform(0, 0.95 * c) * d / np.linalg.norm(d)
        L = tp.lorentz_boost(v, c)
        worst_L = max(worst_L, float(np.max(np.abs(L.T @ tp.ETA @ L - tp.ETA))))
        th, ph, ch = rng.uniform(-np.pi, np.pi, 3)
        R = tp.rotation_from_euler(th, ph, ch)
        worst_R = max(worst_R, float(np.max(np.abs(R.T @ R - np.eye(4)))))
    return {"boost": worst_L, "rotation": worst_R}


def rotating_geodesic(omega: float = 0.5, frame_rate: float = 0.0, steps: int = 1000, periods: float = 1.0) -> dict:
    """Autoparallel of the rotating-frame tetrad against the transformed closed-form worldline."""
    fn = tp.rotating_frame(omega, frame_rate)
    X0 = np.array([0.4, 0.2, 0.0])
    V = np.array([0.1, 0.05, 0.02])
    x0 = np.concatenate([[0.0], X0])
    u0 = tp.rotating_frame_initial_velocity(omega, X0, V)
    t_end = periods * 2 * np.pi / omega
    res = tp.geodesic_integrate(fn, x0, u0, steps=steps, ds=t_end / u0[0] / steps)
    ref = tp.rotating_frame_worldline(omega, frame_rate, X0, V, res.x[:, 0])
    err = np.max(np.linalg.norm(res.x[:, 1:] - ref[:, 1:], axis=1)) / np.max(np.linalg.norm(ref[:, 1:], axis=1))
    return {"rel_error": float(err), "normalization_drift": res.normalization_drift, "t_end": float(res.x[-1, 0])}


def streamline_family_resolutions(resolutions):
    """2D textures are traced at half the base resolution per axis."""
    return [max(8, r // 2) for r in resolutions]


def texture_resolution(resolutions) -> int:
    """The 3D textured state is checked at a quarter of the finest base resolution."""
    return max(8, max(resolutions) // 4)
