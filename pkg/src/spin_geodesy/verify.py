"""Verification suites and the deterministic JSON report.

A check is either a bound on a measured value (scaled by the tolerance
scale) or a convergence slope over three resolutions that must fall in a
window. Slopes of residuals that sit at round-off on every level are
reported as ``"exact"`` and pass.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import __version__, hydro, kernels, pauli
from . import studies as st
from . import teleparallel as tp
from .calibration import DEFAULT_TOL as CALIBRATION_TOL
from .calibration import CalibrationError
from .config import SUITES, RunConfig
from .convergence import EXACT, convergence_order
from .observables import density_spin
from .scenarios import calibration_family

ROUNDOFF_FLOOR = 1e-10

# bounds on measured values; every key is overridable from [tolerances]
DEFAULT_TOLERANCES = {
    "triad_orthonormality": 1e-10,
    "triad_orthonormality_texture": 1e-10,
    "spin_magnitude": 1e-12,
    "guidance_hand_value": 1e-10,
    "calibration": CALIBRATION_TOL,
    "frame_relations": 1e-10,
    "triad_geodesic_residual": 1e-10,
    "triad_torsion_routes": 1e-10,
    "frenet_adaptation": 1e-10,
    "circle_kappa": 5e-3,
    "circle_tau": 1e-3,  # times 1/r
    "circle_length": 5e-3,
    "helix_kappa": 5e-3,
    "helix_tau": 5e-3,
    "larmor_frequency": 1e-3,
    "dispersion": 1e-2,
    "norm_drift": 1e-8,
    "energy_drift": 1e-6,
    "tele_trace_identity": 1e-10,
    "tele_metric_compatibility": 1e-10,
    "tele_christoffel_symmetry": 1e-12,
    "boost_group": 1e-12,
    "rotation_group": 1e-12,
    "geodesic_worldline": 1e-3,
    "geodesic_worldline_torsional": 1e-3,
    "geodesic_normalization": 1e-8,
}

ORDER_WINDOW = (1.8, None)
IDENTITY_WINDOW = (1.8, 2.2)
STREAMLINE_WINDOW = (1.5, 2.2)


@dataclass
class Check:
    name: str
    passed: bool
    value: float | str | None
    tolerance: object
    slope: float | str | None = None
    samples: list = field(default_factory=list)
    detail: str | None = None

    def as_dict(self) -> dict:
        d = {"name": self.name, "passed": bool(self.passed), "value": _clean(self.value), "tolerance": _clean(self.tolerance)}
        if self.slope is not None:
            d["slope"] = _clean(self.slope)
        if self.samples:
            d["samples"] = _clean(self.samples)
        if self.detail:
            d["detail"] = self.detail
        return d


def _clean(x):
    """JSON-safe copy: non-finite floats become strings, numpy scalars become Python ones."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    return x


class Context:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.checks: list[Check] = []
        self.environment: dict = {}
        self.res = tuple(cfg.resolutions)
        if len(self.res) < 3:
            raise ValueError("verification needs at least 3 resolutions")
        for a, b in zip(self.res[:-1], self.res[1:]):
            if b != 2 * a:
                raise ValueError(f"verification resolutions must double, got {self.res}")

    def tol(self, key: str) -> float:
        return self.cfg.tolerances.get(key, DEFAULT_TOLERANCES[key]) * self.cfg.tolerance_scale

    def bound(self, name: str, value: float, key: str | None = None, factor: float = 1.0, detail=None):
        tol = self.tol(key or name) * factor
        ok = value is not None and math.isfinite(value) and value <= tol
        self.checks.append(Check(name, ok, value, tol, detail=detail))

    def order(self, name: str, samples, window=ORDER_WINDOW, floor: float = ROUNDOFF_FLOOR):
        slope = convergence_order(samples, floor=floor)
        lo, hi = window
        ok = slope == EXACT or (slope >= lo and (hi is None or slope <= hi))
        self.checks.append(Check(name, ok, samples[-1][1], list(window), slope=slope, samples=[list(s) for s in samples]))

    def fail(self, name: str, tolerance, detail: str):
        self.checks.append(Check(name, False, None, tolerance, detail=detail))


def _dx(extent, n):
    return extent / n


# --- suites -------------------------------------------------------------------------------


def suite_observables(ctx: Context):
    worst = 0.0
    for n in ctx.res:
        for _, psi, _, _ in st.guidance_states(n):
            d = st.triad_defects(psi)
            worst = max(worst, d["gram"], d["handedness"])
    ctx.bound("triad_orthonormality", worst)
    n3 = st.texture_resolution(ctx.res)
    psi = st.evolved_texture(n3)
    d = st.triad_defects(psi)
    ctx.bound("triad_orthonormality_texture", max(d["gram"], d["handedness"]))
    _, s = density_spin(psi)
    mag = np.sqrt(np.sum(s.values**2, axis=0))
    ctx.bound("spin_magnitude", float(np.nanmax(np.abs(mag - 0.5))))
    ctx.environment["texture_resolution"] = n3


def suite_guidance(ctx: Context):
    rows = {}
    for n in ctx.res:
        for name, psi, A, k in st.guidance_states(n):
            rows.setdefault(name, []).append((_dx(16.0, n), st.guidance_discrepancy(psi, A, k)))
    for name, samples in sorted(rows.items()):
        ctx.order(f"guidance_order_{name}", samples)
    ctx.bound("guidance_hand_value", st.plane_wave_hand_value(ctx.res[-1]))


def _signature(ctx: Context):
    if "convention_signature" in ctx.environment:
        return ctx.environment["_signature"]
    try:
        sig = st.calibrate(ctx.res[min(1, len(ctx.res) - 1)], fault=ctx.cfg.inject_fault, tol=ctx.tol("calibration"))
    except CalibrationError as exc:
        ctx.fail("calibration", ctx.tol("calibration"), str(exc))
        ctx.environment["convention_signature"] = {"status": "failed"}
        ctx.environment["_signature"] = None
        return None
    ctx.bound("calibration", sig.discrepancy, detail=f"status {sig.status}")
    ctx.environment["convention_signature"] = sig.as_dict()
    ctx.environment["_signature"] = sig
    return sig


def suite_triad(ctx: Context):
    sig = _signature(ctx)
    if sig is not None:
        frenet, euler = {}, {}
        for n in ctx.res:
            for name, sc in calibration_family(n):
                frenet.setdefault(name, []).append((_dx(16.0, n), st.frenet_discrepancy(sc, sig.sigma_frenet)))
                euler.setdefault(name, []).append((_dx(16.0, n), st.euler_discrepancy(sc, sig)))
        for name in sorted(frenet):
            ctx.order(f"frenet_velocity_order_{name}", frenet[name])
            ctx.order(f"euler_velocity_order_{name}", euler[name])
    divs = [(_dx(16.0, n), st.plane_wave_divergences(n)) for n in ctx.res]
    ctx.order("plane_wave_div_m_order", [(h, d["div_m"]) for h, d in divs])
    ctx.order("plane_wave_div_n_order", [(h, d["div_n"]) for h, d in divs])
    rel = [st.frame_relations(n) for n in ctx.res]
    ctx.bound("frame_relations", max(max(r[k] for k in r if k.startswith("relation_")) for r in rel))
    ctx.bound("triad_geodesic_residual", max(r["geodesic_residual"] for r in rel))
    ctx.bound("triad_torsion_routes", max(r["torsion_routes"] for r in rel))
    ctx.bound("frenet_adaptation", max(r["adaptation_defect"] for r in rel))
    ctx.environment["rotation_angle_stats"] = rel[-1]["rotation_angle"]


def suite_frenet(ctx: Context):
    res2 = st.streamline_family_resolutions(ctx.res)
    circle = [(_dx(16.0, n), st.streamline_errors("spin_vortex", n)) for n in res2]
    helix = [(_dx(16.0, n), st.streamline_errors("helix_texture", n)) for n in res2]
    r = 16.0 / 4
    c, h = circle[-1][1], helix[-1][1]
    ctx.bound("circle_kappa", c["kappa_rel"])
    ctx.bound("circle_tau", c["tau_abs"], factor=1 / r)
    ctx.bound("circle_length", abs(c["return_length"] / (2 * np.pi * r) - 1))
    ctx.bound("helix_kappa", h["kappa_rel"])
    b = 16.0 / 8
    ctx.bound("helix_tau", h["tau_abs"] / (b / (r**2 + b**2)))
    ctx.order("circle_kappa_T_order", [(x, d["kappa_T"]) for x, d in circle], STREAMLINE_WINDOW)
    ctx.order("circle_tau_T_order", [(x, d["tau_T"]) for x, d in circle], STREAMLINE_WINDOW)
    ctx.order("helix_kappa_T_order", [(x, d["kappa_T"]) for x, d in helix], STREAMLINE_WINDOW)
    ctx.order("helix_tau_T_order", [(x, d["tau_T"]) for x, d in helix], STREAMLINE_WINDOW)
    ctx.environment["streamline_resolutions"] = res2


def suite_hydro(ctx: Context):
    base = ctx.res[0]
    h_t0 = 4 * 0.5 * _dx(16.0, base) ** 2
    t_star = h_t0 * math.ceil(0.5 / h_t0 - 1e-9)
    ctx.environment["hydro_t_star"] = t_star
    ctx.environment["hydro_dt"] = [0.5 * _dx(16.0, n) ** 2 for n in ctx.res]
    for name in ("free_gaussian", "helix_packet"):
        rows = []
        for n in ctx.res:
            sc, run = st.fixed_time_run(name, n, t_star, base=base)
            rows.append(
                (
                    _dx(16.0, n),
                    float(pauli.continuity_residual(run, sc.ext, sc.constants)[1][0]),
                    float(hydro.momentum_residual(run, sc.ext, sc.constants)[0][0]),
                    float(hydro.spin_residual(run, sc.ext, sc.constants)[0][0]),
                )
            )
        for j, term in enumerate(("continuity", "momentum", "spin"), start=1):
            ctx.order(f"{term}_order_{name}", [(r[0], r[j]) for r in rows])
    lar = st.larmor_frequency()
    ctx.bound("larmor_frequency", lar["rel_error"])
    ctx.bound("dispersion", st.dispersion_error(ctx.res[0] * 2))
    for name in ("free_gaussian", "larmor"):
        u = st.unitarity(name, ctx.res[0])
        ctx.bound(f"norm_drift_{name}", u["norm_drift"], key="norm_drift")
        ctx.bound(f"energy_drift_{name}", u["energy_drift"], key="energy_drift")


def suite_teleparallel(ctx: Context):
    params = dict(ctx.cfg.tetrad_params)
    spacing = params.pop("spacing", 0.2)
    params.pop("points", None)
    cfg4 = tp.Config4D(ctx.cfg.nu, ctx.cfg.light_speed)
    mism = {}
    names = ["rotating_frame", "perturbed_rotating_frame"]
    if ctx.cfg.tetrad not in names:
        names.append(ctx.cfg.tetrad)
    for name in names:
        fn = tp.catalog_entry(name, **(params if name == ctx.cfg.tetrad else {}))
        rows = tp.refinement_study(fn, spacing=spacing, levels=3, config=cfg4)
        for key in ("weitzenboeck_flatness", "riemann_from_torsion", "decomposition", "torsion_routes"):
            ctx.order(f"tele_{key}_order_{name}", [(h, r[key]) for h, r in rows], IDENTITY_WINDOW)
        ctx.bound(f"tele_trace_identity_{name}", max(r["trace_identity"] for _, r in rows), key="tele_trace_identity")
        ctx.bound(f"tele_metric_compatibility_{name}", max(r["metric_compatibility"] for _, r in rows), key="tele_metric_compatibility")
        ctx.bound(f"tele_christoffel_symmetry_{name}", max(r["christoffel_symmetry"] for _, r in rows), key="tele_christoffel_symmetry")
        mism[name] = {
            "riemann_from_torsion_partial": rows[-1][1]["riemann_from_torsion_partial"],
            "scalar_printed_mismatch": rows[-1][1]["scalar_printed_mismatch"],
            "torsion_magnitude": rows[-1][1]["torsion_magnitude"],
        }
    ctx.environment["teleparallel_diagnostics"] = mism
    g = st.group_draws()
    ctx.bound("boost_group", g["boost"])
    ctx.bound("rotation_group", g["rotation"])
    lab = st.rotating_geodesic(0.5, 0.0)
    tors = st.rotating_geodesic(0.5, 0.25)
    ctx.bound("geodesic_worldline", lab["rel_error"])
    ctx.bound("geodesic_worldline_torsional", tors["rel_error"])
    ctx.bound("geodesic_normalization", max(lab["normalization_drift"], tors["normalization_drift"]))


SUITE_FUNCS = {
    "observables": suite_observables,
    "guidance": suite_guidance,
    "triad": suite_triad,
    "frenet": suite_frenet,
    "hydro": suite_hydro,
    "teleparallel": suite_teleparallel,
}


def expand_suites(names) -> list[str]:
    out = []
    for n in names:
        if n == "all":
            out.extend(SUITES)
        elif n in SUITE_FUNCS:
            out.append(n)
        else:
            raise ValueError(f"unknown suite {n!r}; known: all, {', '.join(SUITES)}")
    return [s for s in SUITES if s in out]


def verify(suites, cfg: RunConfig = RunConfig()) -> dict:
    """Run the selected suites and return the report as a plain dict."""
    names = expand_suites([suites] if isinstance(suites, str) else suites)
    ctx = Context(cfg)
    for name in names:
        SUITE_FUNCS[name](ctx)
    env = {k: v for k, v in ctx.environment.items() if not k.startswith("_")}
    env.update(
        resolutions=list(ctx.res),
        tolerance_scale=cfg.tolerance_scale,
        inject_fault=cfg.inject_fault,
        kernel_backend=kernels.BACKEND,
        version=__version__,
    )
    checks = sorted((c.as_dict() for c in ctx.checks), key=lambda d: d["name"])
    failed = [c["name"] for c in checks if not c["passed"]]
    return _clean(
        {
            "suites": names,
            "checks": checks,
            "environment": env,
            "failed": failed,
            "status": "fail" if failed else "pass",
        }
    )


def report_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"
