"""Command-line entry point.

Exit codes: 0 success (all checks pass), 1 error (bad config, unstable run,
missing input), 2 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, pauli
from . import streamlines as sl
from . import studies as st
from . import teleparallel as tp
from . import triad as tr
from .calibration import CalibrationError, convention_scores
from .config import SUITES, ConfigError, RunConfig, load_config, parse_resolutions, parse_seed_points, validate
from .convergence import convergence_order
from .grid import PhysicalConstants, ScalarField, SpinorField, _atomic_write, read_snapshot, write_array_snapshot, write_snapshot
from .observables import euler_decompose, hydro_fields
from .scenarios import calibration_family, instantiate, make_spec
from .verify import DEFAULT_TOLERANCES, ROUNDOFF_FLOOR, report_json, verify

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2

CSV_HELP = (
    "streamline CSV columns, in order: s, x, y, z, kappa, tau, flags "
    "(flags: 1 = degenerate curvature, 2 = truncated at a masked region); "
    "geodesic CSV columns: s, x0, x1, x2, x3, u0, u1, u2, u3, norm"
)


def write_json(path: Path, obj) -> None:
    _atomic_write(path, report_json(obj).encode())


def _config(args) -> RunConfig:
    cfg = load_config(args.config, DEFAULT_TOLERANCES) if args.config else RunConfig()
    updates = {}
    if getattr(args, "resolution", None):
        updates["resolutions"] = parse_resolutions(args.resolution)
    if getattr(args, "out", None):
        updates["out"] = args.out
    if getattr(args, "tolerance_scale", None) is not None:
        updates["tolerance_scale"] = args.tolerance_scale
    if getattr(args, "seed_points", None):
        updates["seed_points"] = parse_seed_points(args.seed_points)
    if getattr(args, "inject_fault", None):
        updates["inject_fault"] = args.inject_fault
    if getattr(args, "scenario", None):
        updates["scenario"] = args.scenario
    if getattr(args, "tetrad", None):
        updates["tetrad"] = args.tetrad
    cfg = replace(cfg, **updates)
    validate(cfg)
    return cfg


def _scenario(cfg: RunConfig, resolution: int):
    spec = make_spec(cfg.scenario, cfg.dims, cfg.extent, cfg.charge, **cfg.params, light_speed=cfg.light_speed)
    return instantiate(spec, resolution)


def _input_state(args, cfg):
    """Spinor from --input, or the configured scenario at the first resolution."""
    if getattr(args, "input", None):
        fld = read_snapshot(args.input)
        if not isinstance(fld, SpinorField):
            raise ConfigError(f"{args.input} does not hold a spinor field")
        return fld, None
    sc = _scenario(cfg, cfg.resolutions[0])
    return sc.psi, sc


# --- subcommands ---------------------------------------------------------------------------


def cmd_evolve(args, cfg):
    sc = _scenario(cfg, cfg.resolutions[0])
    dt = cfg.dt if cfg.dt is not None else 0.5 * min(sc.grid.spacing) ** 2
    run = pauli.evolve(sc.psi, sc.ext, dt, cfg.steps, cfg.stride, sc.constants)
    out = Path(cfg.out)
    names = []
    for i, snap in enumerate(run.snapshots):
        name = f"psi_{i:04d}.bin"
        write_snapshot(out / name, snap)
        names.append(name)
    n0 = run.norms[0]
    write_json(
        out / "run.json",
        {
            "scenario": cfg.scenario,
            "params": dict(sc.spec.params),
            "resolution": cfg.resolutions[0],
            "dt": dt,
            "steps": cfg.steps,
            "stride": cfg.stride,
            "times": list(run.times),
            "norms": list(run.norms),
            "energies": list(run.energies),
            "norm_drift": max(abs(n - n0) for n in run.norms) / n0,
            "snapshots": names,
        },
    )
    return EXIT_OK


def cmd_observables(args, cfg):
    psi, sc = _input_state(args, cfg)
    A = sc.ext.A if sc else None
    k = sc.constants if sc else _scenario_constants(cfg)
    hf = hydro_fields(psi, A, k)
    e = euler_decompose(psi)
    out = Path(cfg.out)
    for name, fld in (("rho", hf.rho), ("v", hf.v), ("s", hf.s), ("M", hf.M), ("N", hf.N)):
        write_snapshot(out / f"{name}.bin", fld)
    for name in ("R", "theta", "phi", "chi"):
        write_snapshot(out / f"euler_{name}.bin", getattr(e, name))
    write_snapshot(out / "euler_pole.bin", ScalarField(psi.grid, e.pole.astype(float)))
    smag = np.sqrt(np.sum(hf.s.values**2, axis=0))
    write_json(
        out / "summary.json",
        {
            "rho_min": float(hf.rho.values.min()),
            "rho_max": float(hf.rho.values.max()),
            "mean_abs_s": float(np.nanmean(smag)) if np.any(np.isfinite(smag)) else 0.0,
            "mask_fraction": float(1 - hf.mask.mean()),
            "pole_fraction": float(e.pole.mean()),
            "pole_gauge": "phi = 0 where sin(theta) vanishes",
        },
    )
    return EXIT_OK


def _scenario_constants(cfg):
    return PhysicalConstants(charge=cfg.charge or 0.0, light_speed=cfg.light_speed)


def cmd_triad(args, cfg):
    psi, _ = _input_state(args, cfg)
    triad = tr.triad_from_spinor(psi)
    out = Path(cfg.out)
    for name in ("e1", "e2", "e3"):
        write_snapshot(out / f"{name}.bin", getattr(triad, name))
    T = tr.torsion3(triad)
    write_array_snapshot(out / "torsion.bin", psi.grid, np.nan_to_num(T))
    gram, hand = tr.orthonormality_defect(triad)
    frame = tr.spin_line_frame(triad)
    write_json(
        out / "triad.json",
        {
            "orthonormality_defect": gram,
            "handedness_defect": hand,
            "geodesic_residual": tr.triad_geodesic_residual(triad, T),
            "torsion_route_difference": float(np.nanmax(np.abs(T - tr.torsion3(triad, route="frame")))),
            "rotation_angle_stats": tr.rotation_angle_stats(triad),
            "frame_relations": tr.frame_divergences(frame).relation_residuals(frame),
            "mask_fraction": float(1 - triad.mask.mean()),
        },
    )
    return EXIT_OK


def cmd_streamlines(args, cfg):
    psi, sc = _input_state(args, cfg)
    seeds = cfg.seed_points
    if not seeds:
        if sc is None or "seed" not in sc.references:
            raise ConfigError("no seed points: pass --seed-points or use a scenario with a reference seed")
        seeds = (tuple(sc.references["seed"]),)
    triad = tr.triad_from_spinor(psi)
    T = tr.torsion3(triad)
    out = Path(cfg.out)
    summary = []
    for i, seed in enumerate(seeds):
        line = sl.frenet_apparatus(sl.trace_spin_streamline(triad.e3, seed, max_len=args.max_len))
        kT, tT, _ = sl.kappa_tau_from_torsion(T, psi.grid, line)
        name = f"streamline_{i:03d}.csv"
        sl.write_streamline_csv(out / name, line)
        summary.append(
            {
                "file": name,
                "seed": list(seed),
                "samples": len(line),
                "truncated": line.truncated,
                "kappa_mean": float(np.mean(line.kappa)),
                "tau_mean": float(np.mean(line.tau)),
                "kappa_T_max_difference": float(np.max(np.abs(kT - line.kappa))),
                "tau_T_max_difference": float(np.max(np.abs(tT - line.tau))),
            }
        )
    write_json(out / "streamlines.json", {"columns": list(sl.CSV_COLUMNS), "lines": summary})
    return EXIT_OK


def cmd_tetrad4d(args, cfg):
    params = dict(cfg.tetrad_params)
    spacing = params.pop("spacing", 0.2)
    points = int(params.pop("points", args.points))
    if args.resolution:
        points = cfg.resolutions[0]
    conf = tp.Config4D(cfg.nu, cfg.light_speed)
    fn = tp.catalog_entry(cfg.tetrad, **params)
    center = (0.0, 1.0, 0.5, 0.0)
    conn = tp.connection_suite(tp.sample_tetrad(fn, center, spacing / 4, points))
    norms = tp.identity_norms(conn, tp.curvature_suite(conn, conf))
    rows = tp.refinement_study(fn, center, spacing, 3, config=conf)
    slopes = {key: convergence_order([(h, r[key]) for h, r in rows], floor=ROUNDOFF_FLOOR) for key in tp.CONVERGING}
    report = {
        "tetrad": cfg.tetrad,
        "params": params,
        "patch": {"center": list(center), "spacing": spacing / 4, "points": points},
        "norms": norms,
        "refinement": {"spacings": [h for h, _ in rows], "norms": {k: [r[k] for _, r in rows] for k in tp.CONVERGING}},
        "slopes": slopes,
        "nu": cfg.nu,
        "c": cfg.light_speed,
    }
    out = Path(cfg.out)
    write_json(out / "curvature_report.json", report)
    if args.geodesic:
        if cfg.tetrad not in ("rotating_frame", "identity", "boost", "rotation"):
            raise ConfigError("geodesic export is available for the rotating_frame and constant tetrads")
        omega = params.get("omega", 0.5)
        X0, V = np.array([0.4, 0.2, 0.0]), np.array([0.1, 0.05, 0.02])
        if cfg.tetrad == "rotating_frame":
            u0 = tp.rotating_frame_initial_velocity(omega, X0, V, cfg.light_speed)
        else:
            E = fn(np.zeros(4))
            g = E.T @ tp.ETA @ E
            u0 = np.array([1.0, 0, 0, 0]) / np.sqrt(-g[0, 0])
        res = tp.geodesic_integrate(fn, np.concatenate([[0.0], X0]), u0, steps=args.geodesic_steps, ds=args.geodesic_ds)
        lines = ["s,x0,x1,x2,x3,u0,u1,u2,u3,norm"]
        for s, x, u, n in zip(res.s, res.x, res.u, res.norms):
            lines.append(",".join(f"{v:.12g}" for v in (s, *x, *u, n)))
        _atomic_write(out / "geodesic.csv", ("\n".join(lines) + "\n").encode())
    return EXIT_OK


def cmd_calibrate(args, cfg):
    states = calibration_family(cfg.resolutions[0])
    out = Path(cfg.out)
    scores, geometric = convention_scores(states, cfg.inject_fault)
    table = [
        {"sigma_euler": se, "sigma_frenet": sf, "role_swap": sw, "discrepancy": d}
        for (se, sf, sw), d in sorted(scores.items(), key=lambda kv: (kv[1], kv[0]))
    ]
    try:
        sig = st.calibrate(cfg.resolutions[0], fault=cfg.inject_fault)
    except CalibrationError as exc:
        write_json(out / "calibration.json", {"status": "failed", "error": str(exc), "scores": table, "geometric": geometric})
        print(f"calibration failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    write_json(out / "calibration.json", {"signature": sig.as_dict(), "scores": table, "geometric": geometric, "resolution": cfg.resolutions[0]})
    print(json.dumps(sig.as_dict(), sort_keys=True))
    return EXIT_OK


def cmd_verify(args, cfg):
    suites = [args.suite] if args.suite else list(cfg.suites)
    report = verify(suites, cfg)
    out = Path(cfg.out)
    write_json(out / "report.json", report)
    for c in report["checks"]:
        slope = f" slope={c['slope']}" if "slope" in c else ""
        print(f"{'PASS' if c['passed'] else 'FAIL'} {c['name']} value={c['value']}{slope}")
    print(f"overall: {report['status']}")
    return EXIT_OK if report["status"] == "pass" else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spin-geodesy", description="Pauli spinor geometry: evolution, triads, spin lines, tetrads.", epilog=CSV_HELP)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, resolution=True):
        sp.add_argument("--config", metavar="PATH", help="INI-style run configuration")
        sp.add_argument("--out", metavar="DIR", help="output directory (default: out)")
        if resolution:
            sp.add_argument("--resolution", metavar="N[,N,...]", help="grid points per axis")
        return sp

    sp = common(sub.add_parser("evolve", help="evolve a scenario and write spinor snapshots"))
    sp.add_argument("--scenario", help="scenario name (overrides the config)")
    sp = common(sub.add_parser("observables", help="density, velocity, spin and Euler fields of a snapshot"))
    sp.add_argument("--input", metavar="SNAPSHOT", help="spinor snapshot (default: configured scenario)")
    sp.add_argument("--scenario")
    sp = common(sub.add_parser("triad", help="triad, torsion and frame statistics"))
    sp.add_argument("--input", metavar="SNAPSHOT")
    sp.add_argument("--scenario")
    sp = common(sub.add_parser("streamlines", help="trace spin lines and export CSV", epilog=CSV_HELP))
    sp.add_argument("--input", metavar="SNAPSHOT")
    sp.add_argument("--scenario")
    sp.add_argument("--seed-points", metavar='"x,y,z;..."', help="seed points separated by ';'")
    sp.add_argument("--max-len", type=float, default=30.0, help="arc length per line")
    sp = common(sub.add_parser("tetrad4d", help="teleparallel identities of a catalog tetrad", epilog=CSV_HELP))
    sp.add_argument("--tetrad", choices=tp.CATALOG)
    sp.add_argument("--points", type=int, default=16, help="samples per axis of the 4D patch")
    sp.add_argument("--geodesic", action="store_true", help="also write geodesic.csv")
    sp.add_argument("--geodesic-steps", type=int, default=1000)
    sp.add_argument("--geodesic-ds", type=float, default=0.01)
    sp = common(sub.add_parser("calibrate", help="fix the velocity sign/role conventions"))
    sp.add_argument("--inject-fault", choices=("sign", "scale"), help=argparse.SUPPRESS)
    sp = common(sub.add_parser("verify", help="run verification suites and write report.json"))
    sp.add_argument("--suite", choices=("all",) + SUITES)
    sp.add_argument("--tolerance-scale", type=float, help="multiply every value tolerance")
    sp.add_argument("--inject-fault", choices=("sign", "scale"), help="test mode: corrupt the calibration inputs")
    return p


COMMANDS = {
    "evolve": cmd_evolve,
    "observables": cmd_observables,
    "triad": cmd_triad,
    "streamlines": cmd_streamlines,
    "tetrad4d": cmd_tetrad4d,
    "calibrate": cmd_calibrate,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args)
        return COMMANDS[args.command](args, cfg)
    except (ConfigError, ValueError, NotImplementedError, pauli.InstabilityError, sl.ZeroSpinError, tp.GeodesicError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
