"""Fix the sign and role conventions of the Euler- and Frenet-form velocities.

The bilinear velocity is taken as ground truth. Every one of the eight
(sigma_euler, sigma_frenet, role_swap) combinations is scored by its worst
relative discrepancy over a family of analytic states; the geometric
(triad) form has no free sign and is checked as printed.
"""

from __future__ import annotations

import itertools

import numpy as np

from . import triad as tr
from .observables import ConventionSignature, bilinear_velocity, euler_decompose, velocity_euler

DEFAULT_TOL = 5e-2

FAULTS = (None, "scale", "sign")


class CalibrationError(RuntimeError):
    """No convention reproduces the bilinear velocity: an implementation bug, not a tolerance issue."""


def _rel(candidate: np.ndarray, ref: np.ndarray) -> float:
    ok = np.all(np.isfinite(candidate), axis=0) & np.all(np.isfinite(ref), axis=0)
    if not ok.any():
        return 0.0
    scale = max(float(np.max(np.abs(ref[:, ok]))), 1e-12)
    return float(np.max(np.abs(candidate[:, ok] - ref[:, ok]))) / scale


def _state_forms(sc, fault):
    psi, A, k = sc.psi, sc.ext.A, sc.constants
    ref = bilinear_velocity(psi, A, k).values
    if fault == "scale":
        ref = 2 * ref
    triad = tr.triad_from_spinor(psi)
    geo = tr.guidance_velocity_geometric(triad, A, k.gyro).values
    if fault == "sign":
        geo = -geo
    frame = tr.spin_line_frame(triad)
    frenet_raw = tr.velocity_frenet(frame, tr.frame_divergences(frame), +1).values
    e = euler_decompose(psi)
    euler = {
        (se, sw): velocity_euler(e, A, ConventionSignature(se, 1, sw), k).values
        for se in (1, -1)
        for sw in (False, True)
    }
    # A enters the Frenet form with the fixed sign of the gauge term
    if A is not None:
        gauge = k.gyro * A.values
        frenet = {sf: sf * (frenet_raw + gauge) - gauge for sf in (1, -1)}
    else:
        frenet = {sf: sf * frenet_raw for sf in (1, -1)}
    return ref, geo, euler, frenet


def convention_scores(states, fault=None) -> tuple[dict, dict]:
    """Worst relative discrepancy per combination, and of the geometric form per state."""
    if fault not in FAULTS:
        raise ValueError(f"unknown fault {fault!r}")
    scores = {c: 0.0 for c in itertools.product((1, -1), (1, -1), (False, True))}
    geometric = {}
    for name, sc in states:
        ref, geo, euler, frenet = _state_forms(sc, fault)
        geometric[name] = _rel(geo, ref)
        for se, sf, sw in scores:
            d = max(_rel(euler[(se, sw)], ref), _rel(frenet[sf], ref))
            scores[(se, sf, sw)] = max(scores[(se, sf, sw)], d)
    return scores, geometric


def calibrate_conventions(states, tol: float = DEFAULT_TOL, fault=None) -> ConventionSignature:
    """Exhaustive search over the eight sign/role combinations.

    ``states`` is a sequence of (name, Scenario). ``fault`` injects a
    deliberate error for negative tests: ``"scale"`` doubles the reference
    velocity, ``"sign"`` flips the sign of the geometric form.
    """
    states = list(states)
    if not states:
        raise ValueError("calibration needs at least one reference state")
    scores, geometric = convention_scores(states, fault)
    bad_geo = {n: d for n, d in geometric.items() if d > tol}
    if bad_geo:
        worst = max(bad_geo, key=bad_geo.get)
        raise CalibrationError(f"geometric guidance disagrees with the bilinear velocity on {worst} (rel. {bad_geo[worst]:.3g})")
    ranked = sorted(scores.items(), key=lambda kv: (kv[1], -kv[0][0], -kv[0][1], kv[0][2]))
    fits = [c for c, d in ranked if d <= tol]
    if not fits:
        (se, sf, sw), d = ranked[0]
        raise CalibrationError(
            f"no convention matches the bilinear velocity (best: sigma_euler={se}, sigma_frenet={sf}, "
            f"role_swap={sw}, rel. discrepancy {d:.3g} > {tol:g})"
        )
    (se, sf, sw), d = ranked[0]
    status = "unique" if len(fits) == 1 else "underdetermined"
    return ConventionSignature(se, sf, sw, status, float(d))
