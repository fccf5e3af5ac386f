import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as hst

from spin_geodesy import studies
from spin_geodesy.convergence import EXACT, convergence_order
from spin_geodesy.teleparallel import (
    CATALOG,
    CONVERGING,
    ETA,
    Config4D,
    GeodesicError,
    catalog_entry,
    compose_frame,
    connection_suite,
    curvature_suite,
    geodesic_integrate,
    identity_norms,
    lorentz_boost,
    metric_from_tetrad,
    pointwise_connection,
    refinement_study,
    rotating_frame,
    rotating_frame_initial_velocity,
    rotating_frame_worldline,
    rotation_from_euler,
    sample_tetrad,
)

CENTER = (0.0, 1.0, 0.5, 0.0)


def test_boost_example():
    L = lorentz_boost((0.6, 0, 0))
    expected = np.eye(4)
    expected[0, 0] = expected[1, 1] = 1.25
    expected[0, 1] = expected[1, 0] = -0.75
    np.testing.assert_allclose(L, expected, atol=1e-14)
    with pytest.raises(ValueError):
        lorentz_boost((1.0, 0, 0))
    np.testing.assert_array_equal(lorentz_boost((0, 0, 0)), np.eye(4))


def test_quarter_turn_is_clockwise():
    R = rotation_from_euler(0.0, np.pi / 2, 0.0)
    np.testing.assert_allclose(R[1:, 1:] @ [1, 0, 0], [0, -1, 0], atol=1e-15)
    with pytest.raises(ValueError):
        rotation_from_euler(np.nan, 0, 0)


velocity = hst.tuples(*[hst.floats(-0.55, 0.55)] * 3)
angle = hst.floats(-2 * np.pi, 2 * np.pi)


@given(v=velocity, c=hst.floats(0.5, 3.0))
def test_boost_preserves_minkowski_metric(v, c):
    v = np.asarray(v) * c
    L = lorentz_boost(v, c)
    np.testing.assert_allclose(L.T @ ETA @ L, ETA, atol=1e-9)
    np.testing.assert_allclose(L, L.T, atol=1e-12)
    assert np.linalg.det(L) == pytest.approx(1.0)
    np.testing.assert_allclose(lorentz_boost(-v, c) @ L, np.eye(4), atol=1e-9)


@given(t=angle, p=angle, x=angle)
def test_rotation_is_orthogonal(t, p, x):
    R = rotation_from_euler(t, p, x)
    np.testing.assert_allclose(R.T @ R, np.eye(4), atol=1e-12)
    assert np.linalg.det(R) == pytest.approx(1.0)
    np.testing.assert_allclose(R.T @ ETA @ R, ETA, atol=1e-12)


def test_group_draws_study():
    out = studies.group_draws(200)
    assert out["boost"] < 1e-10 and out["rotation"] < 1e-12


@given(v=velocity, t=angle, p=angle, x=angle)
def test_composed_frame_reproduces_minkowski_metric(v, t, p, x):
    E = compose_frame(rotation_from_euler(t, p, x), lorentz_boost(v))
    np.testing.assert_allclose(E.T @ ETA @ E, ETA, atol=1e-10)


def test_compose_frame_with_reference():
    ref = np.diag([1.0, 2.0, 2.0, 2.0])
    E = compose_frame(np.eye(4), np.eye(4), ref)
    np.testing.assert_allclose(E, np.linalg.inv(ref))


@pytest.mark.parametrize("name", ["identity", "boost", "rotation"])
def test_constant_tetrads_have_no_torsion_or_curvature(name):
    tf = sample_tetrad(catalog_entry(name), CENTER, 0.1, 7)
    conn = connection_suite(tf)
    np.testing.assert_allclose(conn.g, np.broadcast_to(ETA.reshape(4, 4, 1, 1, 1, 1), conn.g.shape), atol=1e-12)
    norms = identity_norms(conn, curvature_suite(conn))
    for key in ("torsion_magnitude", "riemann_magnitude", "weitzenboeck_flatness", "trace_identity"):
        assert norms[key] < 1e-12


def _symbolic_rotating(omega, lam):
    X = sp.symbols("x0 x1 x2 x3", real=True)
    t, x, y = X[0], X[1], X[2]
    a = (omega - lam) * t
    R = sp.Matrix([[sp.cos(a), -sp.sin(a), 0], [sp.sin(a), sp.cos(a), 0], [0, 0, 1]])
    B = sp.Matrix([[-omega * y, 1, 0, 0], [omega * x, 0, 1, 0], [0, 0, 0, 1]])
    E = sp.zeros(4, 4)
    E[0, 0] = 1
    E[1:, :] = R * B
    eta = sp.diag(-1, 1, 1, 1)
    g = E.T * eta * E
    ginv = g.inv(method="LU")
    Einv = E.inv()
    Delta = [[[sum(Einv[m, a_] * sp.diff(E[a_, b], X[c]) for a_ in range(4)) for c in range(4)] for b in range(4)] for m in range(4)]
    Gam = [
        [[sum(ginv[m, n] * (sp.diff(g[b, n], X[c]) + sp.diff(g[c, n], X[b]) - sp.diff(g[b, c], X[n])) for n in range(4)) / 2 for c in range(4)] for b in range(4)]
        for m in range(4)
    ]
    T = [[[Delta[m][b][c] - Gam[m][b][c] for c in range(4)] for b in range(4)] for m in range(4)]
    return X, T


@pytest.mark.parametrize("lam", [0.0, 0.25])
def test_rotating_frame_torsion_against_symbolic(lam):
    omega = 0.5
    X, T_sym = _symbolic_rotating(sp.Rational(1, 2), sp.nsimplify(lam))
    T_ref = np.array(sp.lambdify(X, T_sym, "numpy")(*CENTER), dtype=float)
    fn = rotating_frame(omega, lam)
    _, _, D, G = pointwise_connection(fn, CENTER)
    np.testing.assert_allclose(D - G, T_ref, atol=1e-12)
    tf = sample_tetrad(fn, CENTER, 0.05, 9)
    conn = connection_suite(tf)
    np.testing.assert_allclose(conn.T[..., 3, 3, 3, 3], T_ref, atol=1e-3)
    np.testing.assert_allclose(conn.T_anholonomity[..., 3, 3, 3, 3], T_ref, atol=1e-3)
    if lam == 0.0:
        assert np.max(np.abs(T_ref)) < 1e-15
    else:
        # the legs turn at -lam relative to the lab: T^1_{20} - T^1_{02} carries lam
        assert np.max(np.abs(T_ref)) == pytest.approx(lam, rel=1e-12)


def test_rotating_frame_identities_are_exact():
    rows = refinement_study(catalog_entry("rotating_frame"), CENTER, spacing=0.1, levels=1)
    for key in CONVERGING:
        assert rows[0][1][key] < 1e-10


@pytest.mark.parametrize("name", ["sinusoidal", "perturbed_rotating_frame"])
def test_identity_residuals_converge_at_second_order(name):
    rows = refinement_study(catalog_entry(name), CENTER, spacing=0.2, levels=3)
    for key in CONVERGING:
        order = convergence_order([(h, n[key]) for h, n in rows], floor=1e-12)
        # some identities hold algebraically on the grid and sit at round-off
        assert order == EXACT or 1.8 < order < 2.2, (key, order)
    for key in ("weitzenboeck_flatness", "riemann_from_torsion", "torsion_routes"):
        assert 1.8 < convergence_order([(h, n[key]) for h, n in rows]) < 2.2
    for _, n in rows:
        assert n["trace_identity"] < 1e-12
        assert n["christoffel_symmetry"] < 1e-12
        assert n["torsion_magnitude"] > 1e-3


def test_printed_scalar_differs_on_a_torsional_frame():
    rows = refinement_study(catalog_entry("perturbed_rotating_frame"), CENTER, spacing=0.1, levels=2)
    # the mismatch is a property of the formula, not a discretisation error
    a, b = rows[0][1]["scalar_printed_mismatch"], rows[1][1]["scalar_printed_mismatch"]
    assert a > 1e-4 and b == pytest.approx(a, rel=0.1)


def test_metric_from_tetrad_and_config():
    E = rotation_from_euler(0.3, 0.2, 0.1) @ lorentz_boost((0.2, 0.1, 0))
    np.testing.assert_allclose(metric_from_tetrad(E), E.T @ ETA @ E, atol=1e-14)
    with pytest.raises(ValueError):
        Config4D(nu=0)
    with pytest.raises(ValueError):
        Config4D(c=-1)


def test_catalog_and_patch_validation():
    for name in CATALOG:
        assert sample_tetrad(catalog_entry(name), CENTER, 0.1, 5).inverse_defect() < 1e-12
    with pytest.raises(ValueError):
        catalog_entry("wormhole")
    with pytest.raises(ValueError):
        sample_tetrad(catalog_entry("identity"), CENTER, 0.1, 4)
    with pytest.raises(ValueError):
        sample_tetrad(lambda X: np.zeros((4, 4) + np.shape(X[0])), CENTER, 0.1, 5)


def test_constant_tetrad_geodesic_is_straight():
    fn = catalog_entry("boost")
    E, _, _, _ = pointwise_connection(fn, CENTER)
    g = E.T @ ETA @ E
    u = np.array([1.0, 0.2, 0.0, 0.0])
    u = u / np.sqrt(-u @ g @ u)
    res = geodesic_integrate(fn, CENTER, u, steps=50, ds=0.1)
    np.testing.assert_allclose(res.x, np.asarray(CENTER) + np.outer(res.s, u), atol=1e-12)
    assert res.normalization_drift < 1e-13
    np.testing.assert_allclose(res.frames[-1], res.frames[0], atol=1e-12)


@pytest.mark.parametrize("lam", [0.0, 0.25])
def test_rotating_frame_geodesic_matches_closed_form(lam):
    out = studies.rotating_geodesic(0.5, lam, steps=400)
    assert out["rel_error"] < 1e-8
    assert out["normalization_drift"] < 1e-10


def test_worldline_helpers_agree_at_start():
    x0, V = np.array([0.4, 0.2, 0.0]), np.array([0.1, 0.05, 0.02])
    w = rotating_frame_worldline(0.5, 0.25, x0, V, np.array([0.0, 1e-6]))
    u = rotating_frame_initial_velocity(0.5, x0, V)
    gamma = u[0]
    np.testing.assert_allclose((w[1] - w[0]) / 1e-6, u / gamma, rtol=1e-5, atol=1e-7)


def test_geodesic_errors():
    fn = catalog_entry("identity")
    with pytest.raises(ValueError):
        geodesic_integrate(fn, CENTER, [1.0, 0.5, 0, 0])
    with pytest.raises(GeodesicError):
        lo = np.asarray(CENTER) - 0.5
        geodesic_integrate(fn, CENTER, [1.0, 0, 0, 0], steps=100, ds=0.1, bounds=(lo, lo + 1.0))
