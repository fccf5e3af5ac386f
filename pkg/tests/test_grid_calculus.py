import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as hst

from conftest import band_limited
from spin_geodesy import calculus
from spin_geodesy.convergence import EXACT, convergence_order, pairwise_orders
from spin_geodesy.grid import (
    GridSpec,
    ScalarField,
    SpinorField,
    VectorField,
    read_array_snapshot,
    read_snapshot,
    write_array_snapshot,
    write_snapshot,
)


def test_grid_geometry():
    g = GridSpec.cube(2, 16.0, 32)
    assert g.shape == (32, 32)
    assert g.spacing == (0.5, 0.5)
    assert g.origin == (-8.0, -8.0)
    np.testing.assert_allclose(g.axis(0)[[0, -1]], [-8.0, 7.5])
    assert g.cell_volume == 0.25
    assert g.refined().points == (64, 64)


@pytest.mark.parametrize(
    "kw",
    [dict(extents=(1.0,), points=(4,)), dict(extents=(1.0, 1.0), points=(8,)), dict(extents=(-1.0,), points=(8,)), dict(extents=(1.0,) * 4, points=(8,) * 4)],
)
def test_grid_rejects_bad_specs(kw):
    with pytest.raises(ValueError):
        GridSpec(**kw)


def test_field_shape_checks():
    g = GridSpec.cube(1, 1.0, 8)
    with pytest.raises(ValueError):
        VectorField(g, np.zeros((2, 8)))
    with pytest.raises(ValueError):
        SpinorField(g, np.full((2, 8), np.nan))
    # vector fields may carry NaN masks
    VectorField(g, np.full((3, 8), np.nan))


def test_grad_of_constant_is_zero():
    g = GridSpec.cube(3, 4.0, 8)
    out = calculus.differential(ScalarField(g, np.full(g.shape, 3.0)), "grad")
    np.testing.assert_array_equal(out.values, 0.0)


def test_grad_sin_second_order():
    errs = []
    for n in (32, 64, 128, 256):
        g = GridSpec.cube(1, 16.0, n)
        k = 2 * np.pi / 16.0
        x = g.coords()[0]
        d = calculus.differential(ScalarField(g, np.sin(k * x)), "grad").values[0]
        errs.append((g.spacing[0], np.max(np.abs(d - k * np.cos(k * x)))))
    assert 1.9 <= convergence_order(errs) <= 2.1


def test_spectral_derivative_is_exact_on_band_limited_data():
    g = GridSpec.cube(1, 16.0, 32)
    k = 2 * np.pi * 3 / 16.0
    x = g.coords()[0]
    d = calculus.partial(np.sin(k * x), 0, g, "spectral")
    np.testing.assert_allclose(d, k * np.cos(k * x), atol=1e-12)


def test_div_curl_vanishes(rng):
    g = GridSpec.cube(3, 8.0, 16)
    V = band_limited(g, rng, lead=(3,))
    dc = calculus.div(calculus.curl(V, g), g)
    # central differences commute, so the identity is exact on the grid
    assert np.max(np.abs(dc)) < 1e-12


def test_discrete_divergence_theorem(rng):
    g = GridSpec.cube(2, 8.0, 16)
    V = rng.standard_normal((3,) + g.shape)
    assert abs(np.sum(calculus.div(V, g)) * g.cell_volume) < 1e-10


@given(a=hst.floats(-3, 3), b=hst.floats(-3, 3), seed=hst.integers(0, 1000))
def test_differential_linearity(a, b, seed):
    rng = np.random.default_rng(seed)
    g = GridSpec.cube(2, 8.0, 8)
    f, h = rng.standard_normal((2,) + g.shape)
    for kind in ("grad", "laplacian"):
        lhs = calculus.differential(ScalarField(g, a * f + b * h), kind).values
        rhs = a * calculus.differential(ScalarField(g, f), kind).values + b * calculus.differential(ScalarField(g, h), kind).values
        np.testing.assert_allclose(lhs, rhs, atol=1e-10 * (1 + abs(a) + abs(b)))


def test_differential_type_errors():
    g = GridSpec.cube(1, 1.0, 8)
    with pytest.raises(TypeError):
        calculus.differential(VectorField.zeros(g), "grad")
    with pytest.raises(TypeError):
        calculus.differential(ScalarField(g, np.zeros(8)), "div")
    with pytest.raises(ValueError):
        calculus.differential(ScalarField(g, np.zeros(8)), "hessian")


@pytest.mark.parametrize("kind", ["linear", "cubic", "spline"])
def test_interpolate_at_nodes(kind, rng):
    g = GridSpec.cube(2, 8.0, 16)
    f = ScalarField(g, band_limited(g, rng))
    X = g.coords()
    for idx in [(0, 0), (3, 7), (15, 2)]:
        p = (X[0][idx], X[1][idx])
        assert calculus.interpolate(f, p, kind) == pytest.approx(f.values[idx], abs=1e-12)


@given(x=hst.floats(-3.9, 3.9), y=hst.floats(-3.9, 3.9))
def test_linear_interpolation_exact_on_linear_data(x, y):
    # a linear function is periodic-compatible away from the wrap cell
    g = GridSpec.cube(2, 10.0, 20)
    X = g.coords()
    f = ScalarField(g, 0.7 * X[0] - 0.2 * X[1])
    assert calculus.interpolate(f, (x, y), "linear") == pytest.approx(0.7 * x - 0.2 * y, abs=1e-12)


@given(x=hst.floats(-5, 5), y=hst.floats(-5, 5), seed=hst.integers(0, 100))
def test_linear_interpolation_bounded_by_local_extrema(x, y, seed):
    rng = np.random.default_rng(seed)
    g = GridSpec.cube(2, 10.0, 10)
    f = ScalarField(g, rng.standard_normal(g.shape))
    v = calculus.interpolate(f, (x, y), "linear")
    i = int(np.floor((x + 5) / 1.0)) % 10
    j = int(np.floor((y + 5) / 1.0)) % 10
    corners = [f.values[(i + a) % 10, (j + b) % 10] for a in (0, 1) for b in (0, 1)]
    assert min(corners) - 1e-12 <= v <= max(corners) + 1e-12


@pytest.mark.parametrize("kind,order", [("linear", 2), ("spline", 4)])
def test_interpolation_midpoint_convergence(kind, order):
    errs = []
    for n in (16, 32, 64):
        g = GridSpec.cube(1, 16.0, n)
        k = 2 * np.pi / 16.0
        f = ScalarField(g, np.sin(k * g.coords()[0]))
        mids = g.axis(0) + g.spacing[0] / 2
        vals = calculus.interpolate_many(f.values, g, mids[:, None], kind)
        errs.append((g.spacing[0], np.max(np.abs(vals - np.sin(k * mids)))))
    assert convergence_order(errs) == pytest.approx(order, abs=0.15)


def test_interpolate_rejects_non_finite_point():
    g = GridSpec.cube(1, 1.0, 8)
    with pytest.raises(ValueError):
        calculus.interpolate(ScalarField(g, np.zeros(8)), (np.nan,))


def test_convergence_order_examples():
    assert convergence_order([(0.1, 1e-2), (0.05, 2.5e-3), (0.025, 6.25e-4)]) == pytest.approx(2.0)
    assert convergence_order([(0.1, 0.0), (0.05, 0.0), (0.025, 0.0)]) == EXACT
    assert convergence_order([(0.1, 1e-15), (0.05, 1e-16), (0.025, 3e-16)], floor=1e-12) == EXACT
    np.testing.assert_allclose(pairwise_orders([(0.1, 4.0), (0.05, 1.0), (0.025, 0.25)]), [2.0, 2.0])
    with pytest.raises(ValueError):
        convergence_order([(0.1, 1.0), (0.05, 0.5)])
    with pytest.raises(ValueError):
        convergence_order([(0.1, 1.0), (0.07, 0.5), (0.01, 0.1)])


@pytest.mark.parametrize("cls,lead,dtype", [(ScalarField, (), float), (VectorField, (3,), float), (SpinorField, (2,), complex)])
def test_snapshot_round_trip(tmp_path, rng, cls, lead, dtype):
    g = GridSpec((4.0, 2.0), (8, 10))
    vals = rng.standard_normal(lead + g.shape)
    if dtype is complex:
        vals = vals + 1j * rng.standard_normal(lead + g.shape)
    write_snapshot(tmp_path / "f.bin", cls(g, vals))
    back = read_snapshot(tmp_path / "f.bin")
    assert type(back) is cls and back.grid == g
    np.testing.assert_array_equal(back.values, vals)
    header = json.loads((tmp_path / "f.bin.json").read_text())
    assert header["dims"] == 2 and header["extents"] == [4.0, 2.0] and header["points"] == [8, 10]
    assert header["component_count"] == (lead[0] if lead else 1)
    assert header["rank"] == len(lead)
    # raw little-endian payload
    raw = np.frombuffer((tmp_path / "f.bin").read_bytes(), dtype=header["dtype"])
    assert header["dtype"].startswith("<") and raw.size == np.prod(lead + g.shape)


def test_array_snapshot_round_trip(tmp_path, rng):
    g = GridSpec.cube(1, 1.0, 8)
    T = rng.standard_normal((3, 3, 3, 8))
    write_array_snapshot(tmp_path / "t.bin", g, T)
    g2, back = read_array_snapshot(tmp_path / "t.bin")
    assert g2 == g
    np.testing.assert_array_equal(back, T)
    with pytest.raises(ValueError):
        read_snapshot(tmp_path / "t.bin")
