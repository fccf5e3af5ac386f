import csv
import io

import numpy as np
import pytest

from spin_geodesy import studies
from spin_geodesy.convergence import EXACT, convergence_order
from spin_geodesy.grid import GridSpec, VectorField
from spin_geodesy.scenarios import instantiate
from spin_geodesy.streamlines import (
    CSV_COLUMNS,
    DEGENERATE,
    TRUNCATED,
    ZeroSpinError,
    first_return,
    frenet_apparatus,
    streamline_csv,
    trace_spin_streamline,
    write_streamline_csv,
)
from spin_geodesy.triad import triad_from_spinor


def test_straight_line_is_flagged_degenerate():
    g = GridSpec.cube(2, 8.0, 16)
    line = frenet_apparatus(trace_spin_streamline(VectorField.uniform(g, (0.5, 0, 0)), (0, 0), max_len=2.0))
    np.testing.assert_allclose(line.points[:, 0], line.s, atol=1e-12)
    assert np.all(line.flags & DEGENERATE)
    np.testing.assert_array_equal(line.tau, 0.0)
    np.testing.assert_allclose(line.kappa, 0.0, atol=1e-12)
    # the carried normal stays a unit vector perpendicular to the path
    np.testing.assert_allclose(np.linalg.norm(line.normal, axis=1), 1.0)
    np.testing.assert_allclose(np.einsum("ij,ij->i", line.normal, line.tangent), 0.0, atol=1e-12)


@pytest.mark.parametrize("kind", ["linear", "spline"])
def test_circle_closes_with_right_circumference(kind):
    sc = instantiate("spin_vortex", 128)
    tri = triad_from_spinor(sc.psi)
    r = sc.references["radius"]
    line = trace_spin_streamline(tri.e3, sc.references["seed"], max_len=1.1 * 2 * np.pi * r, kind=kind)
    L = first_return(line)
    tol = 1e-5 if kind == "spline" else 5e-3
    assert L == pytest.approx(2 * np.pi * r, rel=tol)


def test_circle_curvature_and_torsion():
    out = studies.streamline_errors("spin_vortex", 128)
    assert out["kappa_rel"] < 1e-3
    assert out["tau_abs"] < 1e-6
    assert out["antisymmetry"] < 1e-10


def test_helix_curvature_and_torsion():
    out = studies.streamline_errors("helix_texture", 128)
    assert out["kappa_rel"] < 1e-3
    sc = instantiate("helix_texture", 16)
    assert out["tau_abs"] < 1e-3 * sc.references["tau"]


def test_torsion_projection_converges():
    rows = [studies.streamline_errors("helix_texture", n) for n in (32, 64, 128)]
    for key in ("kappa_T", "tau_T"):
        order = convergence_order([(16.0 / n, r[key]) for n, r in zip((32, 64, 128), rows)])
        assert order == EXACT or 1.5 < order < 2.3


def test_csv_columns_and_rows():
    sc = instantiate("spin_vortex", 32)
    line = frenet_apparatus(trace_spin_streamline(triad_from_spinor(sc.psi).e3, sc.references["seed"], max_len=3.0))
    rows = list(csv.reader(io.StringIO(streamline_csv(line))))
    assert tuple(rows[0]) == CSV_COLUMNS == ("s", "x", "y", "z", "kappa", "tau", "flags")
    assert len(rows) == len(line) + 1
    first = [float(v) for v in rows[1]]
    assert first[:4] == pytest.approx([0.0, 4.0, 0.0, 0.0])


def test_csv_file_write(tmp_path):
    sc = instantiate("spin_vortex", 32)
    line = frenet_apparatus(trace_spin_streamline(triad_from_spinor(sc.psi).e3, sc.references["seed"], max_len=1.0))
    write_streamline_csv(tmp_path / "a.csv", line)
    assert (tmp_path / "a.csv").read_text() == streamline_csv(line)


def test_zero_spin_raises_with_location():
    g = GridSpec.cube(1, 8.0, 16)
    with pytest.raises(ZeroSpinError) as info:
        trace_spin_streamline(VectorField.zeros(g), (1.0,), max_len=1.0)
    assert len(info.value.location) == 3


def test_masked_region_truncates():
    g = GridSpec.cube(1, 8.0, 32)
    x = g.coords()[0]
    vals = np.zeros((3, 32))
    vals[0] = 0.5
    vals[:, x > 2.0] = np.nan
    line = trace_spin_streamline(VectorField(g, vals), (0.0,), max_len=5.0, kind="linear")
    assert line.truncated and line.flags[-1] & TRUNCATED
    assert line.points[-1, 0] <= 2.0 + 1e-12
    assert not np.any(line.flags[:-1] & TRUNCATED)


def test_bad_arguments():
    g = GridSpec.cube(1, 8.0, 16)
    f = VectorField.uniform(g, (1, 0, 0))
    with pytest.raises(ValueError):
        trace_spin_streamline(f, (np.nan,))
    with pytest.raises(ValueError):
        trace_spin_streamline(f, (0.0,), ds=-1.0)
    with pytest.raises(ValueError):
        frenet_apparatus(trace_spin_streamline(f, (0.0,), max_len=0.01))
