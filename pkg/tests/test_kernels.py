import numpy as np
import pytest

from spin_geodesy import _kernels_py, kernels

compiled = pytest.importorskip("spin_geodesy._kernels")


@pytest.fixture
def field(rng):
    data = np.ascontiguousarray(rng.standard_normal((4, 12, 10, 8)))
    data[3] = 1.0  # validity channel
    return data, np.array([-3.0, -2.5, -2.0]), np.array([0.5, 0.5, 0.5])


@pytest.mark.parametrize("order", [2, 4])
def test_interp_backends_agree(field, rng, order):
    data, origin, spacing = field
    pts = np.ascontiguousarray(rng.uniform(-4, 4, (50, 3)))
    a = compiled.interp_many(data, origin, spacing, pts, order)
    b = _kernels_py.interp_many(data, origin, spacing, pts, order)
    np.testing.assert_allclose(a, b, atol=1e-12)
    np.testing.assert_allclose(compiled.interp(data, origin, spacing, pts[0], order), b[0], atol=1e-12)


def test_trace_backends_agree(field):
    data, origin, spacing = field
    data = data.copy()
    data[0] += 3.0  # keep the direction field away from zero
    a = compiled.trace(data, origin, spacing, np.zeros(3), 0.05, 200, 4, 1e-12)
    b = _kernels_py.trace(data, origin, spacing, np.zeros(3), 0.05, 200, 4, 1e-12)
    assert a[2:] == b[2:]
    np.testing.assert_allclose(a[0][: a[2]], b[0][: b[2]], atol=1e-10)
    np.testing.assert_allclose(a[1][: a[2]], b[1][: b[2]], atol=1e-10)


def test_backend_selected():
    assert kernels.BACKEND in ("compiled", "python")
