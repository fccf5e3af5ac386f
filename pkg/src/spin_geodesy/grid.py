"""Uniform periodic grids and the field containers that live on them.

Fields are thin frozen dataclasses around numpy arrays:

* ``ScalarField.values`` has shape ``grid.shape``
* ``VectorField.values`` has shape ``(3, *grid.shape)`` (always three
  Cartesian components, even on 1D/2D grids)
* ``SpinorField.values`` has shape ``(2, *grid.shape)`` and is complex

Natural units hbar = m = 1 are used throughout.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

HBAR = 1.0
MASS = 1.0


@dataclass(frozen=True)
class GridSpec:
    extents: tuple[float, ...]
    points: tuple[int, ...]
    boundary: str = "periodic"

    def __post_init__(self):
        object.__setattr__(self, "extents", tuple(float(e) for e in self.extents))
        object.__setattr__(self, "points", tuple(int(n) for n in self.points))
        if not 1 <= len(self.points) <= 3:
            raise ValueError("grid must have 1 to 3 spatial dimensions")
        if len(self.extents) != len(self.points):
            raise ValueError("extents and points must have the same length")
        if any(n < 8 for n in self.points):
            raise ValueError(f"need at least 8 points per axis, got {self.points}")
        if any(not e > 0 for e in self.extents):
            raise ValueError(f"extents must be positive, got {self.extents}")
        if self.boundary != "periodic":
            raise ValueError("only periodic boundaries are supported")

    @classmethod
    def cube(cls, dims: int, extent: float, points: int) -> "GridSpec":
        return cls((extent,) * dims, (points,) * dims)

    @property
    def dims(self) -> int:
        return len(self.points)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.points

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(e / n for e, n in zip(self.extents, self.points))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def origin(self) -> tuple[float, ...]:
        # box is [-L/2, L/2) on every axis
        return tuple(-e / 2 for e in self.extents)

    def axis(self, i: int) -> np.ndarray:
        return self.origin[i] + self.spacing[i] * np.arange(self.points[i])

    def coords(self) -> tuple[np.ndarray, ...]:
        """Coordinate arrays broadcast to the full grid shape (``indexing='ij'``)."""
        return tuple(np.meshgrid(*(self.axis(i) for i in range(self.dims)), indexing="ij"))

    def coords3(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Like :meth:`coords`, padded with zeros for missing axes."""
        c = list(self.coords())
        while len(c) < 3:
            c.append(np.zeros(self.shape))
        return tuple(c)

    def refined(self, factor: int = 2) -> "GridSpec":
        return GridSpec(self.extents, tuple(n * factor for n in self.points))

    def with_points(self, n: int) -> "GridSpec":
        return GridSpec(self.extents, (n,) * self.dims)

    def wavenumbers(self) -> tuple[np.ndarray, ...]:
        ks = [2 * np.pi * np.fft.fftfreq(n, d=h) for n, h in zip(self.points, self.spacing)]
        return tuple(np.meshgrid(*ks, indexing="ij"))


@dataclass(frozen=True)
class PhysicalConstants:
    """Constants of the Pauli Hamiltonian. hbar and mass are fixed to 1."""

    charge: float = 0.0
    light_speed: float = 1.0
    hbar: float = field(default=HBAR, init=False)
    mass: float = field(default=MASS, init=False)

    def __post_init__(self):
        if not self.light_speed > 0:
            raise ValueError("light_speed must be positive")

    @property
    def mu_B(self) -> float:
        return self.charge * self.hbar / (2 * self.mass * self.light_speed)

    @property
    def gyro(self) -> float:
        """e/(mc): Larmor frequency per unit field."""
        return self.charge / (self.mass * self.light_speed)


def _check_shape(grid: GridSpec, values: np.ndarray, lead: tuple[int, ...]):
    expected = lead + grid.shape
    if values.shape != expected:
        raise ValueError(f"values shape {values.shape} does not match {expected}")


@dataclass(frozen=True)
class ScalarField:
    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        _check_shape(self.grid, self.values, ())


@dataclass(frozen=True)
class VectorField:
    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        _check_shape(self.grid, self.values, (3,))

    @classmethod
    def zeros(cls, grid: GridSpec) -> "VectorField":
        return cls(grid, np.zeros((3,) + grid.shape))

    @classmethod
    def uniform(cls, grid: GridSpec, vec) -> "VectorField":
        v = np.asarray(vec, dtype=float).reshape((3,) + (1,) * grid.dims)
        return cls(grid, np.broadcast_to(v, (3,) + grid.shape).copy())


@dataclass(frozen=True)
class SpinorField:
    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=complex))
        _check_shape(self.grid, self.values, (2,))
        if not np.all(np.isfinite(self.values)):
            raise ValueError("spinor field contains non-finite values")

    @classmethod
    def uniform(cls, grid: GridSpec, spinor) -> "SpinorField":
        s = np.asarray(spinor, dtype=complex).reshape((2,) + (1,) * grid.dims)
        return cls(grid, np.broadcast_to(s, (2,) + grid.shape).copy())


# --- snapshot files: raw little-endian array + JSON sidecar ----------------

_KINDS = {ScalarField: ("scalar", 0, 1), VectorField: ("vector", 1, 3), SpinorField: ("spinor", 1, 2)}
_BY_KIND = {v[0]: k for k, v in _KINDS.items()}


def _atomic_write(path: Path, data: bytes):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_snapshot(path, fld) -> None:
    """Write ``path`` (raw data) and ``path.json`` (header)."""
    path = Path(path)
    kind, rank, ncomp = _KINDS[type(fld)]
    dtype = "<c16" if kind == "spinor" else "<f8"
    header = {
        "dims": fld.grid.dims,
        "extents": list(fld.grid.extents),
        "points": list(fld.grid.points),
        "rank": rank,
        "component_count": ncomp,
        "kind": kind,
        "dtype": dtype,
    }
    _atomic_write(path, np.ascontiguousarray(fld.values, dtype=dtype).tobytes())
    _atomic_write(Path(str(path) + ".json"), (json.dumps(header, sort_keys=True, indent=2) + "\n").encode())


def write_array_snapshot(path, grid: GridSpec, values: np.ndarray) -> None:
    """Snapshot of an arbitrary real component array (e.g. a rank-3 torsion field)."""
    path = Path(path)
    values = np.asarray(values, dtype="<f8")
    lead = values.shape[: values.ndim - grid.dims]
    _check_shape(grid, values, lead)
    header = {
        "dims": grid.dims,
        "extents": list(grid.extents),
        "points": list(grid.points),
        "rank": len(lead),
        "component_count": int(np.prod(lead)) if lead else 1,
        "component_shape": list(lead),
        "kind": "tensor",
        "dtype": "<f8",
    }
    _atomic_write(path, np.ascontiguousarray(values).tobytes())
    _atomic_write(Path(str(path) + ".json"), (json.dumps(header, sort_keys=True, indent=2) + "\n").encode())


def read_array_snapshot(path) -> tuple[GridSpec, np.ndarray]:
    path = Path(path)
    header = json.loads(Path(str(path) + ".json").read_text())
    grid = GridSpec(tuple(header["extents"]), tuple(header["points"]))
    lead = tuple(header.get("component_shape", [header["component_count"]] if header["rank"] else []))
    data = np.frombuffer(path.read_bytes(), dtype=header["dtype"]).reshape(lead + grid.shape)
    return grid, data.copy()


def read_snapshot(path):
    path = Path(path)
    header = json.loads(Path(str(path) + ".json").read_text())
    grid = GridSpec(tuple(header["extents"]), tuple(header["points"]))
    if header["kind"] not in _BY_KIND:
        raise ValueError(f"{path} holds a {header['kind']} array; use read_array_snapshot")
    cls = _BY_KIND[header["kind"]]
    lead = () if header["kind"] == "scalar" else (header["component_count"],)
    data = np.frombuffer(path.read_bytes(), dtype=header["dtype"]).reshape(lead + grid.shape)
    return cls(grid, data.copy())
