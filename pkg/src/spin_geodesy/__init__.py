"""Geometric pilot-wave engine for Pauli spinor fields."""

import os

# SPIN_GEODESY_THREADS caps the BLAS/OpenMP pools; it must be applied before numpy loads
_threads = os.environ.get("SPIN_GEODESY_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

from .grid import GridSpec, PhysicalConstants, ScalarField, SpinorField, VectorField  # noqa: E402

__version__ = "0.1.0"

__all__ = ["GridSpec", "PhysicalConstants", "ScalarField", "SpinorField", "VectorField", "__version__"]
