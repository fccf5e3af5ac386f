"""Kernel backend selection.

The compiled extension is used when it was built; otherwise the pure-Python
reference implementation is imported. Set ``SPIN_GEODESY_KERNELS=python`` to
force the fallback.
"""

import os

from ._kernels_py import MASKED, MAX_STEPS, OK, ZERO_SPIN  # noqa: F401

BACKEND = "python"
if os.environ.get("SPIN_GEODESY_KERNELS", "").lower() != "python":
    try:
        from ._kernels import interp, interp_many, trace  # noqa: F401

        BACKEND = "compiled"
    except ImportError:
        pass
if BACKEND == "python":
    from ._kernels_py import interp, interp_many, trace  # noqa: F401
