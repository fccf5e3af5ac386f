"""Compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from spin_geodesy import _kernels_py, calculus
from spin_geodesy.scenarios import instantiate
from spin_geodesy.triad import triad_from_spinor

try:
    from spin_geodesy import _kernels as compiled
except ImportError:
    compiled = None


def workloads():
    sc = instantiate("spin_vortex", 128)
    s = triad_from_spinor(sc.psi).e3
    g = sc.grid
    origin, spacing = calculus.kernel_geometry(g)
    coeffs = calculus.spline_coefficients(np.nan_to_num(s.values), g)
    valid = np.ones((1,) + g.shape)
    data = calculus._as3d(np.concatenate([coeffs, valid]), g)
    pts = np.ascontiguousarray(np.random.default_rng(0).uniform(-6, 6, (20000, 3)))
    pts[:, 2] = 0.0
    seed = np.array([4.0, 0.0, 0.0])
    ds = 16.0 / 128 / 4
    return {
        "interp_many linear (20k points)": lambda k: k.interp_many(data, origin, spacing, pts, 2),
        "interp_many spline (20k points)": lambda k: k.interp_many(data, origin, spacing, pts, 4),
        "trace spline (2000 RK4 steps)": lambda k: k.trace(data, origin, spacing, seed, ds, 2000, 4, 1e-12),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = {"python": _kernels_py}
    if compiled is not None:
        backends["compiled"] = compiled
    print(f"{'workload':34s}" + "".join(f"{b:>14s}" for b in backends) + ("   speedup" if compiled else ""))
    for name, fn in workloads().items():
        times = {}
        for b, mod in backends.items():
            number = 1 if b == "python" else 10
            times[b] = min(timeit.repeat(lambda: fn(mod), number=number, repeat=args.repeat)) / number
        row = f"{name:34s}" + "".join(f"{times[b] * 1e3:11.2f} ms" for b in backends)
        if compiled is not None:
            row += f"   {times['python'] / times['compiled']:7.1f}x"
        print(row)
    if compiled is None:
        print("compiled kernels not built; only the fallback was timed")


if __name__ == "__main__":
    main()
