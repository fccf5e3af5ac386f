"""Observed order of accuracy from residual norms at successive resolutions."""

from __future__ import annotations

import numpy as np

EXACT = "exact"


def convergence_order(samples, floor: float = 0.0, ratio_tol: float = 0.05):
    """Least-squares slope of log(norm) against log(dx).

    ``samples`` is a sequence of ``(dx, norm)`` pairs, each dx half the
    previous one. Returns :data:`EXACT` when every norm is at or below
    ``floor`` (residuals at round-off carry no slope).
    """
    samples = sorted(((float(h), float(r)) for h, r in samples), reverse=True)
    if len(samples) < 3:
        raise ValueError("convergence_order needs at least 3 resolutions")
    h = np.array([s[0] for s in samples])
    r = np.array([s[1] for s in samples])
    if np.any(h <= 0) or not np.all(np.isfinite(r)) or np.any(r < 0):
        raise ValueError("spacings must be positive and norms finite and non-negative")
    ratios = h[:-1] / h[1:]
    if np.any(np.abs(ratios - 2.0) > ratio_tol * 2.0):
        raise ValueError(f"resolutions must halve dx, got ratios {ratios}")
    if np.all(r <= floor):
        return EXACT
    if np.any(r <= floor):
        # mixed: some levels already at round-off; slope over the resolved ones only
        keep = r > floor
        if keep.sum() < 2:
            return EXACT
        h, r = h[keep], r[keep]
    slope, _ = np.polyfit(np.log(h), np.log(r), 1)
    return float(slope)


def pairwise_orders(samples) -> list[float]:
    """log2 ratios of consecutive norms (finest last)."""
    samples = sorted(((float(h), float(r)) for h, r in samples), reverse=True)
    r = [s[1] for s in samples]
    return [float(np.log2(a / b)) if a > 0 and b > 0 else float("nan") for a, b in zip(r[:-1], r[1:])]
