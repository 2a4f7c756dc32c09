#!/usr/bin/env python3
"""
Shared numerical and I/O helpers: trend classification over nested windows,
Gauss-Legendre panels, log-space cumulative integrals and report writers.
"""

import json
import logging
import math
from functools import lru_cache
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config import config

logger = logging.getLogger(__name__)

VANISHING = "vanishing"
BOUNDED = "bounded"
DIVERGING = "diverging"
INCONCLUSIVE = "inconclusive"
UNAVAILABLE = "unavailable"


def classify_trend(values: Sequence[float], factor: Optional[float] = None) -> str:
    """Classify a quantity sampled at the edges of nested, doubling windows.

    The quantity "vanishes" if it shrinks by at least ``factor`` across every
    doubling, "diverges" if it grows by at least ``factor`` across every
    doubling, and is "bounded" if every ratio stays strictly inside
    ``(1/factor, factor)``. An identically zero sequence carries no trend and is
    "inconclusive".

    Args:
        values: Edge values for windows of increasing size (at least 2)
        factor: Growth factor threshold (default from config, 2.0)

    Returns:
        One of "vanishing", "bounded", "diverging", "inconclusive"

    Raises:
        ValueError: If fewer than two values are given
    """
    if len(values) < 2:
        raise ValueError(f"Need at least 2 nested values, got {len(values)}")
    factor = config.trend_factor if factor is None else factor
    vals = np.asarray(values, dtype=float)
    if np.any(np.isnan(vals)) or np.any(vals < 0) or not np.any(vals):
        return INCONCLUSIVE

    slack = 1.0 - 1e-9
    ratios = []
    for prev, nxt in zip(vals[:-1], vals[1:]):
        if prev == 0.0:
            ratios.append(0.0 if nxt == 0.0 else math.inf)
        else:
            ratios.append(nxt / prev)

    if all(r <= slack / factor for r in ratios):
        return VANISHING
    if all(r >= factor * slack for r in ratios):
        return DIVERGING
    if all(1.0 / factor < r < factor for r in ratios):
        return BOUNDED
    return INCONCLUSIVE


def nested_windows(half_width: float, reach: float = 1.0) -> List[float]:
    """Window half-widths used for trend classification.

    Args:
        half_width: Base window half-width X
        reach: How far (in units of X) the data are valid

    Returns:
        [X, 2X, 4X] when the data reach 4X, otherwise [X/4, X/2, X]
    """
    multipliers = config.trend_multipliers
    if max(multipliers) <= reach * (1.0 + 1e-12):
        return [half_width * m for m in multipliers]
    top = max(multipliers)
    return [half_width * m / top for m in multipliers]


def edge_values(
    func: Callable[[np.ndarray], np.ndarray], windows: Sequence[float], kind: str = "sup"
) -> List[float]:
    """Evaluate a profile at +-W for each window and aggregate both ends.

    Args:
        func: Vectorised evaluator of the quantity
        windows: Window half-widths
        kind: "sup" aggregates with max (both ends must vanish), "inf" with min

    Returns:
        One aggregated value per window (NaN if an end is undefined)
    """
    w = np.asarray(windows, dtype=float)
    left = np.asarray(func(-w), dtype=float)
    right = np.asarray(func(w), dtype=float)
    both = np.vstack([left, right])
    if kind == "sup":
        agg = np.max(both, axis=0)
    elif kind == "inf":
        agg = np.min(both, axis=0)
    else:
        raise ValueError(f"Unknown edge aggregation: {kind}")
    return [float(v) for v in agg]


@lru_cache(maxsize=8)
def _gauss_rule(order: int) -> Tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(order)


def gauss_integrate(
    func: Callable[[np.ndarray], np.ndarray],
    a: Any,
    b: Any,
    order: Optional[int] = None,
    breakpoints: Sequence[float] = (0.0,),
    panels: int = 2,
) -> np.ndarray:
    """Composite Gauss-Legendre integral of ``func`` over [a, b], vectorised.

    Each interval is split at every breakpoint it contains and each piece is
    divided into ``panels`` equal panels.

    Args:
        func: Vectorised integrand accepting arrays of any shape
        a: Lower limits (scalar or array)
        b: Upper limits, broadcastable against ``a``, with b >= a
        order: Nodes per panel (default from config)
        breakpoints: Points where the integrand may have a kink
        panels: Equal panels per piece

    Returns:
        Array of integrals with the broadcast shape of ``a`` and ``b``
    """
    order = config.gauss_nodes if order is None else order
    nodes, weights = _gauss_rule(order)
    lo, hi = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))

    cuts = [lo]
    for c in sorted(breakpoints):
        cuts.append(np.clip(c, lo, hi))
    cuts.append(hi)

    total = np.zeros(lo.shape)
    for left, right in zip(cuts[:-1], cuts[1:]):
        width = (right - left) / panels
        for k in range(panels):
            p_lo = left + k * width
            mid = p_lo + 0.5 * width
            half = 0.5 * width
            t = mid[..., None] + half[..., None] * nodes
            vals = np.asarray(func(t), dtype=float)
            contrib = half * np.sum(vals * weights, axis=-1)
            total = total + np.where(half > 0, contrib, 0.0)
    return total


def gauss_integrate_around(
    func: Callable[[np.ndarray], np.ndarray],
    center: Any,
    radius: Any,
    order: Optional[int] = None,
    breakpoints: Sequence[float] = (0.0,),
    panels: int = 2,
) -> np.ndarray:
    """Composite Gauss-Legendre integral over [center - radius, center + radius].

    Pieces are laid out in offset coordinates, so radii far below the
    spacing of floats near ``center`` still give 2 * radius * func(center).

    Args:
        func: Vectorised integrand
        center: Interval centers
        radius: Nonnegative half-widths, broadcastable against ``center``
        order: Nodes per panel (default from config)
        breakpoints: Points where the integrand may have a kink
        panels: Equal panels per piece

    Returns:
        Array of integrals with the broadcast shape of the inputs
    """
    order = config.gauss_nodes if order is None else order
    nodes, weights = _gauss_rule(order)
    c, rad = np.broadcast_arrays(np.asarray(center, dtype=float), np.asarray(radius, dtype=float))

    cuts = [-rad]
    for bp in sorted(breakpoints):
        cuts.append(np.clip(bp - c, -rad, rad))
    cuts.append(rad)

    total = np.zeros(c.shape)
    for left, right in zip(cuts[:-1], cuts[1:]):
        width = (right - left) / panels
        for k in range(panels):
            mid = left + (k + 0.5) * width
            half = 0.5 * width
            t = c[..., None] + (mid[..., None] + half[..., None] * nodes)
            vals = np.asarray(func(t), dtype=float)
            contrib = half * np.sum(vals * weights, axis=-1)
            total = total + np.where(half > 0, contrib, 0.0)
    return total


def _log_expm1_ratio(delta: np.ndarray) -> np.ndarray:
    """log((e^delta - 1) / delta), stable for all real delta."""
    delta = np.asarray(delta, dtype=float)
    out = np.empty_like(delta)
    small = np.abs(delta) < 1e-8
    big = delta > 700.0
    mid = ~(small | big)
    out[small] = 0.5 * delta[small]
    out[big] = delta[big] - np.log(delta[big])
    out[mid] = np.log(np.expm1(delta[mid]) / delta[mid])
    return out


def log_segment_integrals(log_f: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Log of the integral of f over each grid cell, f log-linear per cell.

    Exact for exponential profiles; second order otherwise.
    """
    log_f = np.asarray(log_f, dtype=float)
    grid = np.asarray(grid, dtype=float)
    step = np.diff(grid)
    delta = np.diff(log_f)
    return log_f[:-1] + np.log(step) + _log_expm1_ratio(delta)


def log_cumulative_integral(log_f: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Log of the running integral of f from grid[0] to each grid node.

    Args:
        log_f: Log of the integrand at the grid nodes
        grid: Strictly increasing nodes

    Returns:
        Array of the same length; first entry is -inf
    """
    seg = log_segment_integrals(log_f, grid)
    return np.concatenate([[-np.inf], np.logaddexp.accumulate(seg)])


def log_tail_integral(log_f: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Log of the running integral of f from each grid node to grid[-1]."""
    seg = log_segment_integrals(log_f, grid)
    tail = np.logaddexp.accumulate(seg[::-1])[::-1]
    return np.concatenate([tail, [-np.inf]])


def make_rng(seed: Optional[int] = None) -> np.random.Generator:
    """Seeded generator for randomized probe points."""
    return np.random.default_rng(config.seed if seed is None else seed)


def _to_builtin(obj: Any) -> Any:
    """Convert numpy scalars/arrays and non-finite floats for JSON output."""
    if isinstance(obj, dict):
        return {str(k): _to_builtin(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_builtin(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_to_builtin(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        value = float(obj)
        if math.isnan(value):
            return None
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return obj


def save_json(data: Dict[str, Any], filepath: str) -> None:
    """Save a report dictionary as JSON.

    Args:
        data: Report dictionary (numpy values allowed)
        filepath: Path to output file

    Raises:
        IOError: If file cannot be written
    """
    file_path = Path(filepath)
    # Create parent directory if it doesn't exist
    file_path.parent.mkdir(parents=True, exist_ok=True)

    try:
        with open(file_path, "w", encoding="utf-8") as f:
            json.dump(_to_builtin(data), f, indent=2)
            f.write("\n")
    except IOError as e:
        raise IOError(f"Failed to write to {filepath}: {e}")


def save_frame(frame: pd.DataFrame, filepath: str) -> None:
    """Save a table as CSV, undefined values as empty cells.

    Args:
        frame: Table to write
        filepath: Path to output file

    Raises:
        ValueError: If the table is empty
        IOError: If file cannot be written
    """
    if frame.empty:
        raise ValueError(f"Refusing to write empty table to {filepath}")

    file_path = Path(filepath)
    file_path.parent.mkdir(parents=True, exist_ok=True)

    try:
        frame.to_csv(file_path, index=False, na_rep="", float_format="%.12g")
    except IOError as e:
        raise IOError(f"Failed to write to {filepath}: {e}")
