#!/usr/bin/env python3
"""
Largest eigenvalues of the discretized Green operator on L_2, the envelope
check against B and the decay quantities that separate compact cases.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
from scipy.linalg import eigh

from config import config
from hardy_bounds import green_blocks
from principal_solutions import FssProfile
from utils import (
    VANISHING,
    classify_trend,
    edge_values,
    log_cumulative_integral,
    log_tail_integral,
    make_rng,
    nested_windows,
    save_frame,
)

logger = logging.getLogger(__name__)

EIGEN_COLUMNS = ["index", "eigenvalue"]

# Edge product below this fraction of its interior maximum
EDGE_FLUX_LIMIT = 1e-3


@dataclass
class EigenResult:
    """Top eigenvalues (descending) of the symmetric quadrature matrix of G."""

    values: np.ndarray
    n: int
    half_width: float
    method: str
    converged: bool = True

    @property
    def lam_max(self) -> float:
        return float(self.values[0])

    def tail_ratio(self, k: int) -> float:
        """lambda_1 / lambda_k (1-based), NaN when fewer values are known."""
        if k > len(self.values) or self.values[k - 1] <= 0:
            return float("nan")
        return float(self.values[0] / self.values[k - 1])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {"index": np.arange(1, len(self.values) + 1), "eigenvalue": self.values},
            columns=EIGEN_COLUMNS,
        )


def _power_deflation(matrix: np.ndarray, top: int, seed: Optional[int] = None) -> tuple:
    """Power iteration with orthogonal deflation; returns (values, converged)."""
    rng = make_rng(seed)
    n = matrix.shape[0]
    found: List[np.ndarray] = []
    values: List[float] = []
    converged = True
    for k in range(top):
        x = rng.standard_normal(n)
        for vec in found:
            x -= (vec @ x) * vec
        x /= np.linalg.norm(x)
        lam = 0.0
        for it in range(config.spectral_max_iter):
            y = matrix @ x
            for vec in found:
                y -= (vec @ y) * vec
            new_lam = float(x @ y)
            norm_y = np.linalg.norm(y)
            if norm_y == 0:
                break
            x = y / norm_y
            if abs(new_lam - lam) <= config.spectral_tol * abs(new_lam):
                lam = new_lam
                break
            lam = new_lam
        else:
            converged = False
            logger.warning(f"Eigenvalue {k + 1} not converged after {config.spectral_max_iter} steps")
        found.append(x)
        values.append(lam)
    return np.array(values), converged


def eigen_top(
    fss: FssProfile,
    half_width: Optional[float] = None,
    n: Optional[int] = None,
    top: Optional[int] = None,
    method: str = "dense",
    seed: Optional[int] = None,
) -> EigenResult:
    """Largest eigenvalues of the midpoint discretization of G on [-X, X].

    The matrix has uniform weights and is symmetric. ``method="dense"``
    uses a partial symmetric eigensolver; ``method="power"`` runs power
    iteration with orthogonal deflation.

    Args:
        fss: Principal pair
        half_width: Discretization window (default: the FSS window)
        n: Number of cells (default from config)
        top: How many eigenvalues (default from config, capped at n)
        method: "dense" or "power"
        seed: Seed for the power-iteration start vectors

    Returns:
        EigenResult

    Raises:
        ValueError: On an unknown method
    """
    n = config.spectral_n if n is None else n
    top = min(config.spectral_top if top is None else top, n)
    half_width = fss.window.half_width if half_width is None else half_width
    half_width = min(half_width, fss.half_width)
    matrix = green_blocks(fss, half_width, n)["G"]

    if method == "dense":
        values = eigh(matrix, eigvals_only=True, subset_by_index=[n - top, n - 1])[::-1]
        converged = True
    elif method == "power":
        values, converged = _power_deflation(matrix, top, seed)
    else:
        raise ValueError(f"Unknown eigen method: {method}")

    result = EigenResult(np.asarray(values, dtype=float), n, half_width, method, converged)
    logger.info(f"lambda_max = {result.lam_max:.8g} (n={n}, X={half_width:g}, {method})")
    return result


def check_eigen_vs_B(lam_max: float, B: float, applicable: bool = True) -> Dict[str, Any]:
    """lambda_max / B against the two-sided envelope.

    Args:
        lam_max: Largest eigenvalue
        B: sup h d over the window
        applicable: The vanishing of h d holds, so the bound is claimed

    Returns:
        Dict with ratio, envelope, within and asserted
    """
    envelope = config.envelope
    ratio = lam_max / B if B > 0 else float("nan")
    within = bool(1.0 / envelope <= ratio <= envelope)
    if applicable and not within:
        logger.warning(f"lambda/B = {ratio:.4g} outside [1/{envelope:g}, {envelope:g}]")
    return {"ratio": ratio, "envelope": envelope, "within": within, "asserted": applicable}


@dataclass
class DecayProfile:
    """I(x) = (v/u) int_x u^2 and its mirror J(x) = (u/v) int^x v^2 on the window grid."""

    x: np.ndarray
    I: np.ndarray
    J: np.ndarray
    windows: List[float]
    edges: List[float] = field(default_factory=list)
    trend: str = ""

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"x": self.x, "I": self.I, "J": self.J})


def decay_quantities(fss: FssProfile, points: Optional[int] = None) -> DecayProfile:
    """I and J from log integrals over the FSS domain, with an edge trend of max(I, J).

    Trend windows stay within half of the FSS domain, away from the cut.
    """
    points = config.hardy_n * config.hardy_refine + 1 if points is None else points
    grid = np.linspace(-fss.half_width, fss.half_width, points)
    log_v = fss.log_v_at(grid)
    log_u = fss.log_u_at(grid)
    log_i = log_v - log_u + log_tail_integral(2.0 * log_u, grid)
    log_j = log_u - log_v + log_cumulative_integral(2.0 * log_v, grid)

    def both(t: np.ndarray) -> np.ndarray:
        return np.maximum(np.exp(np.interp(t, grid, log_i)), np.exp(np.interp(t, grid, log_j)))

    x = fss.grid
    windows = nested_windows(fss.window.half_width, reach=0.5 * fss.reach)
    with np.errstate(over="ignore"):
        profile = DecayProfile(
            x=x,
            I=np.exp(np.interp(x, grid, log_i)),
            J=np.exp(np.interp(x, grid, log_j)),
            windows=windows,
        )
        profile.edges = edge_values(both, windows, "sup")
    profile.trend = classify_trend(profile.edges)
    logger.debug(f"Decay edges {profile.edges} -> {profile.trend}")
    return profile


def edge_flux_ratio(fss: FssProfile, n: Optional[int] = None) -> Dict[str, Any]:
    """r y' y at the window edges against its interior maximum, y = G applied to 1 on [-1, 1].

    Returns:
        Dict with the edge value, the interior maximum and their ratio
    """
    n = config.spectral_n if n is None else n
    half_width = min(fss.window.half_width, fss.half_width)
    blocks = green_blocks(fss, half_width, n)
    nodes = blocks["nodes"]
    source = (np.abs(nodes) <= 1.0).astype(float)
    y = blocks["G"] @ source
    flux = fss.field.r(nodes) * np.gradient(y, nodes) * y
    magnitude = np.abs(flux)
    peak = float(magnitude.max())
    edge = float(max(magnitude[0], magnitude[-1]))
    ratio = edge / peak if peak > 0 else float("nan")
    return {"edge": edge, "peak": peak, "ratio": ratio, "passed": bool(ratio < EDGE_FLUX_LIMIT)}


@dataclass
class SpectralReport:
    """Eigenvalues, envelope check and decay evidence for one coefficient pair."""

    eigen: EigenResult
    B: float
    envelope: Dict[str, Any]
    decay: DecayProfile
    hd_trend: str
    edge_flux: Dict[str, Any]

    @property
    def decay_agrees(self) -> bool:
        """I and J vanish exactly when h d does."""
        return (self.decay.trend == VANISHING) == (self.hd_trend == VANISHING)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lambda_max": self.eigen.lam_max,
            "eigenvalues": self.eigen.values,
            "n": self.eigen.n,
            "half_width": self.eigen.half_width,
            "method": self.eigen.method,
            "converged": self.eigen.converged,
            "B": self.B,
            "lambda_over_B": self.envelope,
            "decay_edges": self.decay.edges,
            "decay_trend": self.decay.trend,
            "hd_trend": self.hd_trend,
            "decay_agrees": self.decay_agrees,
            "edge_flux": self.edge_flux,
        }


def spectral_report(
    fss: FssProfile,
    B: float,
    hd_trend: str,
    n: Optional[int] = None,
    top: Optional[int] = None,
) -> SpectralReport:
    """Top eigenvalues, lambda/B envelope (claimed only when h d vanishes) and decay quantities."""
    eigen = eigen_top(fss, n=n, top=top)
    envelope = check_eigen_vs_B(eigen.lam_max, B, applicable=hd_trend == VANISHING)
    decay = decay_quantities(fss)
    flux = edge_flux_ratio(fss, n=n)
    report = SpectralReport(eigen, B, envelope, decay, hd_trend, flux)
    if not report.decay_agrees:
        logger.warning(f"Decay trend {decay.trend} disagrees with h d trend {hd_trend}")
    return report


def save_eigenvalues(eigen: EigenResult, filepath: str) -> None:
    """Write the eigenvalue tail as CSV."""
    save_frame(eigen.to_frame(), filepath)
