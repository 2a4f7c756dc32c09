#!/usr/bin/env python3
"""
Hardy-type two-sided bounds for the halves of the Green operator.

G = G1 + G2 with G1 f(x) = u(x) int_{t<x} v f and G2 f(x) = v(x) int_{t>x} u f.
Each half is a weighted Hardy operator whose L_p norm lies between the
Muckenhoupt constant H and p^(1/p) p'^(1/p') H. Discretized norms come
from midpoint collocation on [-X, X].
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy.linalg import svdvals
from scipy.optimize import minimize_scalar

from config import config
from local_geometry import AuxProfile
from principal_solutions import FssProfile, GreenKernel
from utils import (
    gauss_integrate,
    log_cumulative_integral,
    log_tail_integral,
    save_frame,
)

logger = logging.getLogger(__name__)

# Relative slack allowed between discretized norms and the Hardy sandwich
GRID_SLACK = 0.05


def conjugate_exponent(p: float) -> float:
    """p' with 1/p + 1/p' = 1.

    Raises:
        ValueError: Unless 1 < p < inf
    """
    if not (1.0 < p < np.inf):
        raise ValueError(f"Exponent p must lie in (1, inf), got {p}")
    return p / (p - 1.0)


def hardy_factor(p: float) -> float:
    """p^(1/p) * p'^(1/p'), the gap of the two-sided Hardy bound."""
    q = conjugate_exponent(p)
    return float(p ** (1.0 / p) * q ** (1.0 / q))


@dataclass
class HardyEstimate:
    """Supremum of the Hardy product over (a, b).

    Attributes:
        value: The supremum
        argmax: Where it is attained
        truncated: An integrand is still large at an open end
    """

    value: float
    argmax: float
    truncated: bool = False


def _as_log(func: Callable[[np.ndarray], np.ndarray], log_scale: bool) -> Callable[[np.ndarray], np.ndarray]:
    if log_scale:
        return func

    def log_func(t: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(np.asarray(func(t), dtype=float))

    return log_func


def _log_partial(log_w: Callable[[np.ndarray], np.ndarray], power: float, lo: float, hi: float) -> float:
    """log of the integral of w^power over [lo, hi], shifted against overflow."""
    if hi <= lo:
        return -np.inf
    shift = float(np.nanmax(power * log_w(np.array([lo, 0.5 * (lo + hi), hi]))))
    value = float(gauss_integrate(lambda t: np.exp(power * log_w(t) - shift), lo, hi))
    return np.log(value) + shift if value > 0 else -np.inf


def hardy_constant(
    mu: Callable[[np.ndarray], np.ndarray],
    theta: Callable[[np.ndarray], np.ndarray],
    p: float,
    a: float,
    b: float,
    samples: Optional[int] = None,
    tilde: bool = False,
    log_scale: bool = False,
    open_ends: bool = False,
) -> HardyEstimate:
    """Muckenhoupt constant of a weighted Hardy operator on (a, b).

    H = sup_x [int_a^x mu^p]^(1/p) [int_x^b theta^p']^(1/p'); with
    ``tilde`` the roles of the two ends are swapped:
    sup_x [int_x^b mu^p]^(1/p) [int_a^x theta^p']^(1/p').

    The sup is taken over a uniform grid and refined by a bounded scalar
    search next to the best node. Integrals are kept in log form.

    Args:
        mu: Weight raised to p
        theta: Weight raised to p'
        p: Exponent in (1, inf)
        a: Left end
        b: Right end
        samples: Grid size (default hardy.n * hardy.refine)
        tilde: Use the mirrored constant
        log_scale: ``mu`` and ``theta`` return logs of the weights
        open_ends: (a, b) truncates an infinite interval; flag weights that
            are still large at the cut

    Returns:
        HardyEstimate

    Raises:
        ValueError: On a bad exponent or an empty interval
    """
    q = conjugate_exponent(p)
    if not b > a:
        raise ValueError(f"Empty interval ({a}, {b})")
    samples = config.hardy_n * config.hardy_refine if samples is None else samples
    log_mu = _as_log(mu, log_scale)
    log_theta = _as_log(theta, log_scale)

    grid = np.linspace(a, b, max(samples, 3))
    lm = p * log_mu(grid)
    lt = q * log_theta(grid)
    if tilde:
        log_first = log_tail_integral(lm, grid)
        log_second = log_cumulative_integral(lt, grid)
    else:
        log_first = log_cumulative_integral(lm, grid)
        log_second = log_tail_integral(lt, grid)
    log_h = log_first / p + log_second / q
    log_h[~np.isfinite(log_h)] = -np.inf
    best = int(np.argmax(log_h))

    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, grid.size - 1)]

    def objective(x: float) -> float:
        # integrals split at the grid node left of the bracket
        k = max(best - 1, 0)
        if tilde:
            first = np.logaddexp(_log_partial(log_mu, p, x, hi), log_first[min(best + 1, grid.size - 1)])
            second = np.logaddexp(log_second[k], _log_partial(log_theta, q, lo, x))
        else:
            first = np.logaddexp(log_first[k], _log_partial(log_mu, p, lo, x))
            second = np.logaddexp(_log_partial(log_theta, q, x, hi), log_second[min(best + 1, grid.size - 1)])
        return -(first / p + second / q)

    value, argmax = float(log_h[best]), float(grid[best])
    if hi > lo:
        refined = minimize_scalar(objective, bounds=(lo, hi), method="bounded")
        if -refined.fun > value:
            value, argmax = float(-refined.fun), float(refined.x)

    truncated = False
    if open_ends:
        total_mu = np.logaddexp.reduce(lm)
        total_theta = np.logaddexp.reduce(lt)
        edge = max(
            lm[0] - total_mu, lm[-1] - total_mu, lt[0] - total_theta, lt[-1] - total_theta
        )
        truncated = bool(edge > np.log(config.tail_tol))
        if truncated:
            logger.warning(f"Hardy constant on ({a:g}, {b:g}): weights not negligible at the cut")

    estimate = HardyEstimate(float(np.exp(value)), argmax, truncated)
    logger.debug(f"Hardy constant p={p:g} tilde={tilde}: {estimate.value:.6g} at {argmax:.4g}")
    return estimate


@dataclass
class ThetaProfile:
    """theta_p(x) = [int_{t<x} v^p]^(1/p) [int_{t>x} u^p']^(1/p') on the window grid.

    Attributes:
        x: Window grid
        theta: theta_p samples
        ratio_min, ratio_max: Extremes of theta_p / (h d) (NaN without aux)
        variants: sup of the one-sided variants around +-N, keyed by N
    """

    p: float
    x: np.ndarray
    theta: np.ndarray
    ratio_min: float = float("nan")
    ratio_max: float = float("nan")
    variants: Dict[float, Dict[str, float]] = field(default_factory=dict)

    @property
    def variants_decrease(self) -> bool:
        """Whether both one-sided variants shrink as N grows."""
        keys = sorted(self.variants)
        plus = [self.variants[k]["plus"] for k in keys]
        minus = [self.variants[k]["minus"] for k in keys]
        return all(b <= a for a, b in zip(plus, plus[1:])) and all(
            b <= a for a, b in zip(minus, minus[1:])
        )

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"x": self.x, "theta_p": self.theta})


def _fss_logs(fss: FssProfile, points: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    grid = np.linspace(-fss.half_width, fss.half_width, points)
    return grid, fss.log_v_at(grid), fss.log_u_at(grid)


def theta_p_profile(
    fss: FssProfile, p: Optional[float] = None, aux: Optional[AuxProfile] = None
) -> ThetaProfile:
    """theta_p on the window grid from integrals over the whole FSS domain.

    Also reports theta_p / (h d) against ``aux`` and the one-sided variants
    theta_p^+(x, N) = [int_N^x v^p]^(1/p) [int_x u^p']^(1/p') (x >= N) and its
    mirror for N in {X/4, X/2}.

    Args:
        fss: Principal pair; its domain bounds the integrals
        p: Exponent (default from config)
        aux: Auxiliary profile on the same window, for the h d envelope

    Returns:
        ThetaProfile
    """
    p = config.hardy_p if p is None else p
    q = conjugate_exponent(p)
    points = config.hardy_n * config.hardy_refine + 1
    grid, log_v, log_u = _fss_logs(fss, points)
    log_cum_v = log_cumulative_integral(p * log_v, grid)
    log_tail_u = log_tail_integral(q * log_u, grid)
    log_theta = log_cum_v / p + log_tail_u / q

    x = fss.grid
    theta = np.exp(np.interp(x, grid, log_theta))
    profile = ThetaProfile(p=p, x=x, theta=theta)

    if aux is not None:
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio = theta / (aux.h * aux.d)
        ratio = ratio[np.isfinite(ratio)]
        if ratio.size:
            profile.ratio_min = float(ratio.min())
            profile.ratio_max = float(ratio.max())

    X = fss.window.half_width
    for N in (X / 4.0, X / 2.0):
        right = grid >= N
        cum_from_n = log_cumulative_integral(p * log_v[right], grid[right]) / p
        plus = np.exp(cum_from_n + log_tail_u[right] / q)
        left = grid <= -N
        tail_to_n = log_tail_integral(q * log_u[left], grid[left]) / q
        minus = np.exp(log_cum_v[left] / p + tail_to_n)
        inside_plus = grid[right] <= X
        inside_minus = grid[left] >= -X
        profile.variants[N] = {
            "plus": float(np.max(plus[inside_plus])) if inside_plus.any() else float("nan"),
            "minus": float(np.max(minus[inside_minus])) if inside_minus.any() else float("nan"),
        }
    logger.info(f"theta_{p:g} on {x.size} samples, max {float(np.max(theta)):.6g}")
    return profile


def midpoint_nodes(half_width: float, n: int) -> Tuple[np.ndarray, float]:
    """Cell midpoints of n equal cells on [-X, X] and the cell width."""
    if n < 1:
        raise ValueError(f"Discretization size must be positive, got {n}")
    width = 2.0 * half_width / n
    return -half_width + (np.arange(n) + 0.5) * width, width


def green_blocks(fss: FssProfile, half_width: float, n: int) -> Dict[str, np.ndarray]:
    """Quadrature matrices of G, G1 (t < x) and G2 (t > x); the diagonal is split evenly."""
    nodes, width = midpoint_nodes(half_width, n)
    kernel = GreenKernel(fss).matrix(nodes) * width
    diag = np.diag(np.diag(kernel))
    return {
        "G": kernel,
        "G1": np.tril(kernel, -1) + 0.5 * diag,
        "G2": np.triu(kernel, 1) + 0.5 * diag,
        "nodes": nodes,
    }


def _dual(y: np.ndarray, p: float) -> np.ndarray:
    return np.sign(y) * np.abs(y) ** (p - 1.0)


def operator_norm(matrix: np.ndarray, p: float = 2.0, steps: Optional[int] = None) -> Tuple[float, bool]:
    """l_p operator norm of a nonnegative matrix.

    p = 2 uses the largest singular value. Other p run a dual-pairing power
    iteration from a positive start, which gives a lower estimate.

    Returns:
        (norm, converged)
    """
    if p == 2.0:
        return float(svdvals(matrix)[0]), True

    q = conjugate_exponent(p)
    steps = config.power_steps if steps is None else steps
    x = np.ones(matrix.shape[1])
    x /= np.linalg.norm(x, p)
    estimate, previous = 0.0, -1.0
    for _ in range(steps):
        z = matrix.T @ _dual(matrix @ x, p)
        norm_z = np.linalg.norm(z, q)
        if norm_z == 0:
            return 0.0, True
        x = _dual(z / norm_z, q)
        x /= np.linalg.norm(x, p)
        previous, estimate = estimate, float(np.linalg.norm(matrix @ x, p))
    converged = abs(estimate - previous) <= 1e-6 * estimate
    if not converged:
        logger.warning(f"p={p:g} norm iteration not settled after {steps} steps ({estimate:.6g})")
    return estimate, converged


@dataclass
class OperatorNorms:
    """Discretized norms of G1, G2 and G on [-X, X]."""

    p: float
    n: int
    half_width: float
    g1: float
    g2: float
    g: float
    converged: bool = True

    @property
    def triangle_ok(self) -> bool:
        """(|G1| + |G2|)/2 <= |G| <= |G1| + |G2| up to rounding."""
        slack = 1e-9 * max(self.g, 1e-300)
        return 0.5 * (self.g1 + self.g2) <= self.g + slack and self.g <= self.g1 + self.g2 + slack


def split_operator_norms(
    fss: FssProfile, p: Optional[float] = None, half_width: Optional[float] = None, n: Optional[int] = None
) -> OperatorNorms:
    """Discretized L_p norms of G1, G2 and G.

    Args:
        fss: Principal pair
        p: Exponent (default from config)
        half_width: Discretization window (default: the FSS window, capped at its domain)
        n: Number of cells (default from config)

    Returns:
        OperatorNorms
    """
    p = config.hardy_p if p is None else p
    n = config.hardy_n if n is None else n
    half_width = fss.window.half_width if half_width is None else half_width
    half_width = min(half_width, fss.half_width)

    blocks = green_blocks(fss, half_width, n)
    g1, ok1 = operator_norm(blocks["G1"], p)
    g2, ok2 = operator_norm(blocks["G2"], p)
    g, ok = operator_norm(blocks["G"], p)
    norms = OperatorNorms(p, n, half_width, g1, g2, g, ok1 and ok2 and ok)
    logger.info(f"p={p:g}, n={n}, X={half_width:g}: |G1|={g1:.6g} |G2|={g2:.6g} |G|={g:.6g}")
    if not norms.triangle_ok:
        logger.warning("Discretized norms violate the triangle relation")
    return norms


@dataclass
class HardyReport:
    """Hardy constants, theta_p profile and discretized norms for one exponent."""

    p: float
    H: HardyEstimate
    H_tilde: HardyEstimate
    theta: ThetaProfile
    norms: OperatorNorms
    norms_in_n: List[float]
    norms_in_x: List[float]

    @property
    def factor(self) -> float:
        return hardy_factor(self.p)

    def _sandwich(self, norm: float, constant: float) -> bool:
        return (
            constant <= norm * (1.0 + GRID_SLACK)
            and norm <= self.factor * constant * (1.0 + GRID_SLACK)
        )

    @property
    def g2_sandwich(self) -> bool:
        return self._sandwich(self.norms.g2, self.H.value)

    @property
    def g1_sandwich(self) -> bool:
        return self._sandwich(self.norms.g1, self.H_tilde.value)

    @property
    def monotone_in_n(self) -> bool:
        return all(b >= a * (1.0 - 1e-9) for a, b in zip(self.norms_in_n, self.norms_in_n[1:]))

    @property
    def monotone_in_x(self) -> bool:
        return all(b >= a * (1.0 - 1e-9) for a, b in zip(self.norms_in_x, self.norms_in_x[1:]))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "p": self.p,
            "factor": self.factor,
            "H": self.H.value,
            "H_argmax": self.H.argmax,
            "H_truncated": self.H.truncated,
            "H_tilde": self.H_tilde.value,
            "H_tilde_argmax": self.H_tilde.argmax,
            "norm_G1": self.norms.g1,
            "norm_G2": self.norms.g2,
            "norm_G": self.norms.g,
            "n": self.norms.n,
            "half_width": self.norms.half_width,
            "converged": self.norms.converged,
            "triangle_ok": self.norms.triangle_ok,
            "g1_sandwich": self.g1_sandwich,
            "g2_sandwich": self.g2_sandwich,
            "norms_in_n": list(self.norms_in_n),
            "norms_in_x": list(self.norms_in_x),
            "monotone_in_n": self.monotone_in_n,
            "monotone_in_x": self.monotone_in_x,
            "theta_max": float(np.max(self.theta.theta)),
            "theta_over_hd": [self.theta.ratio_min, self.theta.ratio_max],
            "theta_variants": {f"{k:g}": v for k, v in self.theta.variants.items()},
        }


def hardy_report(
    fss: FssProfile, p: Optional[float] = None, n: Optional[int] = None, aux: Optional[AuxProfile] = None
) -> HardyReport:
    """Hardy constants of G2 (v outside, u inside) and G1 (mirrored) with the discretized norms.

    The constants are computed on the same interval [-X, X] as the matrices.
    Norms of G are also reported for n/4, n/2, n cells (nested cell
    boundaries) and for X/4, X/2, X at fixed cell width.
    """
    p = config.hardy_p if p is None else p
    n = config.hardy_n if n is None else n
    conjugate_exponent(p)
    half_width = min(fss.window.half_width, fss.half_width)
    v = fss.log_v_at
    u = fss.log_u_at

    H = hardy_constant(v, u, p, -half_width, half_width, log_scale=True)
    H_tilde = hardy_constant(u, v, p, -half_width, half_width, tilde=True, log_scale=True)
    theta = theta_p_profile(fss, p, aux)
    norms = split_operator_norms(fss, p, half_width, n)

    norms_in_n = [
        operator_norm(green_blocks(fss, half_width, max(1, n // k))["G"], p)[0] for k in (4, 2)
    ]
    norms_in_n.append(norms.g)
    norms_in_x = [
        operator_norm(green_blocks(fss, half_width * f, max(1, int(round(n * f))))["G"], p)[0]
        for f in (0.25, 0.5)
    ]
    norms_in_x.append(norms.g)

    report = HardyReport(p, H, H_tilde, theta, norms, norms_in_n, norms_in_x)
    if not (report.g1_sandwich and report.g2_sandwich):
        logger.warning(f"Hardy sandwich fails for p={p:g} (G1 {report.g1_sandwich}, G2 {report.g2_sandwich})")
    return report


def save_operator_matrix(fss: FssProfile, filepath: str, n: Optional[int] = None) -> None:
    """Write the discretized G as a CSV matrix (first column holds the nodes)."""
    n = config.hardy_n if n is None else n
    blocks = green_blocks(fss, min(fss.window.half_width, fss.half_width), n)
    frame = pd.DataFrame(blocks["G"], columns=[f"{t:.10g}" for t in blocks["nodes"]])
    frame.insert(0, "x", blocks["nodes"])
    save_frame(frame, filepath)
