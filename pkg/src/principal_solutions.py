#!/usr/bin/env python3
"""
Principal fundamental system {u, v} of (r y')' = q y, the diagonal
rho = u v of the Green kernel, the crossing point x0 and residual checks.

Both sweeps integrate Riccati variables instead of the solutions themselves:

    sigma_v = v / (r v'),   tau_v = log sigma_v,   log(r v')  = Phi + m_v + c_v
    sigma_u = u / (r|u'|),  tau_u = log sigma_u,   log(r|u'|) = -Phi + m_u + c_u

with Phi(x) the integral of sqrt(q/r) from 0 to x. The exponential growth of
v and decay of u live in Phi, which cancels from the Wronskian and from
rho = sigma_v sigma_u / (sigma_v + sigma_u); tau and m stay O(1). When
sqrt(q/r) is large, tau is integrated relative to g = -log sqrt(r q), the
equilibrium of the Riccati equation, and m is recovered from a correction
that is quadratic in tau - g.

v is swept left to right from Dirichlet data at -X', u right to left from
+X', and the pair is rescaled once so that the Wronskian is 1 at x = 0.
"""

import logging
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from coefficient_model import WeightField, Window, integrability_trend
from config import config
from local_geometry import AuxProfile, HEvaluator, solve_d, solve_s
from utils import (
    DIVERGING,
    classify_trend,
    gauss_integrate,
    log_cumulative_integral,
    log_tail_integral,
    make_rng,
    nested_windows,
    save_frame,
)

logger = logging.getLogger(__name__)

FSS_COLUMNS = ["x", "log_v", "log_u", "rho", "rv_prime", "ru_prime"]

# Offset of the Dirichlet start, relative to the sweep length
_START_OFFSET = 1e-8

# Node spacing of the tabulated phase
_PHASE_STEP = 0.5

_Q_FLOOR = np.finfo(float).tiny


class FssConstructionError(RuntimeError):
    """The principal pair could not be built or validated."""


def _rate(field_: WeightField, x: Any) -> np.ndarray:
    """k = sqrt(q / r)."""
    with np.errstate(over="ignore"):
        return np.sqrt(field_.q(x)) / np.sqrt(field_.r(x))


class Phase:
    """Phi(x) = int_0^x sqrt(q/r) dt on [-L, L], tabulated at half-unit nodes.

    Attributes:
        nodes: Node grid on [-L, L], symmetric, containing 0
        values: Phi at the nodes, accumulated outwards from 0
        asymmetry: int_{-S}^0 sqrt(q/r) - int_0^S sqrt(q/r) over the sweep
            domain [-S, S], integrated from the odd part of the integrand
    """

    def __init__(self, field_: WeightField, half_width: float, sweep: float) -> None:
        self.field = field_
        count = 2 * int(np.ceil(half_width / _PHASE_STEP)) + 1
        self.nodes = np.linspace(-half_width, half_width, count)
        segments = gauss_integrate(lambda t: _rate(field_, t), self.nodes[:-1], self.nodes[1:])
        zero = count // 2
        self.values = np.zeros(count)
        self.values[zero + 1 :] = np.cumsum(segments[zero:])
        self.values[:zero] = -np.cumsum(segments[:zero][::-1])[::-1]
        self.asymmetry = float(
            gauss_integrate(
                lambda t: _rate(field_, -t) - _rate(field_, t),
                0.0,
                sweep,
                panels=max(8, int(np.ceil(sweep))),
            )
        )

    def __call__(self, t: Any) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        i = np.clip(np.searchsorted(self.nodes, t, side="right") - 1, 0, self.nodes.size - 2)
        return self.values[i] + gauss_integrate(lambda s: _rate(self.field, s), self.nodes[i], t)


def _equilibrium(field_: WeightField, x: Any) -> np.ndarray:
    """g = -log sqrt(r q), the log of the stable root of 1/r - q sigma^2."""
    return -0.5 * (np.log(field_.r(x)) + np.log(np.maximum(field_.q(x), _Q_FLOOR)))


class Sweep:
    """Dense (tau, m) along one sweep, NaN-free inside the integrated range."""

    def __init__(self, sol: Any, field_: Optional[WeightField] = None) -> None:
        self._sol = sol
        # set on the stiff route, where the states are (tau - g, m + tau/2)
        self._field = field_

    def __call__(self, t: np.ndarray) -> np.ndarray:
        y = np.array(self._sol(t), dtype=float)
        if self._field is not None:
            y[0] = y[0] + _equilibrium(self._field, t)
            y[1] = y[1] - 0.5 * y[0]
        return y


def _sweep(
    field_: WeightField, start: float, stop: float, direction: float, stiff: bool
) -> Sweep:
    """Integrate from the Dirichlet end ``start`` towards ``stop``.

    The first ``offset`` of the sweep is taken from the frozen-coefficient
    solution sigma = tanh(k s) / (r k), r y' = cosh(k s), which bridges the
    boundary layer of width 1/k.
    """
    offset = _START_OFFSET * max(1.0, abs(stop - start))
    x_start = start + direction * offset
    ks = float(_rate(field_, start)) * offset
    layer = np.tanh(ks) / ks if ks > 0 else 1.0
    tau0 = float(np.log(abs(field_.R(min(start, x_start), max(start, x_start))) * layer))
    # log cosh(k s) minus the phase gained over the offset
    m0 = float(np.log1p(np.exp(-2.0 * ks)) - np.log(2.0))

    def rhs(x: float, y: np.ndarray) -> List[float]:
        r = float(field_.r(x))
        q = float(field_.q(x))
        k = np.sqrt(q) / np.sqrt(r)
        sigma = np.exp(y[0])
        return [direction * (np.exp(-y[0]) / r - q * sigma), direction * (q * sigma - k)]

    def _local(x: float) -> Tuple[float, float]:
        q = float(field_.q(x))
        q_eff = max(q, _Q_FLOOR)
        return float(np.sqrt(q_eff) / np.sqrt(float(field_.r(x)))), q / q_eff

    def drift(x: float) -> float:
        step = config.fd_step * max(1.0, abs(x))
        return float(_equilibrium(field_, x + step) - _equilibrium(field_, x - step)) / (2 * step)

    # w = tau - g and n = m + tau/2: w' is -2k sinh(w) - g', n' is quadratic in w
    def rhs_stiff(x: float, y: np.ndarray) -> List[float]:
        k, c = _local(x)
        w = y[0]
        flow = k * (-2.0 * np.sinh(w) + (1.0 - c) * np.exp(w))
        correction = k * (2.0 * np.sinh(0.5 * w) ** 2 + 0.5 * (c - 1.0) * np.exp(w))
        return [direction * flow - drift(x), direction * correction]

    def jac_stiff(x: float, y: np.ndarray) -> np.ndarray:
        k, c = _local(x)
        w = y[0]
        return np.array(
            [
                [direction * k * (-2.0 * np.cosh(w) + (1.0 - c) * np.exp(w)), 0.0],
                [direction * k * (np.sinh(w) + 0.5 * (c - 1.0) * np.exp(w)), 0.0],
            ]
        )

    options: Dict[str, Any] = {
        "method": config.fss_stiff_method if stiff else config.fss_method,
        "rtol": config.fss_rtol,
        "atol": config.fss_atol,
        "dense_output": True,
    }
    if stiff:
        options["jac"] = jac_stiff
        fun = rhs_stiff
        g0 = float(_equilibrium(field_, x_start))
        # frozen layer measured from the local equilibrium: w = log tanh(k s)
        w0 = float(np.log(np.tanh(ks))) if ks > 1e-12 else tau0 - g0
        y0 = [w0, m0 + 0.5 * (w0 + g0)]
    else:
        fun = rhs
        y0 = [tau0, m0]

    with np.errstate(over="ignore"):
        sol = solve_ivp(fun, (x_start, stop), y0, **options)
    if not sol.success:
        raise FssConstructionError(
            f"Sweep from {start:g} to {stop:g} failed ({options['method']}): {sol.message}"
        )
    logger.debug(f"Sweep {start:g} -> {stop:g}: {len(sol.t)} steps with {options['method']}")
    return Sweep(sol.sol, field_ if stiff else None)


class FssProfile:
    """Principal pair {u, v} on a window, in log form, with dense evaluators.

    Attributes:
        field: Coefficient evaluators
        window: Window whose grid carries the stored arrays
        reach: Half-width of the valid domain, in units of X
        grid: Window grid
        log_v, log_u: Logs of v and u on the grid
        log_sigma_v, log_sigma_u: Logs of v/(r v') and u/(r|u'|) on the grid
        rho: u v on the grid
        x0: Crossing point u(x0) = v(x0)
        wronskian_residual: max |r(v'u - u'v) - 1| over the grid
        method: ODE method used for the sweeps
    """

    def __init__(
        self,
        field_: WeightField,
        window: Window,
        reach: float,
        sol_v: Sweep,
        sol_u: Sweep,
        phase: Phase,
        method: str,
    ) -> None:
        self.field = field_
        self.window = window
        self.reach = reach
        self.half_width = reach * window.half_width
        self.method = method
        self._sol_v = sol_v
        self._sol_u = sol_u
        self._phase = phase

        tau_v0, m_v0, tau_u0, m_u0 = self._states(np.array([0.0]))
        self._log_w0 = float(m_v0[0] + m_u0[0] + np.logaddexp(tau_v0[0], tau_u0[0]))

        self.grid = window.grid
        tau_v, m_v, tau_u, m_u = self._states(self.grid)
        shift_v, shift_u = self._shifts(self.grid)
        self.log_sigma_v = tau_v
        self.log_sigma_u = tau_u
        self.log_v = tau_v + m_v + shift_v
        self.log_u = tau_u + m_u + shift_u
        self.rho = np.exp(tau_v + tau_u - np.logaddexp(tau_v, tau_u))
        log_w = m_v + m_u + np.logaddexp(tau_v, tau_u)
        self.wronskian_residual = float(np.max(np.abs(np.expm1(log_w - self._log_w0))))
        self.x0 = float("nan")

    def _states(self, t: Any) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(tau_v, m_v, tau_u, m_u) at t; NaN outside the valid domain."""
        t = np.asarray(t, dtype=float)
        flat = t.ravel()
        inside = np.abs(flat) <= self.half_width * (1.0 + 1e-12)
        out = np.full((4, flat.size), np.nan)
        if inside.any():
            pts = np.clip(flat[inside], -self.half_width, self.half_width)
            out[0:2, inside] = self._sol_v(pts)
            out[2:4, inside] = self._sol_u(pts)
        shaped = out.reshape((4,) + t.shape)
        return shaped[0], shaped[1], shaped[2], shaped[3]

    def _shifts(self, t: Any) -> Tuple[np.ndarray, np.ndarray]:
        """Phase offsets of log(r v') and log(r|u'|), Wronskian-normalised."""
        growth = self._phase(np.clip(t, -self.half_width, self.half_width)) + 0.5 * self._phase.asymmetry
        return growth - 0.5 * self._log_w0, -growth - 0.5 * self._log_w0

    def log_v_at(self, t: Any) -> np.ndarray:
        tau_v, m_v, _, _ = self._states(t)
        return tau_v + m_v + self._shifts(t)[0]

    def log_u_at(self, t: Any) -> np.ndarray:
        _, _, tau_u, m_u = self._states(t)
        return tau_u + m_u + self._shifts(t)[1]

    def rho_at(self, t: Any) -> np.ndarray:
        """rho = u v at arbitrary points of the valid domain (NaN outside)."""
        tau_v, _, tau_u, _ = self._states(t)
        return np.exp(tau_v + tau_u - np.logaddexp(tau_v, tau_u))

    def log_rv_prime_at(self, t: Any) -> np.ndarray:
        _, m_v, _, _ = self._states(t)
        return m_v + self._shifts(t)[0]

    def log_ru_prime_abs_at(self, t: Any) -> np.ndarray:
        _, _, _, m_u = self._states(t)
        return m_u + self._shifts(t)[1]

    @property
    def rv_prime(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_v - self.log_sigma_v)

    @property
    def ru_prime(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return -np.exp(self.log_u - self.log_sigma_u)

    def flux_integral(self, a: float, b: float) -> float:
        """Integral of 1/(r rho) over [a, b] (signed)."""
        lo, hi = min(a, b), max(a, b)
        panels = max(4, int(np.ceil(hi - lo)))
        value = float(
            gauss_integrate(lambda t: 1.0 / (self.field.r(t) * self.rho_at(t)), lo, hi, panels=panels)
        )
        return value if b >= a else -value

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "x": self.grid,
                "log_v": self.log_v,
                "log_u": self.log_u,
                "rho": self.rho,
                "rv_prime": self.rv_prime,
                "ru_prime": self.ru_prime,
            },
            columns=FSS_COLUMNS,
        )

    def __repr__(self) -> str:
        return (
            f"FssProfile({self.field.spec.label}, X={self.window.half_width:g}, "
            f"reach={self.reach:g}, x0={self.x0:.6g})"
        )


def stiffness_estimate(field_: WeightField, half_width: float) -> float:
    """Integral of 2 sqrt(q/r) over [-L, L]."""
    panels = max(8, int(np.ceil(half_width)))
    with np.errstate(over="ignore"):
        value = gauss_integrate(
            lambda t: 2.0 * np.sqrt(field_.q(t) / field_.r(t)), -half_width, half_width, panels=panels
        )
    return float(value)


def compute_fss(
    field_: WeightField, window: Window, reach: float = 1.0, strict: bool = True
) -> FssProfile:
    """Build the principal pair on [-reach*X, reach*X].

    The sweeps run over the extended domain X' = extension * reach * X.

    Args:
        field_: Coefficient evaluators
        window: Truncation window
        reach: Half-width of the valid domain in units of X
        strict: Raise when the Wronskian residual exceeds its tolerance;
            otherwise keep the profile and log a warning

    Returns:
        FssProfile with x0 set

    Raises:
        FssConstructionError: If q has no mass on a half-line of the sweep
            domain, a sweep fails, the Wronskian residual is too large
            (strict only) or x0 is not unique
    """
    valid = reach * window.half_width
    extended = config.window_extension * valid

    left_mass = float(field_.Q(-extended, 0.0))
    right_mass = float(field_.Q(0.0, extended))
    if left_mass <= 0 or right_mass <= 0:
        raise FssConstructionError(
            f"{field_!r}: q has no mass on a half-line of [-{extended:g}, {extended:g}]"
        )

    stiffness = stiffness_estimate(field_, extended)
    stiff = not (stiffness <= config.stiffness_threshold)
    method = config.fss_stiff_method if stiff else config.fss_method
    logger.info(
        f"Building FSS for {field_!r} on [-{valid:g}, {valid:g}] "
        f"(sweep {extended:g}, stiffness {stiffness:.3g}, {method})"
    )

    sol_v = _sweep(field_, -extended, valid, 1.0, stiff)
    sol_u = _sweep(field_, extended, -valid, -1.0, stiff)
    fss = FssProfile(field_, window, reach, sol_v, sol_u, Phase(field_, valid, extended), method)

    if not np.all(np.isfinite(fss.rho)) or np.any(fss.rho <= 0):
        raise FssConstructionError(f"{field_!r}: rho is not positive and finite on the grid")

    if fss.wronskian_residual > config.wronskian_tol:
        message = (
            f"{field_!r}: Wronskian residual {fss.wronskian_residual:.3g} "
            f"exceeds {config.wronskian_tol:g}"
        )
        if strict:
            raise FssConstructionError(message)
        logger.warning(f"{message}; keeping rho from the Riccati variables")

    fss.x0 = find_x0(fss)
    return fss


def find_x0(fss: FssProfile) -> float:
    """Unique root of log v - log u.

    Raises:
        FssConstructionError: On zero or several sign changes across the grid
    """
    diff = fss.log_v - fss.log_u
    signs = np.sign(diff)
    nonzero = np.flatnonzero(signs != 0)
    changes = np.flatnonzero(signs[nonzero][:-1] != signs[nonzero][1:])
    if len(changes) != 1:
        raise FssConstructionError(
            f"Expected one crossing of u and v on the window, found {len(changes)}"
        )
    i, j = nonzero[changes[0]], nonzero[changes[0] + 1]
    if j > i + 1:
        # exact zeros between the two signed nodes
        return float(0.5 * (fss.grid[i + 1] + fss.grid[j - 1]))
    return float(
        brentq(
            lambda t: float(fss.log_v_at(t) - fss.log_u_at(t)),
            fss.grid[i],
            fss.grid[j],
            xtol=1e-13,
        )
    )


class GreenKernel:
    """G(x, t) = u(max(x, t)) v(min(x, t)), evaluated in log space."""

    def __init__(self, fss: FssProfile) -> None:
        self.fss = fss

    def log_value(self, x: Any, t: Any) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        return self.fss.log_u_at(np.maximum(x, t)) + self.fss.log_v_at(np.minimum(x, t))

    def __call__(self, x: Any, t: Any) -> np.ndarray:
        return np.exp(self.log_value(x, t))

    def diagonal(self, x: Any) -> np.ndarray:
        return self.fss.rho_at(x)

    def matrix(self, points: np.ndarray) -> np.ndarray:
        """Kernel on a point set; symmetric by construction."""
        points = np.asarray(points, dtype=float)
        log_u = self.fss.log_u_at(points)
        log_v = self.fss.log_v_at(points)
        upper = log_u[None, :] + log_v[:, None]
        # entry (i, j) with points[j] >= points[i] is u(points[j]) v(points[i])
        order = points[None, :] >= points[:, None]
        log_g = np.where(order, upper, upper.T)
        return np.exp(log_g)


def green_eval(fss: FssProfile, x: float, t: float) -> float:
    """G(x, t) for x, t in the valid domain.

    Raises:
        ValueError: If x or t lies outside the valid domain
    """
    for name, value in (("x", x), ("t", t)):
        if abs(value) > fss.half_width:
            raise ValueError(
                f"Green kernel argument {name}={value:g} outside [-{fss.half_width:g}, {fss.half_width:g}]"
            )
    return float(GreenKernel(fss)(x, t))


def _window_points(fss: FssProfile, count: int) -> np.ndarray:
    """Odd-sized uniform grid on the valid domain, containing 0 and +-W nodes."""
    count = count + 1 - count % 2
    return np.linspace(-fss.half_width, fss.half_width, count)


def _trend_from_logs(log_values: List[float]) -> str:
    """Trend of positive values given as logs (survives overflow)."""
    logs = np.asarray(log_values, dtype=float)
    if np.all(np.isfinite(logs)) and logs.max() > 700.0:
        steps = np.diff(logs)
        return DIVERGING if np.all(steps >= np.log(config.trend_factor)) else classify_trend(
            np.exp(logs - logs.max())
        )
    return classify_trend(np.exp(logs))


def check_wronskian(fss: FssProfile) -> Dict[str, Any]:
    """Wronskian residual against its tolerance."""
    return {
        "residual": fss.wronskian_residual,
        "tolerance": config.wronskian_tol,
        "passed": fss.wronskian_residual <= config.wronskian_tol,
    }


def check_davies_harrell(
    fss: FssProfile, nodes: Optional[int] = None, seed: Optional[int] = None
) -> Dict[str, Any]:
    """Rebuild u and v from rho and x0 at random nodes.

    u = sqrt(rho) exp(-I/2), v = sqrt(rho) exp(I/2) with I the integral of
    1/(r rho) from x0. Also reports the integrals of 1/(r rho) over [0, W]
    and [-W, 0] for the nested windows with their trends.

    Returns:
        Dict with max_residual, flux_left, flux_right and their trends
    """
    nodes = config.pairs if nodes is None else nodes
    rng = make_rng(seed)
    X = fss.window.half_width
    xs = rng.uniform(-X, X, size=nodes)

    residual = 0.0
    for x in xs:
        flux = fss.flux_integral(fss.x0, float(x))
        half_log_rho = 0.5 * np.log(float(fss.rho_at(x)))
        log_u = float(fss.log_u_at(x))
        log_v = float(fss.log_v_at(x))
        residual = max(
            residual,
            abs(np.expm1(half_log_rho - 0.5 * flux - log_u)),
            abs(np.expm1(half_log_rho + 0.5 * flux - log_v)),
        )

    windows = nested_windows(X, fss.reach)
    right = [fss.flux_integral(0.0, w) for w in windows]
    left = [fss.flux_integral(-w, 0.0) for w in windows]
    return {
        "max_residual": float(residual),
        "nodes": nodes,
        "windows": windows,
        "flux_right": right,
        "flux_left": left,
        "flux_right_trend": classify_trend(right),
        "flux_left_trend": classify_trend(left),
    }


def check_log_derivative_identities(fss: FssProfile) -> Dict[str, Any]:
    """Finite-difference check of v'/v = (1 + r rho')/(2 r rho) and
    u'/u = -(1 - r rho')/(2 r rho) at the interior grid nodes.

    Returns:
        Dict with the largest relative residual for v and for u
    """
    step = config.fd_step
    x = fss.grid[1:-1]
    r = fss.field.r(x)
    rho = fss.rho_at(x)
    rho_prime = (fss.rho_at(x + step) - fss.rho_at(x - step)) / (2 * step)
    dlog_v = (fss.log_v_at(x + step) - fss.log_v_at(x - step)) / (2 * step)
    dlog_u = (fss.log_u_at(x + step) - fss.log_u_at(x - step)) / (2 * step)

    expected_v = (1.0 + r * rho_prime) / (2 * r * rho)
    expected_u = -(1.0 - r * rho_prime) / (2 * r * rho)
    res_v = np.abs(dlog_v - expected_v) / np.abs(expected_v)
    res_u = np.abs(dlog_u - expected_u) / np.abs(expected_u)
    return {
        "max_residual_v": float(np.nanmax(res_v)),
        "max_residual_u": float(np.nanmax(res_u)),
    }


def check_rho_derivative(fss: FssProfile) -> Dict[str, Any]:
    """Sampled sup of r |rho'| against the bound 1 (with slack)."""
    step = config.fd_step
    x = fss.grid[1:-1]
    rho_prime = (fss.rho_at(x + step) - fss.rho_at(x - step)) / (2 * step)
    sup = float(np.nanmax(fss.field.r(x) * np.abs(rho_prime)))
    bound = 1.0 + config.derivative_slack
    return {"sup": sup, "bound": bound, "passed": sup < bound}


def check_fss_limits(fss: FssProfile, points: int = 4001) -> Dict[str, Any]:
    """Ratio limits of u/v and the four truncated integrals of 1/(r u^2), 1/(r v^2).

    On a finite window only trends are observable: the integrals of 1/(r u^2)
    over [-W, 0] and of 1/(r v^2) over [0, W] should settle, the other two
    should diverge.
    """
    log_ratio = fss.log_u - fss.log_v
    X = fss.window.half_width
    v_over_u_left = float(np.exp(-log_ratio[0]))
    u_over_v_right = float(np.exp(log_ratio[-1]))

    grid = _window_points(fss, points)
    log_r = np.log(fss.field.r(grid))
    log_u = fss.log_u_at(grid)
    log_v = fss.log_v_at(grid)
    zero = int(np.argmin(np.abs(grid)))
    windows = nested_windows(X, fss.reach)
    edge = [int(np.argmin(np.abs(grid - w))) for w in windows]
    mirror = [int(np.argmin(np.abs(grid + w))) for w in windows]

    integrals: Dict[str, Dict[str, Any]] = {}
    for name, log_f, side in (
        ("u_left", -log_r - 2 * log_u, "left"),
        ("v_right", -log_r - 2 * log_v, "right"),
        ("v_left", -log_r - 2 * log_v, "left"),
        ("u_right", -log_r - 2 * log_u, "right"),
    ):
        if side == "right":
            cum = log_cumulative_integral(log_f[zero:], grid[zero:])
            logs = [float(cum[i - zero]) for i in edge]
        else:
            tail = log_tail_integral(log_f[: zero + 1], grid[: zero + 1])
            logs = [float(tail[i]) for i in mirror]
        integrals[name] = {"log_values": logs, "trend": _trend_from_logs(logs)}

    return {
        "ratio_monotone": bool(np.all(np.diff(log_ratio) < 0)),
        "v_over_u_left": v_over_u_left,
        "u_over_v_right": u_over_v_right,
        "ratios_small": v_over_u_left < 1e-2 and u_over_v_right < 1e-2,
        "windows": windows,
        "integrals": integrals,
    }


def check_representation(fss: FssProfile, points: int = 4001) -> Dict[str, Any]:
    """u = v * int_x^inf dt/(r v^2) for x <= 0 and v = u * int_-inf^x dt/(r u^2)
    for x >= 0, with the integrals truncated at the edges of the valid domain.

    Returns:
        Dict with the largest relative residual on the window grid
    """
    grid = _window_points(fss, points)
    log_r = np.log(fss.field.r(grid))
    log_u = fss.log_u_at(grid)
    log_v = fss.log_v_at(grid)
    tail_v = log_tail_integral(-log_r - 2 * log_v, grid)
    cum_u = log_cumulative_integral(-log_r - 2 * log_u, grid)

    X = fss.window.half_width
    left = (grid <= 0) & (grid >= -X)
    right = (grid >= 0) & (grid <= X)
    res_u = np.abs(np.expm1(log_v[left] + tail_v[left] - log_u[left]))
    res_v = np.abs(np.expm1(log_u[right] + cum_u[right] - log_v[right]))
    return {"max_residual": float(max(res_u.max(), res_v.max()))}


def check_otelbaev(
    fss: FssProfile,
    aux: AuxProfile,
    h_eval: HEvaluator,
    probes: Optional[int] = None,
    seed: Optional[int] = None,
) -> Dict[str, Any]:
    """Two-sided estimates linking the principal pair to the auxiliary functions.

    Checks, on the samples where everything is defined:
      - h/2 <= rho <= 2h
      - 1/2 <= (r v') phi / v <= 2 and 1/2 <= (r|u'|) psi / u <= 2
      - dtilde/4 <= rho <= 3 dtilde / 2 when r = 1
      - local equivalence within d(x) (constant e^2, 4e^2 for h) and
        within s(x) (constant e) at random x and t

    Returns:
        Dict of named entries, each with the worst value and a pass flag
    """
    probes = config.probes if probes is None else probes
    rng = make_rng(seed)
    field_ = fss.field
    results: Dict[str, Any] = {}

    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = fss.rho / aux.h
        worst = np.nanmax(np.maximum(ratio / 2.0, 1.0 / (2.0 * ratio)))
    results["rho_vs_h"] = {"worst": float(worst), "passed": bool(worst <= 1.0 + 1e-6)}

    # (r v')/v = 1/sigma_v and (r|u'|)/u = 1/sigma_u
    for name, log_sigma, length in (
        ("v_flux", fss.log_sigma_v, aux.phi),
        ("u_flux", fss.log_sigma_u, aux.psi),
    ):
        with np.errstate(divide="ignore", invalid="ignore"):
            r_ratio = np.log(length) - log_sigma
        worst = float(np.nanmax(np.abs(r_ratio)))
        results[name] = {"worst": float(np.exp(worst)), "passed": worst <= np.log(2.0) + 1e-6}

    if aux.dtilde is not None:
        with np.errstate(divide="ignore", invalid="ignore"):
            q_ratio = fss.rho / aux.dtilde
        low, high = float(np.nanmin(q_ratio)), float(np.nanmax(q_ratio))
        results["rho_vs_dtilde"] = {
            "min": low,
            "max": high,
            "passed": low >= 0.25 - 1e-6 and high <= 1.5 + 1e-6,
        }

    X = fss.window.half_width
    xs = rng.uniform(-X, X, size=probes)
    d = np.asarray(solve_d(field_, h_eval, xs, strict=False))
    s = np.asarray(solve_s(fss, field_, xs, strict=False))
    for name, lengths, constant in (("local_d", d, 2.0), ("local_s", s, 1.0)):
        ok = np.isfinite(lengths)
        x_ok = xs[ok]
        t = x_ok + lengths[ok] * rng.uniform(-1.0, 1.0, size=x_ok.size)
        inside = np.abs(t) <= fss.half_width
        x_ok, t = x_ok[inside], t[inside]
        spread = max(
            float(np.max(np.abs(fss.log_v_at(t) - fss.log_v_at(x_ok)), initial=0.0)),
            float(np.max(np.abs(fss.log_u_at(t) - fss.log_u_at(x_ok)), initial=0.0)),
            float(np.max(np.abs(np.log(fss.rho_at(t) / fss.rho_at(x_ok))), initial=0.0)),
        )
        entry: Dict[str, Any] = {
            "worst_log_ratio": spread,
            "bound": constant,
            "probes": int(x_ok.size),
            "passed": spread <= constant + 1e-6,
        }
        if name == "local_d":
            h_spread = float(np.max(np.abs(np.log(h_eval(t) / h_eval(x_ok))), initial=0.0))
            entry["worst_h_log_ratio"] = h_spread
            entry["passed"] = entry["passed"] and h_spread <= np.log(4.0) + 2.0 + 1e-6
        results[name] = entry
    return results


def check_rho_bound(fss: FssProfile) -> Dict[str, Any]:
    """rho(x) <= tau R(-inf, x) R(x, inf) when 1/r is integrable.

    tau is the larger reciprocal of R(-inf, 0) and R(0, inf); the infinite
    limits are truncated at the configured default radius.

    Returns:
        Dict with applicability, tau and the largest rho / bound ratio
    """
    field_ = fss.field
    integrable = integrability_trend(field_, fss.window, "R")
    if not (integrable["left"] and integrable["right"]):
        return {"applicable": False}

    far = config.default_radius
    x = fss.grid
    tau = max(1.0 / float(field_.R(-far, 0.0)), 1.0 / float(field_.R(0.0, far)))
    bound = tau * field_.R(-far, x) * field_.R(x, far)
    worst = float(np.max(fss.rho / bound))
    return {"applicable": True, "tau": tau, "worst_ratio": worst, "passed": worst <= 1.0 + 1e-6}


def save_fss_profile(fss: FssProfile, filepath: str) -> None:
    """Write the profile as CSV with columns x, log_v, log_u, rho, rv_prime, ru_prime."""
    save_frame(fss.to_frame(), filepath)
