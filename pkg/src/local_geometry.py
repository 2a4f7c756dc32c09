#!/usr/bin/env python3
"""
Auxiliary lengths d1, d2, d, s, dtilde, mu defined by unit-level integral
equations, the derived functions phi, psi, h, and R(x, kappa)-coverings.

Every defining map F(eta) is nondecreasing in eta, so all solvers share one
vectorised bracket-and-bisect routine on the predicate F >= 1.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import brentq, minimize_scalar

from coefficient_model import WeightField, Window
from config import config
from utils import gauss_integrate_around, save_frame

logger = logging.getLogger(__name__)

# Panels per piece for integrals of h- and rho-dependent integrands
GEOMETRY_PANELS = 8

AUX_COLUMNS = ["x", "d1", "d2", "phi", "psi", "h", "d", "s", "mu", "dtilde"]


class RootNotFoundError(RuntimeError):
    """A unit-level equation has no root within the search radius."""


class WindowExhaustedError(RootNotFoundError):
    """The bracket left the domain on which the integrand is available."""


class CoveringError(RuntimeError):
    """An R(x, kappa)-chain could not be continued."""


def unit_level_root(
    func: Callable[[np.ndarray, np.ndarray], np.ndarray],
    x: Any,
    max_radius: Any,
    strict: bool = True,
    error_cls: type = RootNotFoundError,
    what: str = "F",
) -> Any:
    """Smallest eta > 0 with func(x, eta) >= 1, for every x at once.

    The bracket starts at the configured length, doubles while F < 1 and
    halves while F(lo) >= 1, then bisects on the predicate until the bracket
    is relatively narrower than the root tolerance.

    Args:
        func: Vectorised F(x, eta), nondecreasing in eta
        x: Point or array of points
        max_radius: Largest admissible eta (scalar or per point)
        strict: Raise on failure instead of returning NaN
        error_cls: Exception raised in strict mode
        what: Name of the map for messages

    Returns:
        Root (float for scalar x, array otherwise; NaN marks failures)

    Raises:
        RootNotFoundError: If strict and F stays below 1 within the radius
    """
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    xs = np.atleast_1d(x).ravel()
    radius = np.broadcast_to(np.asarray(max_radius, dtype=float), np.shape(x)).ravel().copy()
    max_iter = config.root_max_iter
    rel_tol, abs_tol = config.root_rel_tol, config.root_abs_tol

    def evaluate(idx: np.ndarray, eta: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            return np.asarray(func(xs[idx], eta), dtype=float)

    valid = radius > 0
    hi = np.minimum(np.full(xs.shape, config.initial_bracket), np.maximum(radius, 0.0))
    f_hi = np.full(xs.shape, np.nan)
    if valid.any():
        f_hi[valid] = evaluate(np.flatnonzero(valid), hi[valid])

    for _ in range(max_iter):
        grow = valid & (f_hi < 1.0) & (hi < radius)
        if not grow.any():
            break
        hi[grow] = np.minimum(2.0 * hi[grow], radius[grow])
        f_hi[grow] = evaluate(np.flatnonzero(grow), hi[grow])

    found = valid & (f_hi >= 1.0)
    lo = np.zeros(xs.shape)

    shrink = found.copy()
    for _ in range(max_iter):
        shrink &= hi > 1e-300
        if not shrink.any():
            break
        idx = np.flatnonzero(shrink)
        trial = 0.5 * hi[idx]
        above = evaluate(idx, trial) >= 1.0
        hi[idx[above]] = trial[above]
        lo[idx[~above]] = trial[~above]
        shrink[idx[~above]] = False

    active = found & ((hi - lo) > rel_tol * hi + abs_tol * np.minimum(hi, 1.0))
    for _ in range(max_iter):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        mid = 0.5 * (lo[idx] + hi[idx])
        up = evaluate(idx, mid) >= 1.0
        hi[idx[up]] = mid[up]
        lo[idx[~up]] = mid[~up]
        width = hi[idx] - lo[idx]
        active[idx] = width > rel_tol * hi[idx] + abs_tol * np.minimum(hi[idx], 1.0)

    if not found.all():
        bad = np.flatnonzero(~found)
        if strict:
            first = bad[0]
            raise error_cls(
                f"No finite root of {what} = 1 at x={xs[first]:g} "
                f"within radius {max(radius[first], 0.0):g}"
            )
        logger.debug(f"{what}: {len(bad)} of {len(xs)} points without a root")
        hi[bad] = np.nan

    if scalar:
        return float(hi[0])
    return hi.reshape(np.shape(x))


def _search_radius(window: Optional[Window]) -> float:
    return window.search_radius if window is not None else config.default_radius


def F1(field_: WeightField, x: Any, eta: Any) -> np.ndarray:
    """R(x - eta, x) * Q(x - eta, x)."""
    x = np.asarray(x, dtype=float)
    return field_.R_left(x, eta) * field_.Q_left(x, eta)


def F2(field_: WeightField, x: Any, eta: Any) -> np.ndarray:
    """R(x, x + eta) * Q(x, x + eta)."""
    x = np.asarray(x, dtype=float)
    return field_.R_right(x, eta) * field_.Q_right(x, eta)


def F_d(field_: WeightField, h_eval: "HEvaluator", x: Any, eta: Any) -> np.ndarray:
    """Integral of 1/(r h) over [x - eta, x + eta]."""
    return gauss_integrate_around(
        lambda t: 1.0 / (field_.r(t) * h_eval(t)), x, eta, panels=GEOMETRY_PANELS
    )


def F_mu(field_: WeightField, h_eval: "HEvaluator", x: Any, eta: Any) -> np.ndarray:
    """Integral of q h over [x - eta, x + eta]."""
    return gauss_integrate_around(lambda t: field_.q(t) * h_eval(t), x, eta, panels=GEOMETRY_PANELS)


def F_s(fss: Any, field_: WeightField, x: Any, eta: Any) -> np.ndarray:
    """Integral of 1/(r rho) over [x - eta, x + eta]."""
    return gauss_integrate_around(
        lambda t: 1.0 / (field_.r(t) * fss.rho_at(t)), x, eta, panels=GEOMETRY_PANELS
    )


def F_dtilde(field_: WeightField, x: Any, eta: Any) -> np.ndarray:
    """eta * Q(x - eta, x + eta) / 2."""
    return 0.5 * np.asarray(eta, dtype=float) * field_.Q_around(x, eta)


def solve_d1(
    field_: WeightField, x: Any, window: Optional[Window] = None, strict: bool = True
) -> Any:
    """Left length d1(x): R(x - d, x) * Q(x - d, x) = 1.

    Args:
        field_: Coefficient evaluators
        x: Point or array of points
        window: Truncation window fixing the search radius (8X)
        strict: Raise on failure instead of returning NaN

    Returns:
        d1(x)

    Raises:
        RootNotFoundError: If the product stays below 1 within the radius
    """
    return unit_level_root(
        lambda xs, eta: F1(field_, xs, eta), x, _search_radius(window), strict, what="F1"
    )


def solve_d2(
    field_: WeightField, x: Any, window: Optional[Window] = None, strict: bool = True
) -> Any:
    """Right length d2(x): R(x, x + d) * Q(x, x + d) = 1."""
    return unit_level_root(
        lambda xs, eta: F2(field_, xs, eta), x, _search_radius(window), strict, what="F2"
    )


def compute_phi_psi_h(
    field_: WeightField,
    x: Any,
    window: Optional[Window] = None,
    strict: bool = True,
    d1: Any = None,
    d2: Any = None,
) -> Tuple[Any, Any, Any]:
    """phi = R(x - d1, x), psi = R(x, x + d2) and their harmonic mean h.

    Also checks h = 1 / Q(x - d1, x + d2) to relative 1e-6 and logs a
    warning where it fails.

    Args:
        field_: Coefficient evaluators
        x: Point or array of points
        window: Truncation window fixing the search radius
        strict: Raise on failure instead of returning NaN
        d1: Already solved d1 at x (solved here when omitted)
        d2: Already solved d2 at x (solved here when omitted)

    Returns:
        (phi, psi, h), scalars for scalar x

    Raises:
        RootNotFoundError: If d1 or d2 has no root
    """
    x_arr = np.asarray(x, dtype=float)
    if d1 is None:
        d1 = solve_d1(field_, x_arr, window, strict)
    if d2 is None:
        d2 = solve_d2(field_, x_arr, window, strict)
    d1 = np.asarray(d1, dtype=float)
    d2 = np.asarray(d2, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        phi = np.asarray(field_.R_left(x_arr, d1), dtype=float)
        psi = np.asarray(field_.R_right(x_arr, d2), dtype=float)
        h = phi * psi / (phi + psi)
        mass = field_.Q_left(x_arr, d1) + field_.Q_right(x_arr, d2)
        identity = 1.0 / np.asarray(mass, dtype=float)
        mismatch = np.abs(h - identity) > 1e-6 * np.abs(identity)
    mismatch &= np.isfinite(h)
    if np.any(mismatch):
        logger.warning(
            f"{field_!r}: h differs from 1/Q(x-d1, x+d2) at {int(np.sum(mismatch))} points"
        )
    if x_arr.ndim == 0:
        return float(phi), float(psi), float(h)
    return phi, psi, h


class HEvaluator:
    """h, phi and psi tabulated on [-L, L] with log-linear interpolation.

    Evaluation outside the table, or where d1/d2 failed, gives NaN.
    """

    def __init__(self, grid: np.ndarray, phi: np.ndarray, psi: np.ndarray, h: np.ndarray) -> None:
        self.grid = grid
        with np.errstate(divide="ignore", invalid="ignore"):
            self._log_phi = np.log(phi)
            self._log_psi = np.log(psi)
            self._log_h = np.log(h)
        self.failed = int(np.sum(~np.isfinite(h)))

    @property
    def half_width(self) -> float:
        return float(self.grid[-1])

    def _interp(self, log_values: np.ndarray, t: Any) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.exp(np.interp(t, self.grid, log_values, left=np.nan, right=np.nan))

    def __call__(self, t: Any) -> np.ndarray:
        return self._interp(self._log_h, t)

    def phi(self, t: Any) -> np.ndarray:
        return self._interp(self._log_phi, t)

    def psi(self, t: Any) -> np.ndarray:
        return self._interp(self._log_psi, t)

    def room(self, x: Any) -> np.ndarray:
        """Largest eta with [x - eta, x + eta] inside the table."""
        return self.half_width - np.abs(np.asarray(x, dtype=float))


def build_h_evaluator(
    field_: WeightField, window: Window, points: Optional[int] = None
) -> HEvaluator:
    """Tabulate phi, psi, h on [-8X, 8X].

    Args:
        field_: Coefficient evaluators
        window: Truncation window (X)
        points: Table size (default from config)

    Returns:
        HEvaluator
    """
    points = config.h_grid_points if points is None else points
    reach = window.search_radius
    grid = np.linspace(-reach, reach, points)
    d1 = solve_d1(field_, grid, strict=False, window=window.scaled(2.0))
    d2 = solve_d2(field_, grid, strict=False, window=window.scaled(2.0))
    with np.errstate(over="ignore", invalid="ignore"):
        phi = field_.R_left(grid, d1)
        psi = field_.R_right(grid, d2)
        h = phi * psi / (phi + psi)
    evaluator = HEvaluator(grid, phi, psi, h)
    if evaluator.failed:
        logger.warning(f"{field_!r}: h undefined at {evaluator.failed} of {points} table nodes")
    logger.debug(f"Tabulated h on [-{reach:g}, {reach:g}] with {points} nodes")
    return evaluator


def solve_d(field_: WeightField, h_eval: HEvaluator, x: Any, strict: bool = True) -> Any:
    """Length d(x): integral of 1/(r h) over [x - d, x + d] equals 1.

    Raises:
        WindowExhaustedError: If the bracket leaves the tabulated range of h
    """

    def integral(xs: np.ndarray, eta: np.ndarray) -> np.ndarray:
        return F_d(field_, h_eval, xs, eta)

    return unit_level_root(integral, x, h_eval.room(x), strict, WindowExhaustedError, "F3")


def solve_mu(field_: WeightField, h_eval: HEvaluator, x: Any, strict: bool = True) -> Any:
    """Length mu(x): the smallest eta with integral of q h over [x - eta, x + eta] = 1.

    Raises:
        WindowExhaustedError: If the bracket leaves the tabulated range of h
    """

    def integral(xs: np.ndarray, eta: np.ndarray) -> np.ndarray:
        return F_mu(field_, h_eval, xs, eta)

    return unit_level_root(integral, x, h_eval.room(x), strict, WindowExhaustedError, "mu-map")


def solve_s(fss: Any, field_: WeightField, x: Any, strict: bool = True) -> Any:
    """Length s(x): integral of 1/(r rho) over [x - s, x + s] equals 1.

    Args:
        fss: Principal-solution profile exposing ``rho_at`` and ``half_width``
        field_: Coefficient evaluators
        x: Point or array of points
        strict: Raise on failure instead of returning NaN

    Raises:
        WindowExhaustedError: If the bracket leaves the domain of rho
    """

    def integral(xs: np.ndarray, eta: np.ndarray) -> np.ndarray:
        return F_s(fss, field_, xs, eta)

    room = fss.half_width - np.abs(np.asarray(x, dtype=float))
    return unit_level_root(integral, x, room, strict, WindowExhaustedError, "F-rho")


def solve_dtilde(
    field_: WeightField, x: Any, window: Optional[Window] = None, strict: bool = True
) -> Any:
    """Length dtilde(x) for r = 1: d * Q(x - d, x + d) = 2.

    Raises:
        ValueError: If r is not identically one on the window grid
        RootNotFoundError: If no root lies within the search radius
    """
    grid = (window or Window(config.default_half_width, config.default_samples)).grid
    deviation = float(np.max(np.abs(field_.r(grid) - 1.0)))
    if deviation > 1e-12:
        raise ValueError(f"dtilde needs r identically one; {field_!r} deviates by {deviation:.3g}")

    def level(xs: np.ndarray, eta: np.ndarray) -> np.ndarray:
        return F_dtilde(field_, xs, eta)

    return unit_level_root(level, x, _search_radius(window), strict, what="dtilde-map")


@dataclass
class AuxProfile:
    """Auxiliary functions sampled on a window grid (NaN where undefined)."""

    x: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    phi: np.ndarray
    psi: np.ndarray
    h: np.ndarray
    d: np.ndarray
    mu: np.ndarray
    s: Optional[np.ndarray] = None
    dtilde: Optional[np.ndarray] = None
    failures: Dict[str, int] = field(default_factory=dict)

    @property
    def phi_psi_ratio(self) -> float:
        """Largest of phi/psi and psi/phi over the samples."""
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.maximum(self.phi / self.psi, self.psi / self.phi)
        ratio = ratio[np.isfinite(ratio)]
        return float(np.max(ratio)) if ratio.size else float("nan")

    @property
    def mu_conditional(self) -> bool:
        """True when phi and psi are too far apart for mu-based outputs."""
        ratio = self.phi_psi_ratio
        return not (ratio <= config.phi_psi_ratio_limit)

    def to_frame(self) -> pd.DataFrame:
        nan = np.full(self.x.shape, np.nan)
        columns = {
            "x": self.x,
            "d1": self.d1,
            "d2": self.d2,
            "phi": self.phi,
            "psi": self.psi,
            "h": self.h,
            "d": self.d,
            "s": nan if self.s is None else self.s,
            "mu": self.mu,
            "dtilde": nan if self.dtilde is None else self.dtilde,
        }
        return pd.DataFrame(columns, columns=AUX_COLUMNS)


def _count_failures(name: str, values: np.ndarray, failures: Dict[str, int]) -> None:
    bad = int(np.sum(~np.isfinite(values)))
    if bad:
        failures[name] = bad
        logger.warning(f"{name} undefined at {bad} of {values.size} samples")


def build_aux_profile(
    field_: WeightField,
    window: Window,
    h_eval: Optional[HEvaluator] = None,
    fss: Any = None,
) -> AuxProfile:
    """Evaluate every auxiliary function on the window grid.

    Failed samples are stored as NaN and counted in ``failures``.

    Args:
        field_: Coefficient evaluators
        window: Truncation window
        h_eval: Tabulated h (built when omitted)
        fss: Principal-solution profile; fills s when given

    Returns:
        AuxProfile
    """
    x = window.grid
    h_eval = build_h_evaluator(field_, window) if h_eval is None else h_eval
    failures: Dict[str, int] = {}

    d1 = solve_d1(field_, x, window, strict=False)
    d2 = solve_d2(field_, x, window, strict=False)
    phi, psi, h = compute_phi_psi_h(field_, x, window, strict=False, d1=d1, d2=d2)
    d = solve_d(field_, h_eval, x, strict=False)
    mu = solve_mu(field_, h_eval, x, strict=False)
    for name, values in (("d1", d1), ("d2", d2), ("h", h), ("d", d), ("mu", mu)):
        _count_failures(name, values, failures)

    aux = AuxProfile(x=x, d1=d1, d2=d2, phi=phi, psi=psi, h=h, d=d, mu=mu, failures=failures)
    if field_.unit_r:
        aux.dtilde = solve_dtilde(field_, x, window, strict=False)
        _count_failures("dtilde", aux.dtilde, failures)
    if fss is not None:
        attach_s(aux, fss, field_)
    logger.info(f"Auxiliary profile for {field_!r} on {window.samples} samples")
    return aux


def attach_s(aux: AuxProfile, fss: Any, field_: WeightField) -> AuxProfile:
    """Fill s(x) once the principal solutions are known."""
    aux.s = solve_s(fss, field_, aux.x, strict=False)
    _count_failures("s", aux.s, aux.failures)
    return aux


def save_aux_profile(aux: AuxProfile, filepath: str) -> None:
    """Write the profile as CSV (empty cells where undefined)."""
    save_frame(aux.to_frame(), filepath)


@dataclass
class Covering:
    """Chain of segments [x_n - kappa(x_n), x_n + kappa(x_n)] starting at ``origin``.

    Forward segments run rightwards from the origin, backward ones leftwards;
    consecutive endpoints are shared exactly.
    """

    origin: float
    kind: str
    forward_centers: List[float]
    forward: List[Tuple[float, float]]
    backward_centers: List[float]
    backward: List[Tuple[float, float]]

    @property
    def segments(self) -> List[Tuple[float, float]]:
        """All segments ordered left to right."""
        return list(reversed(self.backward)) + list(self.forward)

    @property
    def centers(self) -> List[float]:
        return list(reversed(self.backward_centers)) + list(self.forward_centers)

    def chaining_residual(self) -> float:
        """Largest gap between consecutive segment endpoints."""
        segs = self.segments
        gaps = [abs(a[1] - b[0]) for a, b in zip(segs[:-1], segs[1:])]
        return max(gaps) if gaps else 0.0

    def covers(self, window: Window) -> bool:
        segs = self.segments
        return bool(segs) and segs[0][0] <= -window.half_width and segs[-1][1] >= window.half_width

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {"n": -(i + 1), "center": c, "left": lo, "right": hi}
            for i, (c, (lo, hi)) in enumerate(zip(self.backward_centers, self.backward))
        ]
        rows.reverse()
        rows += [
            {"n": i + 1, "center": c, "left": lo, "right": hi}
            for i, (c, (lo, hi)) in enumerate(zip(self.forward_centers, self.forward))
        ]
        return pd.DataFrame(rows, columns=["n", "center", "left", "right"])


def _next_center(
    kappa: Callable[[Any], Any], start: float, direction: float, limit: float
) -> float:
    """Solve t - direction * kappa(t) = start for t on the side ``direction``."""

    def gap(t: float) -> float:
        return direction * (t - start) - float(kappa(t))

    k0 = float(kappa(start))
    if not np.isfinite(k0) or k0 <= 0:
        raise CoveringError(f"kappa is not positive at {start:g}: {k0}")
    step = k0
    far = start + direction * step
    while gap(far) < 0:
        step *= 2.0
        if step > limit:
            raise CoveringError(f"Cannot bracket the next center after {start:g} within {limit:g}")
        far = start + direction * step
    g_far = gap(far)
    if not np.isfinite(g_far):
        raise CoveringError(f"kappa undefined near {far:g}")
    lo, hi = (start, far) if direction > 0 else (far, start)
    return float(brentq(gap, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps))


def build_covering(
    kappa: Callable[[Any], Any], x: float, window: Window, kind: str = "d"
) -> Covering:
    """Build the R(x, kappa)-chain covering the window.

    The first forward center solves x1 - kappa(x1) = x, giving the segment
    [x, x1 + kappa(x1)]; each next segment starts at the previous right end.
    The backward chain is the mirror image. Chains stop once past the edge.

    Args:
        kappa: Positive, continuous length function (e.g. d or s)
        x: Origin
        window: Window to cover
        kind: Label of kappa ("d" or "s")

    Returns:
        Covering

    Raises:
        CoveringError: If kappa is not usable or the chain does not close
    """
    X = window.half_width
    limit = window.search_radius
    max_segments = config.max_segments

    forward_centers: List[float] = []
    forward: List[Tuple[float, float]] = []
    left = float(x)
    while left < X:
        if len(forward) >= max_segments:
            raise CoveringError(f"Forward chain from {x:g} exceeded {max_segments} segments")
        center = _next_center(kappa, left, 1.0, limit)
        right = center + float(kappa(center))
        if not right > left:
            raise CoveringError(f"Degenerate segment at {center:g}")
        forward_centers.append(center)
        forward.append((left, right))
        left = right

    backward_centers: List[float] = []
    backward: List[Tuple[float, float]] = []
    right = float(x)
    while right > -X:
        if len(backward) >= max_segments:
            raise CoveringError(f"Backward chain from {x:g} exceeded {max_segments} segments")
        center = _next_center(kappa, right, -1.0, limit)
        left = center - float(kappa(center))
        if not left < right:
            raise CoveringError(f"Degenerate segment at {center:g}")
        backward_centers.append(center)
        backward.append((left, right))
        right = left

    logger.info(
        f"Covering of kind {kind} from {x:g}: {len(forward)} forward, {len(backward)} backward"
    )
    return Covering(float(x), kind, forward_centers, forward, backward_centers, backward)


def _sup_abs(func: Callable[[np.ndarray], np.ndarray], radius: float) -> float:
    """sup of |func(t)| over |t| <= radius: uniform probes plus bounded refinement."""
    probes = np.linspace(-radius, radius, config.sup_probes)
    values = np.abs(func(probes))
    best = int(np.argmax(values))
    step = probes[1] - probes[0]
    lo = max(-radius, probes[best] - step)
    hi = min(radius, probes[best] + step)
    refined = minimize_scalar(
        lambda t: -float(np.abs(func(np.array([t])))[0]), bounds=(lo, hi), method="bounded"
    )
    return float(max(values[best], -refined.fun))


def smooth_asymptotics(field_: WeightField, x: float) -> Tuple[float, float, float]:
    """dhat = sqrt(r/q) with the local oscillation measures kappa1 and kappa2.

    kappa1 = sup |1 - r(x)/r(x+t)| and kappa2 = sup |q(x+t) - q(x)| / q(x),
    both over |t| <= 80 dhat(x).

    Raises:
        ValueError: For tabulated coefficients or q(x) = 0
    """
    if not field_.smooth:
        raise ValueError(f"Smooth asymptotics unsupported for preset {field_.spec.kind}")
    r0 = float(field_.r(x))
    q0 = float(field_.q(x))
    if q0 <= 0:
        raise ValueError(f"Smooth asymptotics need q(x) > 0, got q({x:g}) = {q0}")
    dhat = float(np.sqrt(r0 / q0))
    radius = config.sup_radius * dhat
    if field_.unit_r:
        kappa1 = 0.0
    else:
        kappa1 = _sup_abs(lambda t: 1.0 - r0 / field_.r(x + t), radius)
    kappa2 = _sup_abs(lambda t: (field_.q(x + t) - q0) / q0, radius)
    return dhat, kappa1, kappa2


def smooth_limit_ratios(
    field_: WeightField, x: Any, window: Optional[Window] = None
) -> Dict[str, Any]:
    """Ratios that tend to 1 (and h*sqrt(rq) to 1/2) for smooth coefficients.

    Returns:
        Dict with d1/dhat, d2/dhat, phi*sqrt(rq), psi*sqrt(rq), h*sqrt(rq)
    """
    x_arr = np.asarray(x, dtype=float)
    r = field_.r(x_arr)
    q = field_.q(x_arr)
    dhat = np.sqrt(r / q)
    scale = np.sqrt(r * q)
    d1 = solve_d1(field_, x_arr, window, strict=False)
    d2 = solve_d2(field_, x_arr, window, strict=False)
    phi, psi, h = compute_phi_psi_h(field_, x_arr, window, strict=False, d1=d1, d2=d2)
    return {
        "d1/dhat": d1 / dhat,
        "d2/dhat": d2 / dhat,
        "phi*sqrt(rq)": phi * scale,
        "psi*sqrt(rq)": psi * scale,
        "h*sqrt(rq)": h * scale,
    }
