#!/usr/bin/env python3
"""
Coefficient pair (r, q) of -(r y')' + q y = f: presets, tabulated input,
interval integrals R(a, b) and Q(a, b), and numerical hypothesis checks.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np
import pandas as pd
from scipy.integrate import quad

from config import config
from utils import DIVERGING, VANISHING, classify_trend, nested_windows

logger = logging.getLogger(__name__)

KINDS = ("constant", "exponential", "polynomial", "tabulated")

# Parameter names accepted per kind, with defaults
_PARAMS: Dict[str, Dict[str, float]] = {
    "constant": {"r0": 1.0, "q0": 1.0},
    "exponential": {"alpha": 0.0, "beta": 0.0},
    "polynomial": {"k": 1.0},
    "tabulated": {},
}


@dataclass(frozen=True)
class CoefficientSpec:
    """Declarative description of a coefficient pair.

    Attributes:
        kind: One of "constant", "exponential", "polynomial", "tabulated"
        params: Real parameters of the preset (r0/q0, alpha/beta, k)
        path: CSV path for the tabulated kind
    """

    kind: str
    params: Dict[str, float] = field(default_factory=dict)
    path: Optional[str] = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"Unknown coefficient kind '{self.kind}', expected one of {KINDS}")
        unknown = set(self.params) - set(_PARAMS[self.kind])
        if unknown:
            raise ValueError(f"Unknown parameters for kind '{self.kind}': {sorted(unknown)}")
        if self.kind == "tabulated" and not self.path:
            raise ValueError("Tabulated coefficients need a 'path' to a CSV table")

    def param(self, name: str) -> float:
        """Parameter value, falling back to the preset default."""
        return float(self.params.get(name, _PARAMS[self.kind][name]))

    @property
    def label(self) -> str:
        """Short human-readable name, e.g. 'exponential(-1,1)'."""
        if self.kind == "constant":
            return f"constant({self.param('r0'):g},{self.param('q0'):g})"
        if self.kind == "exponential":
            return f"exponential({self.param('alpha'):g},{self.param('beta'):g})"
        if self.kind == "polynomial":
            return f"polynomial(k={self.param('k'):g})"
        return f"tabulated({Path(self.path or '').name})"

    @classmethod
    def constant(cls, r0: float = 1.0, q0: float = 1.0) -> "CoefficientSpec":
        return cls("constant", {"r0": r0, "q0": q0})

    @classmethod
    def exponential(cls, alpha: float, beta: float) -> "CoefficientSpec":
        return cls("exponential", {"alpha": alpha, "beta": beta})

    @classmethod
    def polynomial(cls, k: int = 1) -> "CoefficientSpec":
        return cls("polynomial", {"k": float(k)})

    @classmethod
    def tabulated(cls, path: str) -> "CoefficientSpec":
        return cls("tabulated", {}, path=str(path))


@dataclass(frozen=True)
class Window:
    """Truncation [-X, X] of the real line with N uniform samples."""

    half_width: float
    samples: int

    def __post_init__(self) -> None:
        if not np.isfinite(self.half_width) or self.half_width <= 0:
            raise ValueError(f"Window half-width must be positive, got {self.half_width}")
        if int(self.samples) != self.samples or self.samples < 3:
            raise ValueError(f"Window needs at least 3 samples, got {self.samples}")

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(-self.half_width, self.half_width, int(self.samples))

    @property
    def search_radius(self) -> float:
        """Largest bracket any unit-level solver may reach."""
        return config.radius_factor * self.half_width

    def scaled(self, factor: float) -> "Window":
        """Same sample count on a window ``factor`` times wider."""
        return Window(self.half_width * factor, self.samples)


@dataclass
class HypothesisReport:
    """Numerical evidence for r > 0, q >= 0, the mass condition and growth of F."""

    r_positive: bool
    q_nonnegative: bool
    left_mass: float
    right_mass: float
    growth_trends: Dict[str, str]
    growth_values: Dict[str, List[float]]

    @property
    def mass_condition(self) -> bool:
        """Both half-line masses of q beyond the window edges are positive."""
        return self.left_mass > 0.0 and self.right_mass > 0.0

    @property
    def growth_diverging(self) -> bool:
        return all(t == DIVERGING for t in self.growth_trends.values())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "r_positive": self.r_positive,
            "q_nonnegative": self.q_nonnegative,
            "left_mass": self.left_mass,
            "right_mass": self.right_mass,
            "mass_condition": self.mass_condition,
            "growth_trends": dict(self.growth_trends),
            "growth_values": {k: list(v) for k, v in self.growth_values.items()},
        }


def _exp_abs_integral(c: float, a: Any, b: Any) -> np.ndarray:
    """Integral of e^{c|t|} over [a, b], without cancellation.

    Same-sign intervals use e^{c*lo}*expm1(c*len)/c; intervals straddling 0 are
    split into two positive parts.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if c == 0.0:
        return b - a

    def positive_part(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        # 0 <= lo <= hi
        return np.exp(c * lo) * np.expm1(c * (hi - lo)) / c

    with np.errstate(over="ignore", invalid="ignore"):
        right = positive_part(np.maximum(a, 0.0), np.maximum(b, 0.0))
        left = positive_part(np.maximum(-b, 0.0), np.maximum(-a, 0.0))
    return right + left


def _exp_abs_left(c: float, x: Any, eta: Any) -> np.ndarray:
    """Integral of e^{c|t|} over [x - eta, x], accurate for eta << |x|."""
    x = np.asarray(x, dtype=float)
    eta = np.asarray(eta, dtype=float)
    if c == 0.0:
        return eta + 0.0 * x
    with np.errstate(over="ignore", invalid="ignore"):
        positive = -np.exp(c * x) * np.expm1(-c * eta) / c
        negative = np.exp(-c * x) * np.expm1(c * eta) / c
        straddle = _exp_abs_integral(c, x - eta, x)
    return np.where(x - eta >= 0, positive, np.where(x <= 0, negative, straddle))


class WeightField:
    """Evaluators r(x), q(x) and interval integrals R(a,b), Q(a,b).

    Subclasses provide closed-form antiderivatives; every field also exposes
    adaptive-quadrature integrals for cross-checking. Fields are immutable.
    """

    kinks: tuple = (0.0,)
    smooth: bool = True

    def __init__(self, spec: CoefficientSpec) -> None:
        self.spec = spec

    def r(self, x: Any) -> np.ndarray:
        raise NotImplementedError

    def q(self, x: Any) -> np.ndarray:
        raise NotImplementedError

    def R(self, a: Any, b: Any) -> np.ndarray:
        """Integral of 1/r over [a, b]."""
        raise NotImplementedError

    def Q(self, a: Any, b: Any) -> np.ndarray:
        """Integral of q over [a, b]."""
        raise NotImplementedError

    @property
    def unit_r(self) -> bool:
        """True when r is identically one."""
        return False

    # Offset forms R(x - eta, x), R(x, x + eta), ... for eta far below |x|
    def R_left(self, x: Any, eta: Any) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.R(x - eta, x)

    def R_right(self, x: Any, eta: Any) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.R(x, x + eta)

    def Q_left(self, x: Any, eta: Any) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.Q(x - eta, x)

    def Q_right(self, x: Any, eta: Any) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.Q(x, x + eta)

    def Q_around(self, x: Any, eta: Any) -> np.ndarray:
        """Q(x - eta, x + eta)."""
        return self.Q_left(x, eta) + self.Q_right(x, eta)

    def _quad(self, func: Callable[[float], float], a: float, b: float) -> float:
        points = [p for p in self.kinks if a < p < b]
        value, _ = quad(
            func,
            a,
            b,
            epsabs=config.quad_abs_tol,
            epsrel=config.quad_rel_tol,
            limit=200,
            points=points or None,
        )
        return float(value)

    def R_quad(self, a: float, b: float) -> float:
        """Adaptive-quadrature value of R(a, b)."""
        return self._quad(lambda t: 1.0 / float(self.r(t)), a, b)

    def Q_quad(self, a: float, b: float) -> float:
        """Adaptive-quadrature value of Q(a, b)."""
        return self._quad(lambda t: float(self.q(t)), a, b)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.spec.label})"


class ConstantField(WeightField):
    """r = r0, q = q0."""

    kinks = ()

    def __init__(self, spec: CoefficientSpec) -> None:
        super().__init__(spec)
        self.r0 = spec.param("r0")
        self.q0 = spec.param("q0")
        if not self.r0 > 0:
            raise ValueError(f"Invalid coefficient: r0 must be positive, got {self.r0}")
        if not self.q0 >= 0:
            raise ValueError(f"Invalid coefficient: q0 must be nonnegative, got {self.q0}")

    def r(self, x: Any) -> np.ndarray:
        return np.full(np.shape(x), self.r0)

    def q(self, x: Any) -> np.ndarray:
        return np.full(np.shape(x), self.q0)

    def R(self, a: Any, b: Any) -> np.ndarray:
        return (np.asarray(b, dtype=float) - np.asarray(a, dtype=float)) / self.r0

    def Q(self, a: Any, b: Any) -> np.ndarray:
        return self.q0 * (np.asarray(b, dtype=float) - np.asarray(a, dtype=float))

    def R_left(self, x: Any, eta: Any) -> np.ndarray:
        return np.broadcast_to(np.asarray(eta, dtype=float) / self.r0, np.broadcast(x, eta).shape)

    R_right = R_left

    def Q_left(self, x: Any, eta: Any) -> np.ndarray:
        return np.broadcast_to(self.q0 * np.asarray(eta, dtype=float), np.broadcast(x, eta).shape)

    Q_right = Q_left

    @property
    def unit_r(self) -> bool:
        return self.r0 == 1.0


class ExponentialField(WeightField):
    """r = e^{alpha|x|}, q = e^{beta|x|}."""

    def __init__(self, spec: CoefficientSpec) -> None:
        super().__init__(spec)
        self.alpha = spec.param("alpha")
        self.beta = spec.param("beta")

    def r(self, x: Any) -> np.ndarray:
        return np.exp(self.alpha * np.abs(np.asarray(x, dtype=float)))

    def q(self, x: Any) -> np.ndarray:
        return np.exp(self.beta * np.abs(np.asarray(x, dtype=float)))

    def R(self, a: Any, b: Any) -> np.ndarray:
        return _exp_abs_integral(-self.alpha, a, b)

    def Q(self, a: Any, b: Any) -> np.ndarray:
        return _exp_abs_integral(self.beta, a, b)

    def R_left(self, x: Any, eta: Any) -> np.ndarray:
        return _exp_abs_left(-self.alpha, x, eta)

    def R_right(self, x: Any, eta: Any) -> np.ndarray:
        return _exp_abs_left(-self.alpha, -np.asarray(x, dtype=float), eta)

    def Q_left(self, x: Any, eta: Any) -> np.ndarray:
        return _exp_abs_left(self.beta, x, eta)

    def Q_right(self, x: Any, eta: Any) -> np.ndarray:
        return _exp_abs_left(self.beta, -np.asarray(x, dtype=float), eta)

    @property
    def unit_r(self) -> bool:
        return self.alpha == 0.0


class PolynomialField(WeightField):
    """r = 1, q = 1 + x^{2k}."""

    kinks = ()

    def __init__(self, spec: CoefficientSpec) -> None:
        super().__init__(spec)
        k = spec.param("k")
        if k != int(k) or k < 1:
            raise ValueError(f"Invalid coefficient: k must be a positive integer, got {k}")
        self.power = 2 * int(k)

    def r(self, x: Any) -> np.ndarray:
        return np.ones(np.shape(x))

    def q(self, x: Any) -> np.ndarray:
        return 1.0 + np.asarray(x, dtype=float) ** self.power

    def R(self, a: Any, b: Any) -> np.ndarray:
        return np.asarray(b, dtype=float) - np.asarray(a, dtype=float)

    def R_left(self, x: Any, eta: Any) -> np.ndarray:
        return np.broadcast_to(np.asarray(eta, dtype=float), np.broadcast(x, eta).shape)

    R_right = R_left

    def Q(self, a: Any, b: Any) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        m = self.power + 1
        return (b - a) + (b**m - a**m) / m

    @property
    def unit_r(self) -> bool:
        return True


class TabulatedField(WeightField):
    """Piecewise-linear r and q through a table, constant beyond its ends.

    R and Q are exact integrals of the interpolants (the trapezoid rule for q,
    a per-segment logarithm for 1/r), accumulated at the nodes so that
    additivity holds to rounding.
    """

    smooth = False

    def __init__(self, spec: CoefficientSpec, table: pd.DataFrame) -> None:
        super().__init__(spec)
        self.x = table["x"].to_numpy(dtype=float)
        self.r_nodes = table["r"].to_numpy(dtype=float)
        self.q_nodes = table["q"].to_numpy(dtype=float)
        self.kinks = tuple(self.x)
        self._warned = False

        self._cum_R = np.concatenate(
            [[0.0], np.cumsum(self._segment_R(np.arange(len(self.x) - 1), np.diff(self.x)))]
        )
        self._cum_Q = np.concatenate(
            [[0.0], np.cumsum(0.5 * (self.q_nodes[:-1] + self.q_nodes[1:]) * np.diff(self.x))]
        )

    def _note_extrapolation(self, x: np.ndarray) -> None:
        if not self._warned and (np.any(x < self.x[0]) or np.any(x > self.x[-1])):
            logger.warning(
                f"Extrapolating tabulated coefficients beyond [{self.x[0]}, {self.x[-1]}] "
                f"by constant continuation"
            )
            self._warned = True

    def r(self, x: Any) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        self._note_extrapolation(x)
        return np.interp(x, self.x, self.r_nodes)

    def q(self, x: Any) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        self._note_extrapolation(x)
        return np.interp(x, self.x, self.q_nodes)

    def _segment_R(self, idx: np.ndarray, delta: np.ndarray) -> np.ndarray:
        """Integral of 1/r from node idx to node idx + delta (inside segment idx)."""
        r0 = self.r_nodes[idx]
        slope = (self.r_nodes[idx + 1] - self.r_nodes[idx]) / (self.x[idx + 1] - self.x[idx])
        z = slope * delta / r0
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(np.abs(z) < 1e-10, 1.0 - 0.5 * z, np.log1p(z) / z)
        return delta / r0 * ratio

    def _antiderivative(self, x: Any, which: str) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        self._note_extrapolation(x)
        xs = self.x
        inside = np.clip(x, xs[0], xs[-1])
        idx = np.clip(np.searchsorted(xs, inside, side="right") - 1, 0, len(xs) - 2)
        delta = inside - xs[idx]
        if which == "R":
            value = self._cum_R[idx] + self._segment_R(idx, delta)
            below = (x - xs[0]) / self.r_nodes[0]
            above = (x - xs[-1]) / self.r_nodes[-1]
        else:
            slope = (self.q_nodes[idx + 1] - self.q_nodes[idx]) / (xs[idx + 1] - xs[idx])
            value = self._cum_Q[idx] + self.q_nodes[idx] * delta + 0.5 * slope * delta**2
            below = (x - xs[0]) * self.q_nodes[0]
            above = (x - xs[-1]) * self.q_nodes[-1]
        value = np.where(x < xs[0], below, value)
        return np.where(x > xs[-1], value + above, value)

    def R(self, a: Any, b: Any) -> np.ndarray:
        return self._antiderivative(b, "R") - self._antiderivative(a, "R")

    def Q(self, a: Any, b: Any) -> np.ndarray:
        return self._antiderivative(b, "Q") - self._antiderivative(a, "Q")

    @property
    def unit_r(self) -> bool:
        return bool(np.all(np.abs(self.r_nodes - 1.0) <= 1e-12))


def load_table(path: str) -> pd.DataFrame:
    """Read and validate a 3-column coefficient table ``x,r,q``.

    Args:
        path: CSV file with a header row

    Returns:
        DataFrame with float columns x, r, q

    Raises:
        FileNotFoundError: If the file doesn't exist
        ValueError: If the table is malformed or violates r > 0, q >= 0
    """
    table_path = Path(path)
    if not table_path.exists():
        raise FileNotFoundError(f"Coefficient table not found: {path}")

    try:
        table = pd.read_csv(table_path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise ValueError(f"Malformed table {path}: {e}")

    table.columns = [str(c).strip().lower() for c in table.columns]
    missing = [c for c in ("x", "r", "q") if c not in table.columns]
    if missing:
        raise ValueError(f"Malformed table {path}: missing columns {missing}")
    try:
        table = table[["x", "r", "q"]].astype(float)
    except ValueError as e:
        raise ValueError(f"Malformed table {path}: non-numeric entries ({e})")

    if len(table) < 3:
        raise ValueError(f"Malformed table {path}: need at least 3 rows, got {len(table)}")
    if not np.all(np.diff(table["x"].to_numpy()) > 0):
        raise ValueError(f"Malformed table {path}: x column must be strictly increasing")
    bad_r = table.index[table["r"] <= 0].tolist()
    if bad_r:
        raise ValueError(f"Invalid coefficient in {path}: nonpositive r at rows {bad_r}")
    bad_q = table.index[table["q"] < 0].tolist()
    if bad_q:
        raise ValueError(f"Invalid coefficient in {path}: negative q at rows {bad_q}")
    return table


def load_spec_file(path: str) -> CoefficientSpec:
    """Parse a key=value coefficient spec file.

    Example::

        kind=exponential
        alpha=-1.0
        beta=1.0

    Relative table paths are resolved against the spec file's directory.

    Args:
        path: Spec file path

    Returns:
        Parsed CoefficientSpec

    Raises:
        FileNotFoundError: If the file doesn't exist
        ValueError: If a line or value is invalid
    """
    spec_path = Path(path)
    if not spec_path.exists():
        raise FileNotFoundError(f"Spec file not found: {path}")

    try:
        lines = spec_path.read_text(encoding="utf-8").splitlines()
    except IOError as e:
        raise IOError(f"Failed to read {path}: {e}")

    entries: Dict[str, str] = {}
    for line_num, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"Invalid line {line_num} in {path}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        entries[key.lower()] = value

    kind = entries.pop("kind", None)
    if kind is None:
        raise ValueError(f"Spec file {path} does not declare 'kind'")
    kind = kind.lower()

    table = entries.pop("path", None)
    if table is not None and not Path(table).is_absolute():
        table = str(spec_path.parent / table)

    params: Dict[str, float] = {}
    for key, value in entries.items():
        try:
            params[key] = float(value)
        except ValueError:
            raise ValueError(f"Invalid value for '{key}' in {path}: {value}")

    return CoefficientSpec(kind, params, path=table)


def build_weight_field(spec: CoefficientSpec) -> WeightField:
    """Build the evaluator pair for a coefficient spec.

    Args:
        spec: Validated coefficient spec

    Returns:
        WeightField with closed-form (presets) or exact piecewise (tabulated)
        interval integrals

    Raises:
        ValueError: On invalid coefficients or a malformed table
        FileNotFoundError: If the table file is missing
    """
    if spec.kind == "constant":
        field_ = ConstantField(spec)
    elif spec.kind == "exponential":
        field_ = ExponentialField(spec)
    elif spec.kind == "polynomial":
        field_ = PolynomialField(spec)
    else:
        field_ = TabulatedField(spec, load_table(spec.path or ""))
    logger.debug(f"Built {field_!r}")
    return field_


def validate_hypotheses(field_: WeightField, window: Window) -> HypothesisReport:
    """Probe positivity, the half-line mass condition and growth of R*Q.

    Growth is tested for F(d) = R(x-d, x)Q(x-d, x) and its mirror
    R(x, x+d)Q(x, x+d) at x in {-X, 0, X}, d in {X, 2X, 4X}. The report
    never claims a limit over the whole line.

    Args:
        field_: Coefficient evaluators
        window: Truncation window

    Returns:
        HypothesisReport
    """
    grid = window.grid
    r_vals = field_.r(grid)
    q_vals = field_.q(grid)
    X = window.half_width
    reach = window.search_radius

    left_mass = float(field_.Q(-reach, -X))
    right_mass = float(field_.Q(X, reach))
    if left_mass <= 0 or right_mass <= 0:
        logger.warning(
            f"{field_!r}: q has no mass beyond the window edge "
            f"(left {left_mass:.3g}, right {right_mass:.3g})"
        )

    steps = np.array(nested_windows(X, reach=4.0))
    trends: Dict[str, str] = {}
    values: Dict[str, List[float]] = {}
    for x in (-X, 0.0, X):
        left = field_.R(x - steps, x) * field_.Q(x - steps, x)
        right = field_.R(x, x + steps) * field_.Q(x, x + steps)
        for side, vals in (("left", left), ("right", right)):
            key = f"{side}@{x:g}"
            values[key] = [float(v) for v in vals]
            trends[key] = classify_trend(values[key])

    return HypothesisReport(
        r_positive=bool(np.all(r_vals > 0)),
        q_nonnegative=bool(np.all(q_vals >= 0)),
        left_mass=left_mass,
        right_mass=right_mass,
        growth_trends=trends,
        growth_values=values,
    )


def integrability_trend(field_: WeightField, window: Window, which: str = "R") -> Dict[str, bool]:
    """Whether 1/r (which="R") or q (which="Q") looks integrable at each end.

    Tail increments over [W, 2W] for the nested windows must vanish.

    Args:
        field_: Coefficient evaluators
        window: Truncation window
        which: "R" or "Q"

    Returns:
        {"left": bool, "right": bool}
    """
    integral = field_.R if which == "R" else field_.Q
    ws = np.array(nested_windows(window.half_width, reach=4.0))
    right = [float(v) for v in integral(ws, 2 * ws)]
    left = [float(v) for v in integral(-2 * ws, -ws)]
    return {
        "left": classify_trend(left) == VANISHING,
        "right": classify_trend(right) == VANISHING,
    }
