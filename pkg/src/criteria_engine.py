#!/usr/bin/env python3
"""
Solvability and compactness functionals (B, S, Steklov average, A-tilde,
B1-B3, theta, nu, Molchanov mass) with their edge trends, and the verdict
rules that turn them into "solvable" and "compact" answers.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from coefficient_model import (
    CoefficientSpec,
    HypothesisReport,
    WeightField,
    Window,
    build_weight_field,
    integrability_trend,
    validate_hypotheses,
)
from config import config
from local_geometry import (
    AuxProfile,
    HEvaluator,
    RootNotFoundError,
    build_aux_profile,
    build_h_evaluator,
    compute_phi_psi_h,
    smooth_asymptotics,
    solve_d,
    solve_d1,
    solve_d2,
    solve_dtilde,
    solve_mu,
    solve_s,
)
from principal_solutions import FssConstructionError, FssProfile, compute_fss
from utils import (
    BOUNDED,
    DIVERGING,
    INCONCLUSIVE,
    UNAVAILABLE,
    VANISHING,
    classify_trend,
    edge_values,
    nested_windows,
    save_frame,
    save_json,
)

logger = logging.getLogger(__name__)

YES = "yes"
NO = "no"

NOT_BOUNDED = "not bounded"
BOUNDED_NOT_COMPACT = "bounded, not compact"
COMPACT = "compact"
NOT_COMPARABLE = "not comparable"

# Half-widths a of the Molchanov local masses
MOLCHANOV_RADII = (0.25, 1.0, 4.0)

# FSS domain beyond the largest trend window, so s(x) fits at the edge
FSS_MARGIN = 1.25

FINITE = (BOUNDED, VANISHING)
BOUNDED_BELOW = (BOUNDED, DIVERGING)


@dataclass
class Functional:
    """A functional sampled on the window and at the nested window edges.

    Attributes:
        name: Short name, e.g. "B"
        kind: "sup" or "inf"
        value: Sup (or inf) over the window samples
        edges: Aggregated edge values for the nested windows
        trend: Trend class of the edge values
        available: False when a prerequisite failed
        note: Why the functional is unavailable
    """

    name: str
    kind: str
    value: float
    edges: List[float]
    trend: str
    available: bool = True
    note: str = ""

    def has(self, *trends: str) -> bool:
        return self.available and self.trend in trends

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "value": self.value,
            "edges": list(self.edges),
            "trend": self.trend if self.available else UNAVAILABLE,
            "available": self.available,
            "note": self.note,
        }


def _unavailable(name: str, kind: str, note: str) -> Functional:
    return Functional(name, kind, float("nan"), [], UNAVAILABLE, available=False, note=note)


@dataclass
class AnalysisContext:
    """Everything the functionals need: coefficients, tables and profiles."""

    field: WeightField
    window: Window
    h_eval: HEvaluator
    aux: AuxProfile
    fss: Optional[FssProfile]
    windows: List[float]
    _cache: Dict[bytes, Dict[str, np.ndarray]] = field(default_factory=dict, repr=False)

    def aux_at(self, points: np.ndarray) -> Dict[str, np.ndarray]:
        """Auxiliary functions at arbitrary points (NaN where undefined)."""
        points = np.asarray(points, dtype=float)
        key = points.tobytes()
        if key not in self._cache:
            f = self.field
            values: Dict[str, np.ndarray] = {
                "d1": np.asarray(solve_d1(f, points, self.window, strict=False)),
                "d2": np.asarray(solve_d2(f, points, self.window, strict=False)),
            }
            phi, psi, h = compute_phi_psi_h(
                f, points, self.window, strict=False, d1=values["d1"], d2=values["d2"]
            )
            values.update(phi=np.asarray(phi), psi=np.asarray(psi), h=np.asarray(h))
            values["d"] = np.asarray(solve_d(f, self.h_eval, points, strict=False))
            values["mu"] = np.asarray(solve_mu(f, self.h_eval, points, strict=False))
            if self.fss is not None:
                values["s"] = np.asarray(solve_s(self.fss, f, points, strict=False))
                values["rho"] = np.asarray(self.fss.rho_at(points))
            if f.unit_r:
                values["dtilde"] = np.asarray(solve_dtilde(f, points, self.window, strict=False))
            self._cache[key] = values
        return self._cache[key]

    def grid_values(self) -> Dict[str, np.ndarray]:
        aux = self.aux
        values = {
            "d1": aux.d1,
            "d2": aux.d2,
            "phi": aux.phi,
            "psi": aux.psi,
            "h": aux.h,
            "d": aux.d,
            "mu": aux.mu,
        }
        if aux.s is not None and self.fss is not None:
            values["s"] = aux.s
            values["rho"] = self.fss.rho
        if aux.dtilde is not None:
            values["dtilde"] = aux.dtilde
        return values


def _functional(
    ctx: AnalysisContext,
    name: str,
    kind: str,
    func: Callable[[np.ndarray, Dict[str, np.ndarray]], np.ndarray],
) -> Tuple[Functional, np.ndarray]:
    """Evaluate ``func`` on the window grid and at the nested window edges."""
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        per_sample = np.asarray(func(ctx.aux.x, ctx.grid_values()), dtype=float)
        edges = edge_values(lambda pts: func(pts, ctx.aux_at(pts)), ctx.windows, kind)
    finite = per_sample[np.isfinite(per_sample)]
    if finite.size == 0:
        value = float("nan")
    else:
        value = float(finite.max() if kind == "sup" else finite.min())
    trend = classify_trend(edges)
    logger.debug(f"{name}: window {kind} {value:.6g}, edges {edges}, trend {trend}")
    return Functional(name, kind, value, edges, trend), per_sample


def _outer_R(field_: WeightField, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """R(-inf, x) and R(x, inf), truncated at the default radius."""
    far = config.default_radius
    return field_.R(-far, x), field_.R(x, far)


def compute_B(ctx: AnalysisContext) -> Tuple[Functional, np.ndarray]:
    """B = sup h d, with the edge trend of h d."""
    return _functional(ctx, "B", "sup", lambda x, a: a["h"] * a["d"])


def compute_S(ctx: AnalysisContext) -> Tuple[Functional, np.ndarray]:
    """S = sup rho s, unavailable without principal solutions."""
    if ctx.fss is None or ctx.aux.s is None:
        return _unavailable("S", "sup", "principal solutions unavailable"), np.full(
            ctx.aux.x.shape, np.nan
        )
    return _functional(ctx, "S", "sup", lambda x, a: a["rho"] * a["s"])


def compute_steklov(ctx: AnalysisContext) -> Tuple[Functional, np.ndarray]:
    """Steklov average of q over [x - d, x + d]; its infimum and edge trend."""
    f = ctx.field
    return _functional(
        ctx, "A_steklov", "inf", lambda x, a: f.Q_around(x, a["d"]) / (2.0 * a["d"])
    )


def compute_A_tilde(ctx: AnalysisContext) -> Tuple[Functional, np.ndarray]:
    """Average of q over [x - mu, x + mu], flagged when phi and psi drift apart."""
    f = ctx.field
    functional, per_sample = _functional(
        ctx, "A_tilde", "inf", lambda x, a: f.Q_around(x, a["mu"]) / (2.0 * a["mu"])
    )
    if ctx.aux.mu_conditional:
        functional.note = (
            f"conditional: phi/psi ratio {ctx.aux.phi_psi_ratio:.3g} "
            f"exceeds {config.phi_psi_ratio_limit:g}"
        )
    return functional, per_sample


def compute_simple_sufficient(ctx: AnalysisContext) -> Dict[str, Tuple[Functional, np.ndarray]]:
    """B1 = r h^2, B2 = r phi psi, B3 = h |x|, theta, nu and the Molchanov masses.

    theta = |x| R(-inf, x) R(x, inf) and nu = r R(-inf, x)^2 R(x, inf)^2 need
    1/r integrable at both ends; the Molchanov masses need r = 1.
    """
    f = ctx.field
    out: Dict[str, Tuple[Functional, np.ndarray]] = {
        "B1": _functional(ctx, "B1", "sup", lambda x, a: f.r(x) * a["h"] ** 2),
        "B2": _functional(ctx, "B2", "sup", lambda x, a: f.r(x) * a["phi"] * a["psi"]),
        "B3": _functional(ctx, "B3", "sup", lambda x, a: a["h"] * np.abs(x)),
    }
    nan_map = np.full(ctx.aux.x.shape, np.nan)

    integrable = integrability_trend(f, ctx.window, "R")
    if integrable["left"] and integrable["right"]:

        def theta(x: np.ndarray, a: Dict[str, np.ndarray]) -> np.ndarray:
            minus, plus = _outer_R(f, x)
            return np.abs(x) * minus * plus

        def nu(x: np.ndarray, a: Dict[str, np.ndarray]) -> np.ndarray:
            minus, plus = _outer_R(f, x)
            return f.r(x) * minus**2 * plus**2

        out["theta"] = _functional(ctx, "theta", "sup", theta)
        out["nu"] = _functional(ctx, "nu", "sup", nu)
    else:
        note = "1/r not integrable at both ends"
        out["theta"] = (_unavailable("theta", "sup", note), nan_map)
        out["nu"] = (_unavailable("nu", "sup", note), nan_map)

    for a_radius in MOLCHANOV_RADII:
        name = f"local_mass_{a_radius:g}"
        if f.unit_r:
            out[name] = _functional(
                ctx, name, "inf", lambda x, a, rad=a_radius: f.Q_around(x, rad)
            )
        else:
            out[name] = (_unavailable(name, "inf", "r is not identically one"), nan_map)
    out["molchanov"] = out["local_mass_1"]
    return out


def _coefficient_trends(ctx: AnalysisContext) -> Dict[str, Functional]:
    """Edge trends of q (inf), r (sup), h (sup) and the smooth-route oscillation."""
    f = ctx.field
    trends = {
        "q": _functional(ctx, "q", "inf", lambda x, a: f.q(x))[0],
        "r": _functional(ctx, "r", "sup", lambda x, a: f.r(x))[0],
        "h": _functional(ctx, "h", "sup", lambda x, a: a["h"])[0],
    }

    if f.smooth and np.all(f.q(np.asarray(ctx.windows)) > 0):

        def oscillation(points: np.ndarray) -> np.ndarray:
            return np.array([max(smooth_asymptotics(f, float(p))[1:]) for p in points])

        with np.errstate(over="ignore", invalid="ignore"):
            edges = edge_values(oscillation, ctx.windows, "sup")
        trend = classify_trend(edges)
        trends["kappa"] = Functional("kappa", "sup", float("nan"), edges, trend)
    else:
        trends["kappa"] = _unavailable("kappa", "sup", "coefficients not smooth")
    return trends


@dataclass
class CriteriaReport:
    """Functionals, trends and the solvable/compact verdict for one coefficient pair."""

    label: str
    half_width: float
    samples: int
    windows: List[float]
    functionals: Dict[str, Functional]
    phi_psi_ratio: float
    conditional_mu: bool
    side_conditions: Dict[str, bool]
    hypotheses: Optional[HypothesisReport] = None
    solvable: str = INCONCLUSIVE
    solvable_rule: str = ""
    compact: str = INCONCLUSIVE
    compact_rule: str = ""
    checks: Dict[str, Any] = field(default_factory=dict)
    maps: Optional[pd.DataFrame] = None
    aux: Optional[AuxProfile] = field(default=None, repr=False)

    def __getitem__(self, name: str) -> Functional:
        return self.functionals[name]

    @property
    def B(self) -> float:
        return self.functionals["B"].value

    @property
    def S(self) -> float:
        return self.functionals["S"].value

    @property
    def verdict(self) -> str:
        """Table label: "not bounded", "bounded, not compact", "compact" or "inconclusive"."""
        if self.solvable == NO:
            return NOT_BOUNDED
        if self.compact == YES:
            return COMPACT
        if self.solvable == YES and self.compact == NO:
            return BOUNDED_NOT_COMPACT
        return INCONCLUSIVE

    def to_dict(self) -> Dict[str, Any]:
        return {
            "label": self.label,
            "window": {"half_width": self.half_width, "samples": self.samples},
            "trend_windows": list(self.windows),
            "B": self.functionals["B"].to_dict(),
            "S": self.functionals["S"].to_dict(),
            "A_steklov": self.functionals["A_steklov"].to_dict(),
            "A_tilde": self.functionals["A_tilde"].to_dict(),
            "B1": self.functionals["B1"].to_dict(),
            "B2": self.functionals["B2"].to_dict(),
            "B3": self.functionals["B3"].to_dict(),
            "theta": self.functionals["theta"].to_dict(),
            "nu": self.functionals["nu"].to_dict(),
            "molchanov": self.functionals["molchanov"].to_dict(),
            "other_trends": {
                k: v.to_dict()
                for k, v in self.functionals.items()
                if k.startswith("local_mass") or k in ("q", "r", "h", "kappa")
            },
            "phi_psi_ratio": self.phi_psi_ratio,
            "conditional_mu": self.conditional_mu,
            "side_conditions": dict(self.side_conditions),
            "hypotheses": self.hypotheses.to_dict() if self.hypotheses else None,
            "solvable": self.solvable,
            "solvable_rule": self.solvable_rule,
            "compact": self.compact,
            "compact_rule": self.compact_rule,
            "verdict": self.verdict,
            "checks": dict(self.checks),
        }


def _first(rules: Sequence[Tuple[str, bool]]) -> Optional[str]:
    for name, fired in rules:
        if fired:
            return name
    return None


def render_verdict(
    report: CriteriaReport, unit_r: bool, smooth_route: bool, growth: bool = True
) -> CriteriaReport:
    """Apply the necessary and sufficient rules in order and record the one that decided.

    A "no" from a necessary condition overrides any sufficient "yes".
    Compactness is only affirmed for solvable problems. The B and S rules
    need R(x-d, x)Q(x-d, x) to grow without bound; when that fails they are
    reported but do not vote.

    Args:
        report: Report with all functionals filled in
        unit_r: Whether r is identically one
        smooth_route: Whether the smooth-coefficient characterization applies
        growth: Whether the growth hypotheses on R*Q held

    Returns:
        The same report with verdicts and rules set
    """
    fn = report.functionals
    B, S = fn["B"], fn["S"]
    if not growth:
        B = _unavailable("B", "sup", "growth hypotheses fail")
        S = _unavailable("S", "sup", "growth hypotheses fail")
    masses = [fn[f"local_mass_{a:g}"] for a in MOLCHANOV_RADII]
    a_tilde_ok = not report.conditional_mu

    solvable_no = _first(
        [
            ("B diverging", B.has(DIVERGING)),
            ("S diverging", S.has(DIVERGING)),
            ("Molchanov mass m(a) vanishing", unit_r and fn["molchanov"].has(VANISHING)),
            ("smooth coefficients with inf q = 0", smooth_route and fn["q"].has(VANISHING)),
        ]
    )
    solvable_yes = _first(
        [
            ("B finite", B.has(*FINITE)),
            ("S finite", S.has(*FINITE)),
            (
                "Steklov average bounded below",
                fn["A_steklov"].has(*BOUNDED_BELOW) and fn["A_steklov"].value > 0,
            ),
            ("A-tilde bounded below", a_tilde_ok and fn["A_tilde"].has(*BOUNDED_BELOW)),
            ("B1 finite", fn["B1"].has(*FINITE)),
            ("B2 finite", fn["B2"].has(*FINITE)),
            ("B3 finite", fn["B3"].has(*FINITE)),
            ("theta finite", fn["theta"].has(*FINITE)),
            ("nu finite", fn["nu"].has(*FINITE)),
            ("Molchanov mass m(a) positive", unit_r and fn["molchanov"].has(*BOUNDED_BELOW)),
            ("r bounded and h bounded", fn["r"].has(*FINITE) and fn["h"].has(*FINITE)),
            ("smooth coefficients with inf q > 0", smooth_route and fn["q"].has(*BOUNDED_BELOW)),
        ]
    )

    if solvable_no:
        report.solvable, report.solvable_rule = NO, solvable_no
    elif solvable_yes:
        report.solvable, report.solvable_rule = YES, solvable_yes
    else:
        report.solvable, report.solvable_rule = INCONCLUSIVE, "no rule fired"

    compact_no = _first(
        [
            ("h d bounded away from zero", B.has(BOUNDED)),
            ("rho s bounded away from zero", S.has(BOUNDED)),
            ("Molchanov condition fails", unit_r and any(m.has(BOUNDED) for m in masses)),
            ("smooth coefficients with q bounded", smooth_route and fn["q"].has(BOUNDED)),
        ]
    )
    compact_yes = _first(
        [
            ("h d vanishing", B.has(VANISHING)),
            ("rho s vanishing", S.has(VANISHING)),
            ("Steklov average diverging", fn["A_steklov"].has(DIVERGING)),
            ("A-tilde diverging", a_tilde_ok and fn["A_tilde"].has(DIVERGING)),
            ("q diverging", fn["q"].has(DIVERGING)),
            ("B1 vanishing", fn["B1"].has(VANISHING)),
            ("B2 vanishing", fn["B2"].has(VANISHING)),
            ("B3 vanishing", fn["B3"].has(VANISHING)),
            ("theta vanishing", fn["theta"].has(VANISHING)),
            ("nu vanishing", fn["nu"].has(VANISHING)),
            ("Molchanov condition holds", unit_r and all(m.has(DIVERGING) for m in masses)),
            ("r bounded and h vanishing", fn["r"].has(*FINITE) and fn["h"].has(VANISHING)),
        ]
    )

    if report.solvable == NO:
        report.compact, report.compact_rule = NO, "not solvable"
    elif report.solvable == INCONCLUSIVE:
        report.compact, report.compact_rule = INCONCLUSIVE, "solvability undecided"
    elif compact_no:
        report.compact, report.compact_rule = NO, compact_no
    elif compact_yes:
        report.compact, report.compact_rule = YES, compact_yes
    else:
        report.compact, report.compact_rule = INCONCLUSIVE, "no rule fired"

    logger.info(
        f"{report.label}: solvable={report.solvable} ({report.solvable_rule}), "
        f"compact={report.compact} ({report.compact_rule})"
    )
    return report


def _trend_class(trend: str) -> Optional[Tuple[str, str]]:
    """(solvable, compact) implied by the trend of h d or rho s."""
    return {
        VANISHING: (YES, YES),
        BOUNDED: (YES, NO),
        DIVERGING: (NO, NO),
    }.get(trend)


def b_s_agreement(B: Functional, S: Functional) -> Any:
    """True or False when both trends decide, "not comparable" otherwise."""
    from_b = _trend_class(B.trend) if B.available else None
    from_s = _trend_class(S.trend) if S.available else None
    if from_b is None or from_s is None:
        return NOT_COMPARABLE
    return from_b == from_s


def dtilde_average_trend(ctx: AnalysisContext) -> str:
    """Edge trend of 1/dtilde^2, the average of q over [x - dtilde, x + dtilde].

    Classified with the same rule as the local masses, so dtilde -> 0 reads
    as "diverging" here.
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        edges = edge_values(lambda p: ctx.aux_at(p)["dtilde"] ** -2.0, ctx.windows, "inf")
    return classify_trend(edges)


def _consistency_checks(
    report: CriteriaReport,
    hd: np.ndarray,
    steklov: np.ndarray,
    unit_r: bool,
    dtilde_trends: Tuple[str, str] = (INCONCLUSIVE, INCONCLUSIVE),
) -> Dict[str, Any]:
    B, S = report.functionals["B"], report.functionals["S"]
    checks: Dict[str, Any] = {}

    checks["B_S_agreement"] = b_s_agreement(B, S)

    if B.available and S.available and np.isfinite(B.value) and np.isfinite(S.value) and S.value > 0:
        ratio = B.value / S.value
        checks["B_over_S"] = ratio
        checks["B_over_S_in_range"] = 1.0 / 16.0 <= ratio <= 16.0

    product = hd * steklov
    product = product[np.isfinite(product)]
    if product.size:
        checks["hd_steklov_max"] = float(product.max())
        checks["hd_steklov_ok"] = bool(product.max() <= 16.0)

    if unit_r:
        masses = [report.functionals[f"local_mass_{a:g}"].trend for a in MOLCHANOV_RADII]
        checks["dtilde_trend"], checks["dtilde_average_trend"] = dtilde_trends
        checks["molchanov_equivalence"] = (dtilde_trends[1] == DIVERGING) == all(
            m == DIVERGING for m in masses
        )
    return checks


def analyze_field(
    spec_or_field: Any, window: Optional[Window] = None, keep_maps: bool = True
) -> CriteriaReport:
    """Run the full pipeline for one coefficient pair.

    Builds the coefficient evaluators, tabulated h, principal solutions
    (non-strict, valid a little beyond the largest trend window), the
    auxiliary profile and every functional, then renders the verdict.
    Failure of the principal solutions only marks S unavailable.

    Args:
        spec_or_field: CoefficientSpec or an already built WeightField
        window: Truncation window (default from config)
        keep_maps: Keep the per-sample maps for CSV export

    Returns:
        CriteriaReport
    """
    field_ = (
        build_weight_field(spec_or_field)
        if isinstance(spec_or_field, CoefficientSpec)
        else spec_or_field
    )
    window = window or Window(config.default_half_width, config.default_samples)
    logger.info(f"Analyzing {field_!r} on X={window.half_width:g}, N={window.samples}")

    hypotheses = validate_hypotheses(field_, window)
    if not hypotheses.mass_condition:
        logger.warning(f"{field_!r}: q has no mass beyond a window edge")

    h_eval = build_h_evaluator(field_, window)
    reach = config.fss_reach
    fss: Optional[FssProfile] = None
    try:
        fss = compute_fss(field_, window, reach=reach * FSS_MARGIN, strict=False)
    except (FssConstructionError, RootNotFoundError, ValueError) as e:
        logger.warning(f"{field_!r}: principal solutions unavailable, S skipped ({e})")

    aux = build_aux_profile(field_, window, h_eval=h_eval, fss=fss)
    windows = nested_windows(window.half_width, reach=reach)
    ctx = AnalysisContext(field_, window, h_eval, aux, fss, windows)

    B, hd = compute_B(ctx)
    S, rho_s = compute_S(ctx)
    steklov, steklov_map = compute_steklov(ctx)
    a_tilde, a_tilde_map = compute_A_tilde(ctx)
    simple = compute_simple_sufficient(ctx)
    functionals: Dict[str, Functional] = {
        "B": B,
        "S": S,
        "A_steklov": steklov,
        "A_tilde": a_tilde,
    }
    functionals.update({name: value[0] for name, value in simple.items()})
    functionals.update(_coefficient_trends(ctx))

    q_integrable = integrability_trend(field_, window, "Q")
    r_integrable = integrability_trend(field_, window, "R")
    side_conditions = {
        "r_inverse_integrable": r_integrable["left"] and r_integrable["right"],
        "q_not_integrable_left": not q_integrable["left"],
        "q_not_integrable_right": not q_integrable["right"],
    }

    report = CriteriaReport(
        label=field_.spec.label,
        half_width=window.half_width,
        samples=window.samples,
        windows=windows,
        functionals=functionals,
        phi_psi_ratio=aux.phi_psi_ratio,
        conditional_mu=aux.mu_conditional,
        side_conditions=side_conditions,
        hypotheses=hypotheses,
    )
    smooth_route = functionals["kappa"].has(VANISHING)
    render_verdict(report, field_.unit_r, smooth_route, hypotheses.growth_diverging)

    dtilde_trends = (INCONCLUSIVE, INCONCLUSIVE)
    if field_.unit_r:
        dtilde_trends = (
            classify_trend(edge_values(lambda p: ctx.aux_at(p)["dtilde"], windows, "sup")),
            dtilde_average_trend(ctx),
        )
    report.checks = _consistency_checks(report, hd, steklov_map, field_.unit_r, dtilde_trends)
    if report.checks["B_S_agreement"] is False:
        logger.warning(f"{report.label}: verdicts from B and S disagree")

    if keep_maps:
        maps = {"x": aux.x, "hd": hd, "rho_s": rho_s, "A_steklov": steklov_map, "A_tilde": a_tilde_map}
        for name in ("B1", "B2", "B3", "theta", "nu"):
            maps[name] = simple[name][1]
        report.maps = pd.DataFrame(maps)
        report.aux = aux
    return report


def expected_table_verdict(alpha: float, beta: float) -> str:
    """Known answer for r = e^{alpha|x|}, q = e^{beta|x|} by sign class."""
    if alpha > 0:
        return COMPACT
    if beta < 0:
        return NOT_BOUNDED
    if beta == 0:
        return BOUNDED_NOT_COMPACT
    return COMPACT


EXPECTED_TABLE_GRID = (-1.0, 0.0, 1.0)

EXPECTED_TABLE = {
    (alpha, beta): expected_table_verdict(alpha, beta)
    for alpha in EXPECTED_TABLE_GRID
    for beta in EXPECTED_TABLE_GRID
}


def exponential_table(
    alphas: Sequence[float] = (-1.0, 0.0, 1.0),
    betas: Sequence[float] = (-1.0, 0.0, 1.0),
    window: Optional[Window] = None,
) -> pd.DataFrame:
    """Run the pipeline for every exponential pair (alpha, beta).

    Returns:
        Long-format DataFrame with columns alpha, beta, solvable, compact,
        verdict, solvable_rule, compact_rule, expected, match
    """
    rows = []
    for alpha in alphas:
        for beta in betas:
            report = analyze_field(CoefficientSpec.exponential(alpha, beta), window, keep_maps=False)
            expected = expected_table_verdict(alpha, beta)
            rows.append(
                {
                    "alpha": alpha,
                    "beta": beta,
                    "solvable": report.solvable,
                    "compact": report.compact,
                    "verdict": report.verdict,
                    "solvable_rule": report.solvable_rule,
                    "compact_rule": report.compact_rule,
                    "expected": expected,
                    "match": report.verdict == expected,
                }
            )
    table = pd.DataFrame(rows)
    mismatches = int((~table["match"]).sum())
    if mismatches:
        logger.warning(f"Exponential table: {mismatches} cells differ from the known answers")
    return table


def table_matrix(table: pd.DataFrame) -> pd.DataFrame:
    """Pivot the long table into an alpha x beta matrix of verdicts."""
    return table.pivot(index="alpha", columns="beta", values="verdict")


def save_report(report: CriteriaReport, filepath: str, fmt: str = "json") -> None:
    """Write a report as JSON, or its per-sample maps as CSV.

    Raises:
        ValueError: On an unknown format or missing maps for CSV
    """
    if fmt == "json":
        save_json(report.to_dict(), filepath)
    elif fmt == "csv":
        if report.maps is None:
            raise ValueError("Report has no per-sample maps; rerun with keep_maps=True")
        save_frame(report.maps, filepath)
    else:
        raise ValueError(f"Unknown report format: {fmt}")
