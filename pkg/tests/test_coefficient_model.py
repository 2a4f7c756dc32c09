#!/usr/bin/env python3
"""
Tests for coefficient specs, evaluators, table loading and hypothesis probes.
"""

import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from coefficient_model import (
    CoefficientSpec,
    Window,
    build_weight_field,
    integrability_trend,
    load_spec_file,
    load_table,
    validate_hypotheses,
)


class TestCoefficientSpec:
    """Test spec validation and labels."""

    def test_labels(self):
        """Labels name the preset and its parameters."""
        assert CoefficientSpec.constant(1, 1).label == "constant(1,1)"
        assert CoefficientSpec.exponential(-1, 1).label == "exponential(-1,1)"
        assert CoefficientSpec.polynomial(1).label == "polynomial(k=1)"
        assert CoefficientSpec.tabulated("/tmp/bump.csv").label == "tabulated(bump.csv)"

    def test_unknown_kind(self):
        """Unknown kinds are rejected."""
        with pytest.raises(ValueError, match="Unknown coefficient kind"):
            CoefficientSpec("gaussian")

    def test_unknown_parameter(self):
        """Parameters foreign to the kind are rejected."""
        with pytest.raises(ValueError, match="Unknown parameters"):
            CoefficientSpec("constant", {"alpha": 1.0})

    def test_tabulated_needs_path(self):
        """Tabulated specs require a table path."""
        with pytest.raises(ValueError, match="need a 'path'"):
            CoefficientSpec("tabulated")

    def test_param_defaults(self):
        """Missing parameters fall back to preset defaults."""
        spec = CoefficientSpec("constant", {"q0": 4.0})
        assert spec.param("r0") == 1.0
        assert spec.param("q0") == 4.0


class TestWindow:
    """Test truncation windows."""

    def test_grid(self):
        """Grid spans [-X, X] with N samples."""
        grid = Window(10.0, 101).grid
        assert len(grid) == 101
        assert grid[0] == -10.0 and grid[-1] == 10.0

    def test_search_radius(self):
        """Search radius is eight half-widths."""
        assert Window(20.0, 401).search_radius == pytest.approx(160.0)

    def test_invalid(self):
        """Nonpositive widths and tiny sample counts are rejected."""
        with pytest.raises(ValueError, match="half-width must be positive"):
            Window(0.0, 101)
        with pytest.raises(ValueError, match="at least 3 samples"):
            Window(10.0, 2)


class TestPresetFields:
    """Test closed-form evaluators of the presets."""

    def test_constant_integrals(self, const14):
        """R and Q grow linearly for constant coefficients."""
        assert const14.R(0.0, 2.0) == pytest.approx(2.0)
        assert const14.Q(0.0, 2.0) == pytest.approx(8.0)
        assert const14.unit_r

    def test_constant_invalid(self):
        """Nonpositive r and negative q are rejected."""
        with pytest.raises(ValueError, match="r0 must be positive"):
            build_weight_field(CoefficientSpec.constant(0.0, 1.0))
        with pytest.raises(ValueError, match="q0 must be nonnegative"):
            build_weight_field(CoefficientSpec.constant(1.0, -1.0))

    def test_exponential_R(self, exp_decay):
        """R(0, 1) = e - 1 for r = e^{-|x|}."""
        assert exp_decay.R(0.0, 1.0) == pytest.approx(np.e - 1.0, rel=1e-12)
        assert not exp_decay.unit_r

    def test_exponential_symmetric(self, exp_compact):
        """Integrals across the kink are symmetric."""
        assert exp_compact.Q(-1.0, 0.0) == pytest.approx(exp_compact.Q(0.0, 1.0))
        assert exp_compact.Q(-1.0, 1.0) == pytest.approx(2.0 * (np.e - 1.0))

    def test_polynomial(self, poly1):
        """q = 1 + x^2 integrates to x + x^3/3."""
        assert poly1.q(2.0) == pytest.approx(5.0)
        assert poly1.Q(0.0, 3.0) == pytest.approx(12.0)

    def test_polynomial_invalid(self):
        """Non-integer exponents are rejected."""
        with pytest.raises(ValueError, match="positive integer"):
            build_weight_field(CoefficientSpec("polynomial", {"k": 1.5}))

    def test_closed_form_matches_quadrature(self, exp_compact):
        """Closed forms agree with adaptive quadrature."""
        assert exp_compact.Q(-2.0, 3.0) == pytest.approx(exp_compact.Q_quad(-2.0, 3.0), rel=1e-8)
        assert exp_compact.R(-2.0, 3.0) == pytest.approx(exp_compact.R_quad(-2.0, 3.0), rel=1e-8)

    @settings(max_examples=50, deadline=None)
    @given(
        a=st.floats(-20, 20),
        b=st.floats(-20, 20),
        c=st.floats(-20, 20),
        alpha=st.sampled_from([-1.0, 0.0, 1.0]),
        beta=st.sampled_from([-1.0, 0.0, 1.0]),
    )
    def test_additivity(self, a, b, c, alpha, beta):
        """Q(a, c) = Q(a, b) + Q(b, c) for ordered points."""
        a, b, c = sorted((a, b, c))
        field_ = build_weight_field(CoefficientSpec.exponential(alpha, beta))
        whole = float(field_.Q(a, c))
        parts = float(field_.Q(a, b) + field_.Q(b, c))
        assert parts == pytest.approx(whole, rel=1e-9, abs=1e-12)


class TestTabulated:
    """Test tabulated coefficients."""

    def test_trapezoid_integral(self, ramp_table):
        """Piecewise-linear q = x on [0, 2] integrates to 2."""
        field_ = build_weight_field(CoefficientSpec.tabulated(ramp_table))
        assert float(field_.Q(0.0, 2.0)) == pytest.approx(2.0)
        assert float(field_.R(0.0, 2.0)) == pytest.approx(2.0)

    def test_extrapolates_constant(self, ramp_table):
        """Values beyond the table repeat the edge row."""
        field_ = build_weight_field(CoefficientSpec.tabulated(ramp_table))
        assert float(field_.q(5.0)) == pytest.approx(2.0)
        assert float(field_.q(-5.0)) == pytest.approx(0.0)

    def test_missing_table(self, tmp_path):
        """Missing tables raise FileNotFoundError."""
        with pytest.raises(FileNotFoundError, match="table not found"):
            load_table(str(tmp_path / "missing.csv"))

    def test_missing_column(self, tmp_path):
        """Tables need x, r and q columns."""
        table = tmp_path / "bad.csv"
        table.write_text("x,r\n0,1\n1,1\n2,1\n")
        with pytest.raises(ValueError, match="missing columns"):
            load_table(str(table))

    def test_nonincreasing_x(self, tmp_path):
        """x must be strictly increasing."""
        table = tmp_path / "bad.csv"
        table.write_text("x,r,q\n0,1,1\n0,1,1\n2,1,1\n")
        with pytest.raises(ValueError, match="strictly increasing"):
            load_table(str(table))

    def test_nonpositive_r(self, tmp_path):
        """Nonpositive r is reported with row numbers."""
        table = tmp_path / "bad.csv"
        table.write_text("x,r,q\n0,1,1\n1,0,1\n2,1,1\n")
        with pytest.raises(ValueError, match="nonpositive r"):
            load_table(str(table))

    def test_negative_q(self, tmp_path):
        """Negative q is rejected."""
        table = tmp_path / "bad.csv"
        table.write_text("x,r,q\n0,1,1\n1,1,-1\n2,1,1\n")
        with pytest.raises(ValueError, match="negative q"):
            load_table(str(table))

    def test_too_few_rows(self, tmp_path):
        """At least three rows are needed."""
        table = tmp_path / "bad.csv"
        table.write_text("x,r,q\n0,1,1\n1,1,1\n")
        with pytest.raises(ValueError, match="at least 3 rows"):
            load_table(str(table))


class TestSpecFile:
    """Test key=value spec files."""

    def test_exponential(self, write_spec):
        """Parses kind and parameters, ignoring comments."""
        path = write_spec("exp.cfg", "# comment\nkind = exponential\nalpha = -1\nbeta = 1\n")
        spec = load_spec_file(path)
        assert spec.kind == "exponential"
        assert spec.param("alpha") == -1.0
        assert spec.param("beta") == 1.0

    def test_relative_table_path(self, write_spec, ramp_table):
        """Relative table paths resolve against the spec directory."""
        path = write_spec("tab.cfg", f"kind=tabulated\npath={Path(ramp_table).name}\n")
        spec = load_spec_file(path)
        assert Path(spec.path) == Path(ramp_table)

    def test_missing_file(self, tmp_path):
        """Missing spec files raise FileNotFoundError."""
        with pytest.raises(FileNotFoundError, match="Spec file not found"):
            load_spec_file(str(tmp_path / "none.cfg"))

    def test_invalid_line(self, write_spec):
        """Lines without '=' are rejected with their number."""
        path = write_spec("bad.cfg", "kind=constant\nr0 1\n")
        with pytest.raises(ValueError, match="Invalid line 2"):
            load_spec_file(path)

    def test_missing_kind(self, write_spec):
        """A spec must declare its kind."""
        path = write_spec("bad.cfg", "r0=1\n")
        with pytest.raises(ValueError, match="does not declare 'kind'"):
            load_spec_file(path)

    def test_invalid_value(self, write_spec):
        """Parameters must be numeric."""
        path = write_spec("bad.cfg", "kind=constant\nr0=one\n")
        with pytest.raises(ValueError, match="Invalid value for 'r0'"):
            load_spec_file(path)

    def test_shipped_specs(self):
        """Bundled spec files parse and build."""
        specs = Path(__file__).parent.parent / "data" / "specs"
        for path in sorted(specs.glob("*.cfg")):
            field_ = build_weight_field(load_spec_file(str(path)))
            assert float(field_.r(0.0)) > 0


class TestHypotheses:
    """Test hypothesis probes."""

    def test_constant_hypotheses(self, const11, window10):
        """Constant coefficients satisfy every hypothesis."""
        report = validate_hypotheses(const11, window10)
        assert report.r_positive and report.q_nonnegative
        assert report.mass_condition
        assert report.growth_diverging

    def test_bounded_growth_detected(self, window10):
        """For r = e^{|x|}, q = e^{-|x|} the product R*Q stays bounded."""
        field_ = build_weight_field(CoefficientSpec.exponential(1.0, -1.0))
        report = validate_hypotheses(field_, window10)
        assert not report.growth_diverging
        assert "growth_trends" in report.to_dict()

    def test_integrability(self, window10):
        """1/r = e^{-|x|} is integrable at both ends, constant q is not."""
        field_ = build_weight_field(CoefficientSpec.exponential(1.0, 0.0))
        assert integrability_trend(field_, window10, "R") == {"left": True, "right": True}
        assert integrability_trend(field_, window10, "Q") == {"left": False, "right": False}
