#!/usr/bin/env python3
"""
Tests for the invariant suite.
"""

import sys
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from coefficient_model import CoefficientSpec, Window
from verification import SuiteResult, _level_checks, run_invariant_suite, save_suite


class TestSuiteResult:
    """Test bookkeeping of checks."""

    def test_default_pass_rule(self):
        """A value at or below its bound passes."""
        suite = SuiteResult("demo")
        suite.add("small", 0.5, 1.0)
        suite.add("large", 2.0, 1.0)
        assert suite["small"].passed
        assert not suite["large"].passed
        assert [c.name for c in suite.failures] == ["large"]
        assert not suite.passed

    def test_report_only(self):
        """Checks that are not enforced never fail the suite."""
        suite = SuiteResult("demo")
        suite.add("note", 2.0, 1.0, enforced=False)
        assert suite.passed

    def test_nan_fails(self):
        """NaN values fail unless told otherwise."""
        suite = SuiteResult("demo")
        suite.add("undefined", float("nan"), 1.0)
        assert not suite["undefined"].passed

    def test_missing(self):
        """Unknown names raise KeyError."""
        with pytest.raises(KeyError):
            SuiteResult("demo")["absent"]


class TestInvariantSuite:
    """Test the full suite on r = q = 1."""

    @pytest.fixture(scope="class")
    def suite(self):
        return run_invariant_suite(CoefficientSpec.constant(1.0, 1.0), Window(10.0, 101), seed=5)

    def test_passes(self, suite):
        """Every enforced invariant holds."""
        assert suite.passed, [c.name for c in suite.failures]

    def test_names(self, suite):
        """The suite covers integrals, roots, coverings and the principal pair."""
        names = {c.name for c in suite.checks}
        for name in (
            "R_additivity",
            "Q_closed_form_vs_quad",
            "d1_residual",
            "d1_bracket",
            "d2_residual",
            "d_residual",
            "d_bracket",
            "mu_residual",
            "mu_bracket",
            "s_residual",
            "s_bracket",
            "dtilde_residual",
            "dtilde_bracket",
            "F1_monotone",
            "h_below_min_phi_psi",
            "d_lipschitz",
            "s_lipschitz",
            "d_covering_chaining",
            "s_covering_chaining",
            "s_covering_covers",
            "B_S_agreement",
            "hd_steklov",
            "green_symmetry",
            "hardy_G1_sandwich",
            "hardy_G2_sandwich",
            "triangle",
            "lambda_max_in_n",
            "wronskian",
            "davies_harrell",
            "rho_vs_h",
            "rho_vs_dtilde",
            "local_s",
        ):
            assert name in names
        assert "rho_bound" not in names

    def test_flux_note(self, suite):
        """The diverging flux is reported but not enforced."""
        check = suite["flux_diverging"]
        assert not check.enforced
        assert check.passed

    def test_save(self, suite, tmp_path):
        """Checks export as one CSV row each."""
        path = tmp_path / "verify.csv"
        save_suite(suite, str(path))
        frame = pd.read_csv(path)
        assert len(frame) == len(suite.checks)
        assert "passed" in frame.columns

    def test_closed_form_on_hundred_intervals(self, suite):
        """Closed forms match adaptive quadrature to 1e-8 on 100 intervals."""
        for name in ("R_closed_form_vs_quad", "Q_closed_form_vs_quad"):
            check = suite[name]
            assert check.bound == pytest.approx(1e-8)
            assert check.note == "100 intervals"
            assert check.passed

    def test_operator_checks(self, suite):
        """G is symmetric, its halves sit in the Hardy sandwich and B, S agree."""
        assert suite["green_symmetry"].value == 0.0
        assert suite["green_symmetry_pairs"].value == 0.0
        assert suite["hardy_G2_sandwich"].passed
        assert suite["hardy_G1_sandwich"].passed
        assert suite["B_S_agreement"].enforced
        assert suite["B_S_agreement"].passed
        assert suite["hd_steklov"].value <= 16.0


class TestLevelChecks:
    """Test the residual and bracket bookkeeping of one solver."""

    def test_exact_root(self):
        """F(eta) = eta^2 with root 1 passes both checks."""
        suite = SuiteResult("demo")
        xs = np.zeros(4)
        _level_checks(suite, "square", lambda x, eta: eta**2, xs, np.ones(4))
        assert suite["square_residual"].value == 0.0
        assert suite["square_bracket"].passed

    def test_wrong_root(self):
        """A root off the unit level fails the residual and the bracket."""
        suite = SuiteResult("demo")
        xs = np.zeros(2)
        _level_checks(suite, "square", lambda x, eta: eta**2, xs, np.full(2, 3.0))
        assert not suite["square_residual"].passed
        assert suite["square_bracket"].value == 2.0

    def test_no_root(self):
        """An all-NaN root set is a failure."""
        suite = SuiteResult("demo")
        _level_checks(suite, "square", lambda x, eta: eta**2, np.zeros(2), np.full(2, np.nan))
        assert not suite["square_residual"].passed


class TestCompactSuite:
    """Test the suite on the compact case r = e^{-|x|}, q = e^{|x|}."""

    @pytest.mark.slow
    def test_passes(self):
        """Every enforced invariant holds on X = 10, including the stiff principal pair."""
        suite = run_invariant_suite(CoefficientSpec.exponential(-1.0, 1.0), Window(10.0, 201), seed=5)
        assert "fss_construction" not in {c.name for c in suite.checks}
        assert suite.passed, [(c.name, c.value) for c in suite.failures]
