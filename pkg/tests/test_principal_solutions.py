#!/usr/bin/env python3
"""
Tests for the principal pair, rho, x0 and the Green kernel.
"""

import sys
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from coefficient_model import CoefficientSpec, Window, build_weight_field
from config import config
from local_geometry import build_aux_profile, build_h_evaluator, solve_s
from principal_solutions import (
    FSS_COLUMNS,
    FssConstructionError,
    GreenKernel,
    check_davies_harrell,
    check_fss_limits,
    check_log_derivative_identities,
    check_otelbaev,
    check_representation,
    check_rho_bound,
    check_rho_derivative,
    check_wronskian,
    compute_fss,
    green_eval,
    save_fss_profile,
)
from utils import BOUNDED, DIVERGING


class TestComputeFss:
    """Test construction of the principal pair."""

    def test_constant_rho(self, fss_const11):
        """rho = 1/2 and x0 = 0 for r = q = 1."""
        np.testing.assert_allclose(fss_const11.rho, 0.5, atol=1e-6)
        assert fss_const11.x0 == pytest.approx(0.0, abs=1e-6)
        assert fss_const11.half_width == pytest.approx(40.0)

    def test_constant_solutions(self, fss_const11):
        """v = e^x / sqrt(2) and u = e^{-x} / sqrt(2)."""
        x = np.array([-30.0, 0.0, 30.0])
        np.testing.assert_allclose(fss_const11.log_v_at(x), x - 0.5 * np.log(2.0), atol=1e-4)
        np.testing.assert_allclose(fss_const11.log_u_at(x), -x - 0.5 * np.log(2.0), atol=1e-4)

    def test_constant_large_q(self, fss_const14):
        """rho = 1/4 for r = 1, q = 4."""
        np.testing.assert_allclose(fss_const14.rho, 0.25, atol=1e-6)

    def test_wronskian(self, fss_const11):
        """The Wronskian stays at one."""
        assert check_wronskian(fss_const11)["passed"]

    def test_outside_domain_is_nan(self, fss_const11):
        """Evaluators return NaN beyond the valid domain."""
        assert np.isnan(fss_const11.rho_at(50.0))

    def test_no_mass_on_half_line(self, window10):
        """q = 0 leaves no principal pair."""
        field_ = build_weight_field(CoefficientSpec.constant(1.0, 0.0))
        with pytest.raises(FssConstructionError, match="no mass"):
            compute_fss(field_, window10)

    def test_exponential_crossing(self, exp_compact):
        """r = e^{-|x|}, q = e^{|x|} gives a positive rho crossing at the origin."""
        fss = compute_fss(exp_compact, Window(5.0, 51), reach=1.0)
        assert np.all(fss.rho > 0)
        assert fss.x0 == pytest.approx(0.0, abs=1e-4)
        assert fss.wronskian_residual <= config.wronskian_tol


class TestStiffSweep:
    """Test the principal pair where sqrt(q/r) grows like e^{|x|}."""

    def test_stiff_method(self, fss_exp_compact):
        """The sweep switches to the implicit method and keeps the Wronskian."""
        assert fss_exp_compact.method == config.fss_stiff_method
        assert fss_exp_compact.wronskian_residual <= config.wronskian_tol

    def test_rho_is_half(self, fss_exp_compact):
        """u = e^{-e^x} up to scale on x > 0, so rho = 1/2 everywhere."""
        np.testing.assert_allclose(fss_exp_compact.rho, 0.5, rtol=1e-8)
        np.testing.assert_allclose(fss_exp_compact.rho_at([-35.0, 35.0]), 0.5, rtol=1e-8)
        assert fss_exp_compact.x0 == pytest.approx(0.0, abs=1e-6)

    def test_closed_form_solutions(self, fss_exp_compact):
        """log u = 1 - log(2)/2 - e^x on x > 0 and v(x) = u(-x)."""
        x = np.array([1.0, 5.0, 10.0, 30.0])
        expected = 1.0 - 0.5 * np.log(2.0) - np.exp(x)
        np.testing.assert_allclose(fss_exp_compact.log_u_at(x), expected, rtol=1e-9)
        np.testing.assert_allclose(fss_exp_compact.log_v_at(-x), expected, rtol=1e-9)

    @pytest.mark.parametrize("alpha, beta", [(-1.0, 0.0), (0.0, 1.0)])
    def test_other_growing_rates(self, alpha, beta):
        """e^{|x|/2} growth of sqrt(q/r) builds on X = 20 with reach 2."""
        field_ = build_weight_field(CoefficientSpec.exponential(alpha, beta))
        fss = compute_fss(field_, Window(20.0, 401), reach=2.0)
        assert fss.method == config.fss_stiff_method
        assert fss.wronskian_residual <= config.wronskian_tol
        assert np.all(np.isfinite(fss.rho)) and np.all(fss.rho > 0)
        assert fss.x0 == pytest.approx(0.0, abs=1e-6)

    def test_wkb_limit(self):
        """r = 1, q = e^{|x|}: 2 rho sqrt(q) tends to one."""
        field_ = build_weight_field(CoefficientSpec.exponential(0.0, 1.0))
        fss = compute_fss(field_, Window(20.0, 401), reach=2.0)
        x = np.array([-30.0, -15.0, 15.0, 30.0])
        scaled = 2.0 * fss.rho_at(x) * np.sqrt(field_.q(x))
        np.testing.assert_allclose(scaled, 1.0, rtol=1e-3)


class TestFlux:
    """Test integrals of 1/(r rho)."""

    def test_constant(self, fss_const11):
        """The integral over [0, X] is 2X."""
        assert fss_const11.flux_integral(0.0, 10.0) == pytest.approx(20.0, rel=1e-6)
        assert fss_const11.flux_integral(10.0, 0.0) == pytest.approx(-20.0, rel=1e-6)

    def test_constant_large_q(self, fss_const14):
        """The integral over [0, X] is 4X for q = 4."""
        assert fss_const14.flux_integral(0.0, 5.0) == pytest.approx(20.0, rel=1e-6)

    def test_s_constant(self, fss_const11, const11):
        """s = 1/4 for r = q = 1."""
        assert solve_s(fss_const11, const11, 0.0) == pytest.approx(0.25, abs=1e-6)


class TestGreenKernel:
    """Test the Green kernel."""

    def test_constant_value(self, fss_const11):
        """G(0, 4) = e^{-4} / 2."""
        assert green_eval(fss_const11, 0.0, 4.0) == pytest.approx(np.exp(-4.0) / 2.0, rel=1e-6)
        assert green_eval(fss_const11, 4.0, 0.0) == pytest.approx(0.009158, abs=1e-6)

    def test_diagonal_is_rho(self, fss_const11):
        """G(x, x) = rho(x)."""
        kernel = GreenKernel(fss_const11)
        assert float(kernel(3.0, 3.0)) == pytest.approx(float(kernel.diagonal(3.0)), rel=1e-9)

    def test_matrix_symmetric(self, fss_const11):
        """The kernel matrix is symmetric."""
        points = np.linspace(-5.0, 5.0, 11)
        matrix = GreenKernel(fss_const11).matrix(points)
        np.testing.assert_allclose(matrix, matrix.T)
        np.testing.assert_allclose(np.diag(matrix), 0.5, atol=1e-6)

    def test_outside_domain(self, fss_const11):
        """Arguments beyond the valid domain are rejected."""
        with pytest.raises(ValueError, match="outside"):
            green_eval(fss_const11, 0.0, 100.0)


class TestIdentities:
    """Test the identity checks on the constant case."""

    def test_davies_harrell(self, fss_const11):
        """u and v are rebuilt from rho and x0; the flux diverges."""
        result = check_davies_harrell(fss_const11, nodes=20, seed=1)
        assert result["max_residual"] < 1e-5
        assert result["flux_right_trend"] == DIVERGING
        assert result["flux_left_trend"] == DIVERGING

    def test_log_derivatives(self, fss_const11):
        """v'/v = 1 and u'/u = -1 match the rho formulas."""
        result = check_log_derivative_identities(fss_const11)
        assert result["max_residual_v"] < 1e-4
        assert result["max_residual_u"] < 1e-4

    def test_rho_derivative(self, fss_const11):
        """r |rho'| stays below one."""
        assert check_rho_derivative(fss_const11)["passed"]

    def test_representation(self, fss_const11):
        """u and v are recovered from each other."""
        assert check_representation(fss_const11)["max_residual"] < 1e-5

    def test_limits(self, fss_const11):
        """Integrals of 1/(r u^2) settle on the left and diverge on the right."""
        result = check_fss_limits(fss_const11)
        assert result["ratio_monotone"]
        assert result["ratios_small"]
        assert result["integrals"]["u_left"]["trend"] == BOUNDED
        assert result["integrals"]["v_right"]["trend"] == BOUNDED
        assert result["integrals"]["u_right"]["trend"] == DIVERGING
        assert result["integrals"]["v_left"]["trend"] == DIVERGING

    def test_otelbaev(self, fss_const11, const11):
        """rho, h and the auxiliary lengths agree within their constants."""
        window = fss_const11.window
        h_eval = build_h_evaluator(const11, window)
        aux = build_aux_profile(const11, window, h_eval=h_eval)
        result = check_otelbaev(fss_const11, aux, h_eval, probes=20, seed=3)
        for name in ("rho_vs_h", "v_flux", "u_flux", "rho_vs_dtilde", "local_d", "local_s"):
            assert result[name]["passed"], name

    def test_rho_bound_not_applicable(self, fss_const11):
        """The bound needs 1/r integrable."""
        assert check_rho_bound(fss_const11) == {"applicable": False}


class TestOtelbaevPresets:
    """Test the two-sided estimates on every sample of a 401-point window."""

    @pytest.mark.slow
    @pytest.mark.parametrize(
        "spec",
        [
            CoefficientSpec.constant(1.0, 1.0),
            CoefficientSpec.constant(1.0, 4.0),
            CoefficientSpec.exponential(-1.0, 1.0),
            CoefficientSpec.exponential(1.0, 0.0),
            CoefficientSpec.polynomial(1),
        ],
        ids=lambda s: s.label,
    )
    def test_bounds_hold(self, spec):
        """h/2 <= rho <= 2h, the flux ratios and the local equivalences all hold."""
        field_ = build_weight_field(spec)
        window = Window(10.0, 401)
        fss = compute_fss(field_, window, reach=2.0)
        h_eval = build_h_evaluator(field_, window)
        aux = build_aux_profile(field_, window, h_eval=h_eval, fss=fss)
        assert np.all(np.isfinite(aux.h)) and aux.x.size >= 400

        result = check_otelbaev(fss, aux, h_eval, probes=50, seed=11)
        expected = {"rho_vs_h", "v_flux", "u_flux", "local_d", "local_s"}
        if field_.unit_r:
            expected.add("rho_vs_dtilde")
        assert expected <= set(result)
        for name in expected:
            assert result[name]["passed"], (name, result[name])


class TestSaveFss:
    """Test CSV export."""

    def test_columns(self, fss_const14, tmp_path):
        """The export carries the documented columns."""
        path = tmp_path / "fss.csv"
        save_fss_profile(fss_const14, str(path))
        frame = pd.read_csv(path)
        assert list(frame.columns) == FSS_COLUMNS
        assert len(frame) == fss_const14.window.samples
