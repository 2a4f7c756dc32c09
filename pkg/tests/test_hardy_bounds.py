#!/usr/bin/env python3
"""
Tests for Hardy constants, theta_p and the discretized norms of G1, G2.
"""

import sys
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from hardy_bounds import (
    GRID_SLACK,
    conjugate_exponent,
    green_blocks,
    hardy_constant,
    hardy_factor,
    hardy_report,
    midpoint_nodes,
    operator_norm,
    save_operator_matrix,
    split_operator_norms,
    theta_p_profile,
)


def ones(t):
    return np.ones_like(np.asarray(t, dtype=float))


class TestExponents:
    """Test exponent helpers."""

    def test_conjugate(self):
        """1/p + 1/p' = 1."""
        assert conjugate_exponent(2.0) == pytest.approx(2.0)
        assert conjugate_exponent(3.0) == pytest.approx(1.5)

    def test_conjugate_invalid(self):
        """p must lie strictly between 1 and infinity."""
        with pytest.raises(ValueError, match=r"\(1, inf\)"):
            conjugate_exponent(1.0)
        with pytest.raises(ValueError, match=r"\(1, inf\)"):
            conjugate_exponent(np.inf)

    def test_factor(self):
        """The sandwich gap is 2 at p = 2."""
        assert hardy_factor(2.0) == pytest.approx(2.0)


class TestHardyConstant:
    """Test the Muckenhoupt constant."""

    def test_unit_weights(self):
        """mu = theta = 1 on (0, 1) gives sup sqrt(x(1 - x)) = 1/2."""
        estimate = hardy_constant(ones, ones, 2.0, 0.0, 1.0)
        assert estimate.value == pytest.approx(0.5, abs=1e-6)
        assert estimate.argmax == pytest.approx(0.5, abs=1e-3)

    def test_tilde_symmetric(self):
        """The mirrored constant agrees for symmetric weights."""
        estimate = hardy_constant(ones, ones, 2.0, 0.0, 1.0, tilde=True)
        assert estimate.value == pytest.approx(0.5, abs=1e-6)

    def test_log_scale(self):
        """Log-scale weights give the same constant."""
        zeros = lambda t: np.zeros_like(np.asarray(t, dtype=float))  # noqa: E731
        estimate = hardy_constant(zeros, zeros, 2.0, 0.0, 1.0, log_scale=True)
        assert estimate.value == pytest.approx(0.5, abs=1e-6)

    def test_empty_interval(self):
        """b must exceed a."""
        with pytest.raises(ValueError, match="Empty interval"):
            hardy_constant(ones, ones, 2.0, 1.0, 1.0)

    def test_truncation_flag(self):
        """Unit weights are not negligible at a cut."""
        estimate = hardy_constant(ones, ones, 2.0, 0.0, 1.0, open_ends=True)
        assert estimate.truncated


class TestOperatorNorm:
    """Test matrix norms."""

    def test_p2_matches_spectral_norm(self):
        """p = 2 is the largest singular value."""
        matrix = np.array([[2.0, 1.0], [0.5, 1.0]])
        norm, converged = operator_norm(matrix, 2.0)
        assert norm == pytest.approx(np.linalg.norm(matrix, 2))
        assert converged

    def test_diagonal_p3(self):
        """The l_3 norm of diag(2, 1) is 2."""
        norm, _ = operator_norm(np.diag([2.0, 1.0]), 3.0, steps=200)
        assert norm == pytest.approx(2.0, rel=1e-3)

    def test_midpoint_nodes(self):
        """Four cells on [-1, 1]."""
        nodes, width = midpoint_nodes(1.0, 4)
        np.testing.assert_allclose(nodes, [-0.75, -0.25, 0.25, 0.75])
        assert width == pytest.approx(0.5)

    def test_midpoint_nodes_invalid(self):
        """At least one cell is needed."""
        with pytest.raises(ValueError, match="must be positive"):
            midpoint_nodes(1.0, 0)


class TestConstantCase:
    """Test Hardy quantities for r = q = 1."""

    def test_single_cell(self, fss_const11):
        """One cell gives rho(0) * 2X."""
        blocks = green_blocks(fss_const11, 20.0, 1)
        assert blocks["G"][0, 0] == pytest.approx(0.5 * 40.0, rel=1e-6)
        assert blocks["G1"][0, 0] == pytest.approx(blocks["G2"][0, 0])

    def test_blocks_split(self, fss_const11):
        """G1 + G2 = G."""
        blocks = green_blocks(fss_const11, 10.0, 32)
        np.testing.assert_allclose(blocks["G1"] + blocks["G2"], blocks["G"])

    def test_theta_profile(self, fss_const11):
        """theta_2 = 1/4 across the window."""
        profile = theta_p_profile(fss_const11, 2.0)
        np.testing.assert_allclose(profile.theta, 0.25, atol=1e-3)
        assert set(profile.variants) == {5.0, 10.0}

    def test_norms(self, fss_const11):
        """|G2| lies in the Hardy sandwich around H = 1/4."""
        norms = split_operator_norms(fss_const11, 2.0, 20.0, 256)
        assert 0.25 * (1 - GRID_SLACK) <= norms.g2 <= 2 * 0.25 * (1 + GRID_SLACK)
        assert norms.triangle_ok

    def test_report(self, fss_const11):
        """H = 1/4, both sandwiches hold and norms grow with X."""
        report = hardy_report(fss_const11, 2.0, 256)
        assert report.H.value == pytest.approx(0.25, abs=0.01)
        assert report.H_tilde.value == pytest.approx(0.25, abs=0.01)
        assert report.g1_sandwich
        assert report.g2_sandwich
        assert report.monotone_in_x
        assert report.to_dict()["factor"] == pytest.approx(2.0)

    def test_norms_in_n_halving_grids(self, fss_const11):
        """The refinement sequence uses n/4, n/2 and n cells on the same interval."""
        report = hardy_report(fss_const11, 2.0, 256)
        expected = [operator_norm(green_blocks(fss_const11, 20.0, m)["G"], 2.0)[0] for m in (64, 128)]
        assert len(report.norms_in_n) == 3
        np.testing.assert_allclose(report.norms_in_n[:2], expected, rtol=1e-12)
        assert report.norms_in_n[2] == pytest.approx(report.norms.g, rel=1e-12)

    def test_save_matrix(self, fss_const11, tmp_path):
        """The matrix export has a node column plus n columns."""
        path = tmp_path / "G.csv"
        save_operator_matrix(fss_const11, str(path), n=16)
        frame = pd.read_csv(path)
        assert frame.shape == (16, 17)
        assert frame.columns[0] == "x"
