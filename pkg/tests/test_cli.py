#!/usr/bin/env python3
"""
End-to-end tests for the command-line front end.
"""

import json
import sys
from pathlib import Path

import pandas as pd
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from cli import EXIT_ERROR, EXIT_OK, build_parser, main

SPECS = Path(__file__).parent.parent / "data" / "specs"
SMALL = ["--window", "10", "--samples", "101"]


class TestParser:
    """Test argument parsing."""

    def test_defaults(self):
        """Shared options default from the configuration."""
        args = build_parser().parse_args(["analyze", "--spec", "x.cfg"])
        assert args.window == 20.0
        assert args.samples == 401
        assert args.p == 2.0
        assert args.format == "json"

    def test_table_grid(self):
        """alpha and beta accept several values."""
        args = build_parser().parse_args(["table", "--alpha", "-1", "0", "--beta", "1"])
        assert args.alpha == [-1.0, 0.0]
        assert args.beta == [1.0]

    def test_empty_alpha(self):
        """An empty alpha list is a usage error."""
        with pytest.raises(SystemExit):
            build_parser().parse_args(["table", "--alpha"])

    def test_spec_required(self):
        """analyze needs --spec."""
        with pytest.raises(SystemExit):
            build_parser().parse_args(["analyze"])


@pytest.mark.integration
class TestCommands:
    """Test subcommands on small windows."""

    def test_missing_spec(self, tmp_path):
        """A missing spec file exits with 1."""
        assert main(["analyze", "--spec", str(tmp_path / "none.cfg")]) == EXIT_ERROR

    def test_invalid_exponent(self):
        """p = 1 is rejected before any work."""
        assert main(["analyze", "--spec", str(SPECS / "const11.cfg"), "--p", "1"]) == EXIT_ERROR

    def test_analyze(self, tmp_path, capsys):
        """analyze prints the verdict and writes the report and the profile."""
        code = main(["analyze", "--spec", str(SPECS / "const11.cfg"), "--out", str(tmp_path)] + SMALL)
        assert code == EXIT_OK
        assert "solvable=yes" in capsys.readouterr().out
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["verdict"] == "bounded, not compact"
        assert (tmp_path / "aux.csv").exists()

    def test_table_single_cell(self, tmp_path):
        """alpha = beta = 0 matches the known answer."""
        code = main(["table", "--alpha", "0", "--beta", "0", "--out", str(tmp_path)] + SMALL)
        assert code == EXIT_OK
        table = pd.read_csv(tmp_path / "table.csv")
        assert table["match"].all()

    def test_covering_stdout(self, capsys):
        """Without --out the covering is printed as CSV."""
        code = main(["covering", "--spec", str(SPECS / "const11.cfg"), "--window", "1", "--samples", "11"])
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert out.splitlines()[0] == "n,center,left,right"

    def test_spectrum(self, tmp_path):
        """spectrum writes eigenvalues and the Hardy summary."""
        code = main(
            ["spectrum", "--spec", str(SPECS / "const11.cfg"), "--n", "64", "--top", "3", "--out", str(tmp_path)]
            + SMALL
        )
        assert code == EXIT_OK
        summary = json.loads((tmp_path / "spectrum.json").read_text())
        assert summary["spectral"]["lambda_max"] <= 1.001
        assert len(pd.read_csv(tmp_path / "eigenvalues.csv")) == 3

    def test_verify(self, tmp_path):
        """verify passes for r = q = 1 and writes JSON."""
        code = main(["verify", "--spec", str(SPECS / "const11.cfg"), "--out", str(tmp_path)] + SMALL)
        assert code == EXIT_OK
        assert json.loads((tmp_path / "verify.json").read_text())["passed"]
