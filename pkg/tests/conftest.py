"""Pytest configuration and shared fixtures."""
import sys
from pathlib import Path

import pytest

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from coefficient_model import CoefficientSpec, Window, build_weight_field  # noqa: E402
from principal_solutions import compute_fss  # noqa: E402


@pytest.fixture
def const11():
    """r = q = 1."""
    return build_weight_field(CoefficientSpec.constant(1.0, 1.0))


@pytest.fixture
def const14():
    """r = 1, q = 4."""
    return build_weight_field(CoefficientSpec.constant(1.0, 4.0))


@pytest.fixture
def const41():
    """r = 4, q = 1."""
    return build_weight_field(CoefficientSpec.constant(4.0, 1.0))


@pytest.fixture
def exp_decay():
    """r = q = e^{-|x|}."""
    return build_weight_field(CoefficientSpec.exponential(-1.0, -1.0))


@pytest.fixture
def exp_compact():
    """r = e^{-|x|}, q = e^{|x|}."""
    return build_weight_field(CoefficientSpec.exponential(-1.0, 1.0))


@pytest.fixture
def poly1():
    """r = 1, q = 1 + x^2."""
    return build_weight_field(CoefficientSpec.polynomial(1))


@pytest.fixture
def window10():
    """Small window for fast pipelines."""
    return Window(10.0, 101)


@pytest.fixture
def window20():
    """Default window."""
    return Window(20.0, 401)


@pytest.fixture(scope="module")
def fss_const11():
    """Principal pair for r = q = 1, valid on [-40, 40]."""
    field_ = build_weight_field(CoefficientSpec.constant(1.0, 1.0))
    return compute_fss(field_, Window(20.0, 401), reach=2.0)


@pytest.fixture(scope="module")
def fss_const14():
    """Principal pair for r = 1, q = 4, valid on [-20, 20]."""
    field_ = build_weight_field(CoefficientSpec.constant(1.0, 4.0))
    return compute_fss(field_, Window(10.0, 201), reach=2.0)


@pytest.fixture(scope="module")
def fss_exp_compact():
    """Principal pair for r = e^{-|x|}, q = e^{|x|}, valid on [-40, 40] (stiff sweep)."""
    field_ = build_weight_field(CoefficientSpec.exponential(-1.0, 1.0))
    return compute_fss(field_, Window(20.0, 401), reach=2.0)


@pytest.fixture
def ramp_table(tmp_path):
    """Tabulated x = (0, 1, 2), r = 1, q = (0, 1, 2)."""
    table = tmp_path / "ramp.csv"
    table.write_text("x,r,q\n0,1,0\n1,1,1\n2,1,2\n")
    return str(table)


@pytest.fixture
def write_spec(tmp_path):
    """Factory writing a key=value spec file into tmp_path."""

    def _write(name, text):
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    return _write
