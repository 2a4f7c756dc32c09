#!/usr/bin/env python3
"""
Central configuration for the Sturm-Liouville resolvent toolkit.
"""

import os
import json
from pathlib import Path
from typing import Dict, Any, List, Optional


class Config:
    """Project configuration singleton."""

    _instance: Optional["Config"] = None
    _config: Dict[str, Any] = {}

    def __new__(cls) -> "Config":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
            cls._instance._load_config()
        return cls._instance

    def _load_config(self) -> None:
        """Load configuration from file or environment."""
        config_file = Path(__file__).parent.parent / "config.json"

        if config_file.exists():
            with open(config_file, encoding="utf-8") as f:
                self._config = json.load(f)
        else:
            # Default configuration
            self._config = self._get_default_config()

        # Override with environment variables
        self._apply_env_overrides()

    def _get_default_config(self) -> Dict[str, Any]:
        """Get default configuration."""
        return {
            "window": {
                "half_width": 20.0,
                "samples": 401,
                "extension": 2.0,
            },
            "roots": {
                "initial_bracket": 1.0,
                "radius_factor": 8.0,
                "default_radius": 1.0e4,
                "abs_tol": 1.0e-12,
                "rel_tol": 1.0e-12,
                "max_iter": 400,
            },
            "quadrature": {
                "abs_tol": 1.0e-10,
                "rel_tol": 1.0e-8,
                "gauss_nodes": 24,
            },
            "geometry": {
                "h_grid_points": 16001,
                "sup_probes": 400,
                "sup_radius": 80.0,
                "phi_psi_ratio_limit": 10.0,
                "max_segments": 100000,
            },
            "fss": {
                "method": "RK45",
                "stiff_method": "Radau",
                "stiffness_threshold": 2.0e4,
                "rtol": 1.0e-10,
                "atol": 1.0e-14,
                "wronskian_tol": 1.0e-6,
                "fd_step": 1.0e-4,
                "derivative_slack": 1.0e-3,
                "reach": 4.0,
            },
            "trend": {
                "factor": 2.0,
                "multipliers": [1.0, 2.0, 4.0],
            },
            "hardy": {
                "p": 2.0,
                "n": 512,
                "refine": 8,
                "power_steps": 50,
                "max_iter": 5000,
                "tol": 1.0e-10,
                "tail_tol": 1.0e-6,
            },
            "spectral": {
                "n": 512,
                "top": 10,
                "tol": 1.0e-8,
                "max_iter": 20000,
                "envelope": 64.0,
            },
            "verify": {
                "seed": 12345,
                "probes": 50,
                "pairs": 100,
            },
            "logging": {
                "level": "INFO",
                "format": "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
            },
        }

    def _apply_env_overrides(self) -> None:
        """Override config with environment variables."""
        if "SRT_LOG" in os.environ:
            self._config.setdefault("logging", {})["level"] = os.environ["SRT_LOG"]
        if "SRT_SEED" in os.environ:
            self._config.setdefault("verify", {})["seed"] = int(os.environ["SRT_SEED"])

    def get(self, key: str, default: Any = None) -> Any:
        """Get configuration value using dot notation.

        Args:
            key: Configuration key (e.g., "roots.radius_factor")
            default: Default value if key not found

        Returns:
            Configuration value or default
        """
        keys = key.split(".")
        value = self._config
        for k in keys:
            if isinstance(value, dict):
                value = value.get(k)
            else:
                return default
        return value if value is not None else default

    @property
    def log_level(self) -> str:
        """Get logging level name."""
        return str(self.get("logging.level", "INFO")).upper()

    @property
    def log_format(self) -> str:
        """Get logging format string."""
        return str(
            self.get(
                "logging.format",
                "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
            )
        )

    @property
    def default_half_width(self) -> float:
        """Get default window half-width X."""
        return float(self.get("window.half_width", 20.0))

    @property
    def default_samples(self) -> int:
        """Get default number of window samples N."""
        return int(self.get("window.samples", 401))

    @property
    def window_extension(self) -> float:
        """Get factor by which the sweep domain exceeds the reported domain."""
        return float(self.get("window.extension", 2.0))

    @property
    def initial_bracket(self) -> float:
        """Get the initial bracket length for the unit-level solvers."""
        return float(self.get("roots.initial_bracket", 1.0))

    @property
    def radius_factor(self) -> float:
        """Get the search radius as a multiple of the window half-width."""
        return float(self.get("roots.radius_factor", 8.0))

    @property
    def default_radius(self) -> float:
        """Get the search radius used when no window is given."""
        return float(self.get("roots.default_radius", 1.0e4))

    @property
    def root_abs_tol(self) -> float:
        """Get absolute bisection tolerance."""
        return float(self.get("roots.abs_tol", 1.0e-12))

    @property
    def root_rel_tol(self) -> float:
        """Get relative bisection tolerance."""
        return float(self.get("roots.rel_tol", 1.0e-12))

    @property
    def root_max_iter(self) -> int:
        """Get the cap on bracketing plus bisection steps."""
        return int(self.get("roots.max_iter", 400))

    @property
    def quad_abs_tol(self) -> float:
        """Get absolute tolerance for adaptive quadrature."""
        return float(self.get("quadrature.abs_tol", 1.0e-10))

    @property
    def quad_rel_tol(self) -> float:
        """Get relative tolerance for adaptive quadrature."""
        return float(self.get("quadrature.rel_tol", 1.0e-8))

    @property
    def gauss_nodes(self) -> int:
        """Get Gauss-Legendre order per panel."""
        return int(self.get("quadrature.gauss_nodes", 24))

    @property
    def h_grid_points(self) -> int:
        """Get number of nodes of the tabulated h evaluator."""
        return int(self.get("geometry.h_grid_points", 16001))

    @property
    def sup_probes(self) -> int:
        """Get number of uniform probes for the smooth-asymptotics sups."""
        return int(self.get("geometry.sup_probes", 400))

    @property
    def sup_radius(self) -> float:
        """Get the probe radius in units of dhat."""
        return float(self.get("geometry.sup_radius", 80.0))

    @property
    def phi_psi_ratio_limit(self) -> float:
        """Get the phi/psi ratio above which mu-based outputs are conditional."""
        return float(self.get("geometry.phi_psi_ratio_limit", 10.0))

    @property
    def max_segments(self) -> int:
        """Get the cap on covering segments per direction."""
        return int(self.get("geometry.max_segments", 100000))

    @property
    def fss_method(self) -> str:
        """Get the explicit ODE method for the FSS sweeps."""
        return str(self.get("fss.method", "RK45"))

    @property
    def fss_stiff_method(self) -> str:
        """Get the implicit ODE method used for stiff sweeps."""
        return str(self.get("fss.stiff_method", "Radau"))

    @property
    def stiffness_threshold(self) -> float:
        """Get the stiffness estimate above which the implicit method is used."""
        return float(self.get("fss.stiffness_threshold", 2.0e4))

    @property
    def fss_rtol(self) -> float:
        """Get relative tolerance of the FSS sweeps."""
        return float(self.get("fss.rtol", 1.0e-10))

    @property
    def fss_atol(self) -> float:
        """Get absolute tolerance of the FSS sweeps."""
        return float(self.get("fss.atol", 1.0e-14))

    @property
    def wronskian_tol(self) -> float:
        """Get the maximal admissible Wronskian residual."""
        return float(self.get("fss.wronskian_tol", 1.0e-6))

    @property
    def fd_step(self) -> float:
        """Get the finite-difference step used on the dense FSS."""
        return float(self.get("fss.fd_step", 1.0e-4))

    @property
    def derivative_slack(self) -> float:
        """Get the slack on the bound r|rho'| < 1."""
        return float(self.get("fss.derivative_slack", 1.0e-3))

    @property
    def fss_reach(self) -> float:
        """Get how far beyond X the pipeline FSS is valid, in units of X."""
        return float(self.get("fss.reach", 4.0))

    @property
    def trend_factor(self) -> float:
        """Get the growth/decay factor per window doubling."""
        return float(self.get("trend.factor", 2.0))

    @property
    def trend_multipliers(self) -> List[float]:
        """Get nested window multipliers."""
        return [float(m) for m in self.get("trend.multipliers", [1.0, 2.0, 4.0])]

    @property
    def hardy_p(self) -> float:
        """Get default Lebesgue exponent."""
        return float(self.get("hardy.p", 2.0))

    @property
    def hardy_n(self) -> int:
        """Get default discretization size for operator norms."""
        return int(self.get("hardy.n", 512))

    @property
    def hardy_refine(self) -> int:
        """Get refinement factor of the Hardy integration grid."""
        return int(self.get("hardy.refine", 8))

    @property
    def power_steps(self) -> int:
        """Get number of dual-pairing steps for general p."""
        return int(self.get("hardy.power_steps", 50))

    @property
    def norm_max_iter(self) -> int:
        """Get iteration cap for p = 2 norm iterations."""
        return int(self.get("hardy.max_iter", 5000))

    @property
    def norm_tol(self) -> float:
        """Get relative convergence tolerance for norm iterations."""
        return float(self.get("hardy.tol", 1.0e-10))

    @property
    def tail_tol(self) -> float:
        """Get relative size of a truncated tail that triggers a flag."""
        return float(self.get("hardy.tail_tol", 1.0e-6))

    @property
    def spectral_n(self) -> int:
        """Get default discretization size for eigenvalues."""
        return int(self.get("spectral.n", 512))

    @property
    def spectral_top(self) -> int:
        """Get number of eigenvalues extracted by deflation."""
        return int(self.get("spectral.top", 10))

    @property
    def spectral_tol(self) -> float:
        """Get relative convergence tolerance for eigenvalues."""
        return float(self.get("spectral.tol", 1.0e-8))

    @property
    def spectral_max_iter(self) -> int:
        """Get iteration cap per eigenvalue."""
        return int(self.get("spectral.max_iter", 20000))

    @property
    def envelope(self) -> float:
        """Get the two-sided envelope constant for lambda/B."""
        return float(self.get("spectral.envelope", 64.0))

    @property
    def seed(self) -> int:
        """Get seed for randomized probe points."""
        return int(self.get("verify.seed", 12345))

    @property
    def probes(self) -> int:
        """Get number of random (x, t) probes for local checks."""
        return int(self.get("verify.probes", 50))

    @property
    def pairs(self) -> int:
        """Get number of random pairs/nodes for representation checks."""
        return int(self.get("verify.pairs", 100))


# Global config instance
config = Config()
