"""
Configuration management for the XX-chain entanglement engine.
Loads numerical tolerances, solver grids and logging settings from
environment variables with defaults that reproduce the documented behavior.
"""

import os
from dataclasses import dataclass
from typing import Optional

try:
    from dotenv import load_dotenv
    load_dotenv()
except ImportError:
    # python-dotenv not installed; rely on the process environment
    pass


@dataclass
class Config:
    """
    Engine configuration loaded from environment variables.
    """

    # Logging Configuration
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")
    LOG_FILE: Optional[str] = os.getenv("LOG_FILE", "")
    LOG_TO_CONSOLE: bool = os.getenv(
        "LOG_TO_CONSOLE", "true").lower() == "true"

    # Quadrature (thermodynamic-limit contractions)
    QUAD_ORDER: int = int(os.getenv("QUAD_ORDER", "32"))
    QUAD_START_PANELS: int = int(os.getenv("QUAD_START_PANELS", "4"))
    QUAD_MAX_PANELS: int = int(os.getenv("QUAD_MAX_PANELS", "4096"))
    QUAD_TOLERANCE: float = float(os.getenv("QUAD_TOLERANCE", "1e-11"))
    # Split panels at the Fermi angle once beta*|v| exceeds this
    QUAD_FERMI_SPLIT_BETA: float = float(
        os.getenv("QUAD_FERMI_SPLIT_BETA", "50"))

    # Numerical tolerances (energies in units of |v|)
    LEVEL_CROSSING_TOL: float = float(
        os.getenv("LEVEL_CROSSING_TOL", "1e-12"))
    SINGULAR_BETA_LAMBDA: float = float(
        os.getenv("SINGULAR_BETA_LAMBDA", "1e-6"))
    PERTURBATION_DELTA: float = float(
        os.getenv("PERTURBATION_DELTA", "1e-8"))
    PROBABILITY_SLACK: float = float(
        os.getenv("PROBABILITY_SLACK", "1e-12"))
    HIGH_FIELD_VALIDITY: float = float(
        os.getenv("HIGH_FIELD_VALIDITY", "0.1"))

    # Limit-temperature solver
    LIMIT_T_MIN: float = float(os.getenv("LIMIT_T_MIN", "1e-6"))
    LIMIT_T_MAX: float = float(os.getenv("LIMIT_T_MAX", "64"))
    LIMIT_GRID_POINTS: int = int(os.getenv("LIMIT_GRID_POINTS", "96"))
    LIMIT_T_TOL: float = float(os.getenv("LIMIT_T_TOL", "1e-8"))

    # Exact diagonalization oracle
    ED_MAX_SITES: int = int(os.getenv("ED_MAX_SITES", "12"))

    # Sweep execution and output
    SWEEP_WORKERS: int = int(os.getenv("SWEEP_WORKERS", "1"))
    OUTPUT_SIG_DIGITS: int = int(os.getenv("OUTPUT_SIG_DIGITS", "15"))

    def validate(self) -> None:
        """
        Validate configuration and raise errors for invalid settings.

        Raises:
            ValueError: If configuration is invalid
        """
        positive = {
            "QUAD_TOLERANCE": self.QUAD_TOLERANCE,
            "LEVEL_CROSSING_TOL": self.LEVEL_CROSSING_TOL,
            "SINGULAR_BETA_LAMBDA": self.SINGULAR_BETA_LAMBDA,
            "PERTURBATION_DELTA": self.PERTURBATION_DELTA,
            "PROBABILITY_SLACK": self.PROBABILITY_SLACK,
            "HIGH_FIELD_VALIDITY": self.HIGH_FIELD_VALIDITY,
            "LIMIT_T_MIN": self.LIMIT_T_MIN,
            "LIMIT_T_TOL": self.LIMIT_T_TOL,
        }
        for name, value in positive.items():
            if value <= 0:
                raise ValueError(f"{name} must be positive, got {value}")

        if self.QUAD_ORDER < 2:
            raise ValueError(
                f"QUAD_ORDER must be at least 2, got {self.QUAD_ORDER}"
            )

        if self.QUAD_START_PANELS <= 0 or self.QUAD_MAX_PANELS < self.QUAD_START_PANELS:
            raise ValueError(
                "QUAD_START_PANELS must be positive and not exceed QUAD_MAX_PANELS, "
                f"got {self.QUAD_START_PANELS} and {self.QUAD_MAX_PANELS}"
            )

        if self.LIMIT_GRID_POINTS < 64:
            raise ValueError(
                f"LIMIT_GRID_POINTS must be at least 64, got {self.LIMIT_GRID_POINTS}"
            )

        if self.LIMIT_T_MIN >= self.LIMIT_T_MAX:
            raise ValueError(
                f"LIMIT_T_MIN must be below LIMIT_T_MAX, got {self.LIMIT_T_MIN} >= {self.LIMIT_T_MAX}"
            )

        if self.ED_MAX_SITES < 2 or self.ED_MAX_SITES > 12:
            raise ValueError(
                f"ED_MAX_SITES must be between 2 and 12, got {self.ED_MAX_SITES}"
            )

        if self.SWEEP_WORKERS == 0:
            raise ValueError("SWEEP_WORKERS must be non-zero (use -1 for all cores)")

        if self.OUTPUT_SIG_DIGITS < 1 or self.OUTPUT_SIG_DIGITS > 17:
            raise ValueError(
                f"OUTPUT_SIG_DIGITS must be between 1 and 17, got {self.OUTPUT_SIG_DIGITS}"
            )


# Global configuration instance
config = Config()


def load_config(validate: bool = True) -> Config:
    """
    Load and optionally validate configuration.

    Args:
        validate: Whether to validate configuration

    Returns:
        Configuration instance

    Raises:
        ValueError: If validation enabled and configuration invalid
    """
    if validate:
        config.validate()

    return config


# Warning flags carried from the numerical modules into output rows
FLAG_PERTURBED = "critical-field-perturbed"
FLAG_NEAR_SINGULAR = "near-singular-sector"
FLAG_HIGH_FIELD_VALIDITY = "high-field-validity"
FLAG_ASYMPTOTIC_MARGIN = "high-field-asymptotic-margin"
FLAG_GRID_RESOLUTION = "grid-resolution"
FLAG_GROUND_STATE = "ground-state-analytic"

# Sweep output header (fixed order)
SWEEP_COLUMNS = [
    "mode", "n", "v", "b", "T", "L",
    "C", "E", "p_plus", "p_mid", "p_minus", "alpha", "flags",
]

CRITICAL_FIELD_COLUMNS = ["N", "b_N"]
RANGE_COLUMN = "L_m"

LIMIT_TEMP_COLUMNS = ["n", "v", "b", "L", "T_limit", "T_on_list", "method", "flags"]

STAGGERING_COLUMNS = ["n", "v", "L", "T_plateau", "T_closed_form"]
