"""
Configuration module for Loewner Lab.

Handles loading defaults from environment variables and the validated solver
settings shared by the integrator, the diagnostics and the experiment suites.
"""

import logging
import os
from typing import Any

from pydantic import BaseModel, ConfigDict, Field

logger = logging.getLogger(__name__)

# Default configuration
DEFAULT_CONFIG: dict[str, Any] = {
    "threads": 1,
    "rel_tol": 1e-9,
    "abs_tol": 1e-9,
    "guard_band": 1e-12,
    "max_steps": 100_000,
    "log_level": "INFO",
}


def get_config() -> dict[str, Any]:
    """
    Load configuration from environment variables.

    Environment Variables:
        LOEWNER_LAB_THREADS: Worker thread cap for suites and grid fallbacks (default: 1)
        LOEWNER_LAB_REL_TOL: Default relative solver tolerance (default: 1e-9)
        LOEWNER_LAB_ABS_TOL: Default absolute solver tolerance (default: 1e-9)
        LOEWNER_LAB_LOG_LEVEL: Logging level for the command line (default: INFO)

    Returns:
        Configuration dictionary
    """
    config = DEFAULT_CONFIG.copy()

    threads = os.environ.get("LOEWNER_LAB_THREADS")
    if threads:
        try:
            value = int(threads)
            if value >= 1:
                config["threads"] = value
            else:
                logger.warning(f"Ignoring LOEWNER_LAB_THREADS={threads!r}: must be >= 1")
        except ValueError:
            logger.warning(f"Ignoring LOEWNER_LAB_THREADS={threads!r}: not an integer")

    for key, env in (("rel_tol", "LOEWNER_LAB_REL_TOL"), ("abs_tol", "LOEWNER_LAB_ABS_TOL")):
        raw = os.environ.get(env)
        if raw:
            try:
                config[key] = float(raw)
            except ValueError:
                pass

    log_level = os.environ.get("LOEWNER_LAB_LOG_LEVEL")
    if log_level:
        config["log_level"] = log_level.strip().upper()

    return config


def worker_count() -> int:
    """Number of worker threads allowed by LOEWNER_LAB_THREADS."""
    return int(get_config()["threads"])


class SolverConfig(BaseModel):
    """
    Settings for the adaptive Runge-Kutta integrator.

    Features:
    - Relative and absolute tolerances bounded to [1e-14, 1e-3]
    - Guard band: solutions are kept inside |w| <= 1 - guard_band
    - Step budget per integration
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    rel_tol: float = Field(1e-9, ge=1e-14, le=1e-3)
    abs_tol: float = Field(1e-9, ge=1e-14, le=1e-3)
    guard_band: float = Field(1e-12, gt=0.0, le=1e-6)
    max_steps: int = Field(100_000, ge=1)

    def tightened(self, tol: float) -> "SolverConfig":
        """Copy with both tolerances lowered to at most ``tol``."""
        return SolverConfig(
            rel_tol=min(self.rel_tol, tol),
            abs_tol=min(self.abs_tol, tol),
            guard_band=self.guard_band,
            max_steps=self.max_steps,
        )


def default_solver_config() -> SolverConfig:
    """Build the solver configuration from the environment."""
    config = get_config()
    try:
        return SolverConfig(
            rel_tol=config["rel_tol"],
            abs_tol=config["abs_tol"],
            guard_band=config["guard_band"],
            max_steps=config["max_steps"],
        )
    except ValueError as e:
        logger.warning(f"Invalid solver tolerances in environment, using defaults: {e}")
        return SolverConfig()
