"""Phononic bosonic Josephson junction: full optomechanical model, reduced
two-mode model and classical (z, phi) dynamics with regime analysis."""

__version__ = "0.1.0"

from .bjj import (  # noqa: E402
    BjjParams,
    BjjState,
    BjjTrajectory,
    hamiltonian,
    simulate_bjj,
    simulate_damped,
    simulate_rescaled,
    symmetry_transform,
    tunneling_current,
)
from .ode import IntegrationError, IntegratorOptions, detect_zero_crossings, integrate, resample  # noqa: E402

__all__ = [
    "__version__",
    "BjjParams",
    "BjjState",
    "BjjTrajectory",
    "IntegrationError",
    "IntegratorOptions",
    "detect_zero_crossings",
    "hamiltonian",
    "integrate",
    "resample",
    "simulate_bjj",
    "simulate_damped",
    "simulate_rescaled",
    "symmetry_transform",
    "tunneling_current",
]
