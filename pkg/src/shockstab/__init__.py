"""Numerical laboratory for viscous shock stability.

Computes standing shock profiles of hyperbolic-parabolic conservation
laws, verifies the Evans-function spectral stability condition, evolves
perturbed profiles, and checks the quantitative ingredients of nonlinear
orbital stability: phase-shift dynamics, rate-weighted norm functionals,
the time-integrated pointwise ("vertical") estimate, analytic kernel
bounds, and the high-norm damping inequality.
"""

from shockstab import analysis, kernels, models, profile, sim, spectral
from shockstab.models import (
    FluxViscositySystem,
    available_models,
    check_assumptions,
    evaluate_system,
    get_model,
)
from shockstab.profile import (
    CharacteristicData,
    ShockProfile,
    ShockType,
    characteristic_data,
    classify_shock,
    solve_profile,
)

__version__ = "0.1.0"

__all__ = [
    "FluxViscositySystem",
    "ShockProfile",
    "CharacteristicData",
    "ShockType",
    "analysis",
    "available_models",
    "characteristic_data",
    "check_assumptions",
    "classify_shock",
    "evaluate_system",
    "get_model",
    "kernels",
    "models",
    "profile",
    "sim",
    "solve_profile",
    "spectral",
    "__version__",
]
