"""
Functionals

Scalar functionals of an ensemble (moments, energies, the axis-weighted
space-time integral, the inverse angular-momentum moment, the angular weight
omega_mu), the diagnostics engine that tracks them through a run, and
majority-set reports over logged trajectories.
"""

from .cutoffs import BumpProfile, BUMP_PROFILE, bump, cutoff_phi, cutoff_phi_derivative, psi_at_least
from .moments import (
    EnergyTriple,
    field_energy,
    kinetic_energy,
    kinetic_energy_abs_v,
    log2_moment,
    moment,
    total_energy,
)
from .weights import PositivityReport, WeightParams, omega_weight, transport_derivative, weight_positivity_check
from .spacetime import (
    DEFAULT_AXIS_REGULARIZATION,
    inverse_angular_momentum_moment,
    spacetime_rate,
    weighted_spacetime_increment,
)
from .surrogates import (
    MomentSurrogates,
    MomentTracker,
    beta_exponent,
    cylindrical_majority,
    dyadic_scale,
    enlarged_log2,
    localization_epsilon,
    radial_threshold,
)
from .majority import MajorityParams, MajorityReport, majority_report
from .series import DiagnosticsRecord, DiagnosticsSeries, series_columns
from .engine import DiagnosticsEngine, FunctionalParams

__all__ = [
    "BumpProfile",
    "BUMP_PROFILE",
    "bump",
    "cutoff_phi",
    "cutoff_phi_derivative",
    "psi_at_least",
    "EnergyTriple",
    "field_energy",
    "kinetic_energy",
    "kinetic_energy_abs_v",
    "log2_moment",
    "moment",
    "total_energy",
    "PositivityReport",
    "WeightParams",
    "omega_weight",
    "transport_derivative",
    "weight_positivity_check",
    "DEFAULT_AXIS_REGULARIZATION",
    "inverse_angular_momentum_moment",
    "spacetime_rate",
    "weighted_spacetime_increment",
    "MomentSurrogates",
    "MomentTracker",
    "beta_exponent",
    "cylindrical_majority",
    "dyadic_scale",
    "enlarged_log2",
    "localization_epsilon",
    "radial_threshold",
    "MajorityParams",
    "MajorityReport",
    "majority_report",
    "DiagnosticsRecord",
    "DiagnosticsSeries",
    "series_columns",
    "DiagnosticsEngine",
    "FunctionalParams",
]
