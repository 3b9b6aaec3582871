"""
Kinetic core for the relativistic Vlasov-Poisson simulator

Particles, ensembles, initial-data scenarios and the relativistic kinematics
shared by every other package.
"""

from .exceptions import (
    RVPException,
    ValidationError,
    ConfigurationError,
    ConfigParseError,
    IntegrationBlowupError,
    UndefinedQuantityError,
    ResolutionError,
    CoverageError,
    SolverResourceError,
    CheckpointError,
    OutputExistsError,
)
from .kinematics import (
    lorentz_factor,
    relativistic_velocity,
    planar_angular_momentum,
    angular_momentum,
    planar_norm,
    norm,
    rotate_planar,
)
from .particles import Particle, Ensemble, block_slices
from .scenarios import Scenario, ScenarioKind, SCENARIO_DEFAULTS, sample_initial_ensemble

__version__ = "1.0.0"

__all__ = [
    "RVPException",
    "ValidationError",
    "ConfigurationError",
    "ConfigParseError",
    "IntegrationBlowupError",
    "UndefinedQuantityError",
    "ResolutionError",
    "CoverageError",
    "SolverResourceError",
    "CheckpointError",
    "OutputExistsError",
    "lorentz_factor",
    "relativistic_velocity",
    "planar_angular_momentum",
    "angular_momentum",
    "planar_norm",
    "norm",
    "rotate_planar",
    "Particle",
    "Ensemble",
    "block_slices",
    "Scenario",
    "ScenarioKind",
    "SCENARIO_DEFAULTS",
    "sample_initial_ensemble",
]
