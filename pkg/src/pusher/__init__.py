"""
Pusher

Integrates the characteristic ODEs dX/ds = V / <V>, dV/ds = E(X) for a whole
ensemble against a field backend and records trajectories.
"""

from .evaluators import (
    FieldMode,
    FieldEvaluator,
    ShellFieldEvaluator,
    RadialProfileEvaluator,
    DirectFieldEvaluator,
    GridFieldEvaluator,
    AnalyticField,
    PointChargeField,
    PlanarRadialField,
    UniformField,
    ZeroField,
    build_field,
)
from .monitors import StepMonitor, monotone_quantity
from .trajectory import TrajectoryLog, TRAJECTORY_COLUMNS, evenly_spaced_ids
from .integrator import (
    IntegratorConfig,
    IntegrationState,
    IntegrationResult,
    LeapfrogStepper,
    push,
    integrate,
    uniform_steps,
    record_times,
)

__all__ = [
    "FieldMode",
    "FieldEvaluator",
    "ShellFieldEvaluator",
    "RadialProfileEvaluator",
    "DirectFieldEvaluator",
    "GridFieldEvaluator",
    "AnalyticField",
    "PointChargeField",
    "PlanarRadialField",
    "UniformField",
    "ZeroField",
    "build_field",
    "StepMonitor",
    "monotone_quantity",
    "TrajectoryLog",
    "TRAJECTORY_COLUMNS",
    "evenly_spaced_ids",
    "IntegratorConfig",
    "IntegrationState",
    "IntegrationResult",
    "LeapfrogStepper",
    "push",
    "integrate",
    "uniform_steps",
    "record_times",
]
