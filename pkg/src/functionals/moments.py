"""
Momentum moments and the energy triple
"""

import logging
import math
from typing import Any, Dict, NamedTuple, Optional

import numpy as np
from scipy.special import logsumexp

from kinetics.exceptions import ValidationError
from kinetics.kinematics import lorentz_factor
from kinetics.particles import Ensemble
from field_solvers.grid import FieldGrid, grid_field_energy

logger = logging.getLogger(__name__)


def _fsum(values: np.ndarray) -> float:
    return math.fsum(np.asarray(values, dtype=np.float64).ravel().tolist())


def moment(ensemble: Ensemble, n: float) -> float:
    """
    M_n = sum_i w_i (1 + |v_i|)^n

    Args:
        ensemble: particles
        n: moment order, n >= 0

    Returns:
        The moment; n = 0 gives the total mass
    """
    if not (n >= 0 and math.isfinite(n)):
        raise ValidationError("n", "moment order must be finite and nonnegative", n)
    if n == 0:
        return ensemble.total_mass
    speed = np.linalg.norm(ensemble.v, axis=1)
    return _fsum(ensemble.w * (1.0 + speed) ** n)


def log2_moment(ensemble: Ensemble, n: float) -> float:
    """log2 M_n, finite for moment orders whose M_n overflows a double"""
    if len(ensemble) == 0 or ensemble.total_mass == 0.0:
        return -math.inf
    speed = np.linalg.norm(ensemble.v, axis=1)
    return float(logsumexp(n * np.log1p(speed), b=ensemble.w)) / math.log(2.0)


def kinetic_energy(ensemble: Ensemble) -> float:
    """sum_i w_i sqrt(1 + |v_i|^2)"""
    return _fsum(ensemble.w * lorentz_factor(ensemble.v))


def kinetic_energy_abs_v(ensemble: Ensemble) -> float:
    """sum_i w_i |v_i|, the kinetic term as written in the conservation law"""
    return _fsum(ensemble.w * np.linalg.norm(ensemble.v, axis=1))


class EnergyTriple(NamedTuple):
    kinetic: float
    field: float
    total: float

    def to_dict(self) -> Dict[str, float]:
        return self._asdict()


def field_energy(ensemble: Ensemble, field: Any) -> float:
    """
    Field energy for whichever backend produced the field

    A FieldGrid contributes (1/2) sum |E|^2 h^3; an evaluator reports its own
    energy (pairwise for direct sums, shell or profile energy for the radial
    backend, the external potential energy for analytic fields). None means
    no field.
    """
    if field is None:
        return 0.0
    if isinstance(field, FieldGrid):
        return grid_field_energy(field)
    if hasattr(field, "field_energy"):
        return float(field.field_energy(ensemble))
    raise ValidationError("field", "expected a FieldGrid or a field evaluator", type(field).__name__)


def total_energy(ensemble: Ensemble, field: Optional[Any] = None) -> EnergyTriple:
    """
    Kinetic, field and total energy

    Args:
        ensemble: particles
        field: FieldGrid, field evaluator or None

    Returns:
        EnergyTriple with total = kinetic + field
    """
    kinetic = kinetic_energy(ensemble)
    potential = field_energy(ensemble, field)
    return EnergyTriple(kinetic, potential, kinetic + potential)
