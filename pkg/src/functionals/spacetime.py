"""
Axis-weighted space-time integrand and the inverse angular-momentum moment
"""

import logging
import math

import numpy as np

from kinetics.exceptions import ValidationError
from kinetics.kinematics import lorentz_factor, planar_angular_momentum, planar_norm
from kinetics.particles import Ensemble
from .cutoffs import psi_at_least

logger = logging.getLogger(__name__)

DEFAULT_AXIS_REGULARIZATION = 1e-3
DEFAULT_INVERSE_POWER = 13


def _check_eps(eps_star: float) -> float:
    if not 0.0 <= eps_star < 0.5:
        raise ValidationError("eps_star", "must lie in [0, 1/2)", eps_star)
    return float(eps_star)


def spacetime_rate(ensemble: Ensemble, eps_star: float,
                   delta0: float = DEFAULT_AXIS_REGULARIZATION) -> float:
    """
    sum_i w_i |v_planar|^(2+2eps) / ((|x_planar| + delta0)^(1-2eps) <v>)

    delta0 keeps particles that pass through the symmetry axis finite.
    """
    eps = _check_eps(eps_star)
    if not delta0 >= 0:
        raise ValidationError("delta0", "must be nonnegative", delta0)
    speed = planar_norm(ensemble.v)
    radius = planar_norm(ensemble.x) + delta0
    moving = speed > 0
    terms = np.zeros(len(ensemble))
    terms[moving] = (
        ensemble.w[moving] * speed[moving] ** (2.0 + 2.0 * eps)
        / (radius[moving] ** (1.0 - 2.0 * eps) * lorentz_factor(ensemble.v[moving]))
    )
    return math.fsum(terms.tolist())


def weighted_spacetime_increment(ensemble: Ensemble, eps_star: float, dt: float,
                                 delta0: float = DEFAULT_AXIS_REGULARIZATION) -> float:
    """
    One-step contribution dt * spacetime_rate to the running A(t)

    Args:
        ensemble: particles at the sampled time
        eps_star: exponent in [0, 1/2)
        dt: step, > 0
        delta0: axis regularization

    Returns:
        Nonnegative increment
    """
    if not (dt > 0 and math.isfinite(dt)):
        raise ValidationError("dt", "must be positive and finite", dt)
    return dt * spacetime_rate(ensemble, eps_star, delta0)


def inverse_angular_momentum_moment(ensemble: Ensemble, floor: float,
                                    power: float = DEFAULT_INVERSE_POWER) -> float:
    """
    J = sum_i w_i |ell_i|^-power psi_{>=floor}(ell_i)

    Args:
        ensemble: particles
        floor: angular-momentum floor, > 0; particles below floor / 2 do not
            contribute and those above floor contribute fully
        power: inverse power of |ell|

    Returns:
        J
    """
    if not (floor > 0 and math.isfinite(floor)):
        raise ValidationError("floor", "must be positive and finite", floor)
    ell = np.abs(planar_angular_momentum(ensemble.x, ensemble.v))
    cut = np.atleast_1d(psi_at_least(ell, floor))
    kept = cut > 0
    terms = ensemble.w[kept] * cut[kept] * ell[kept] ** (-float(power))
    return math.fsum(terms.tolist())
