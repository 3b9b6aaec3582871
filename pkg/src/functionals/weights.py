"""
The angular weight omega_mu and its planar x-gradient

With a = x_planar, b = v_planar, p = a.b, c = a x b and u = p / (|a||b|):

    omega_mu = (mu |a||b| p phi_L(mu u) + c^2)^eps * phi(mu (u + 1/2))

where phi_L = phi_{-10 Mt}. omega is extended by zero where |a||b| = 0.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Tuple

import numpy as np

from kinetics.exceptions import ValidationError
from .cutoffs import cutoff_phi, cutoff_phi_derivative

logger = logging.getLogger(__name__)

POSITIVITY_TOLERANCE = 1e-10


@dataclass(frozen=True)
class WeightParams:
    """Sign mu, dyadic scale Mt and exponent eps_star of the weight"""
    mu: int = 1
    Mt: int = 10
    eps_star: float = 0.01

    def __post_init__(self):
        if self.mu not in (1, -1):
            raise ValidationError("mu", "must be +1 or -1", self.mu)
        if int(self.Mt) != self.Mt or self.Mt < 0:
            raise ValidationError("Mt", "must be a nonnegative integer", self.Mt)
        if not 0.0 < self.eps_star < 0.5:
            raise ValidationError("eps_star", "must lie in (0, 1/2)", self.eps_star)

    @property
    def inner_scale(self) -> int:
        """l of the inner cutoff phi_l"""
        return -10 * int(self.Mt)

    def to_dict(self) -> Dict[str, Any]:
        return {"mu": self.mu, "Mt": int(self.Mt), "eps_star": self.eps_star}


def _planar(x: Any, v: Any) -> Tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if x.shape != v.shape or x.shape[-1] != 3:
        raise ValidationError("x, v", "expected matching (..., 3) arrays", (x.shape, v.shape))
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
        raise ValidationError("x, v", "non-finite phase point")
    return x[..., :2], v[..., :2]


def omega_weight(x: Any, v: Any, params: WeightParams) -> Tuple[Any, np.ndarray]:
    """
    Weight value and its gradient in the planar position

    Args:
        x: position(s), shape (3,) or (n, 3)
        v: momentum(s) with the same shape
        params: WeightParams

    Returns:
        (value, gradient) with value a float or shape (n,), gradient shape
        (2,) or (n, 2)
    """
    a, b = _planar(x, v)
    single = a.ndim == 1
    a, b = np.atleast_2d(a), np.atleast_2d(b)
    mu, eps, l = float(params.mu), float(params.eps_star), params.inner_scale

    na = np.hypot(a[..., 0], a[..., 1])
    nb = np.hypot(b[..., 0], b[..., 1])
    active = (na > 0.0) & (nb > 0.0)
    na_s = np.where(active, na, 1.0)
    nb_s = np.where(active, nb, 1.0)

    p = np.einsum("...i,...i->...", a, b)
    c = a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
    u = np.clip(p / (na_s * nb_s), -1.0, 1.0)

    inner = cutoff_phi(mu * u, l)
    inner_d = cutoff_phi_derivative(mu * u, l)
    outer = cutoff_phi(mu * (u + 0.5))
    outer_d = cutoff_phi_derivative(mu * (u + 0.5))

    base = mu * na * nb * p * inner + c * c
    positive = active & (base > 0.0)
    base_s = np.where(positive, base, 1.0)
    power = base_s ** eps

    value = np.where(positive, power * outer, 0.0)

    a_hat = a / na_s[..., None]
    du = (b - (u * nb_s / na_s)[..., None] * a) / (na_s * nb_s)[..., None]
    d_base = (
        mu * nb[..., None] * (
            a_hat * (p * inner)[..., None]
            + b * (na * inner)[..., None]
            + du * (na * p * inner_d * mu)[..., None]
        )
        + 2.0 * c[..., None] * np.stack([b[..., 1], -b[..., 0]], axis=-1)
    )
    d_outer = du * (outer_d * mu)[..., None]
    gradient = (eps * power / base_s * outer)[..., None] * d_base + power[..., None] * d_outer
    gradient = np.where(positive[..., None], gradient, 0.0)

    if single:
        return float(value[0]), gradient[0]
    return value, gradient


def transport_derivative(x: Any, v: Any, params: WeightParams) -> np.ndarray:
    """mu * v_planar . grad_x_planar omega_mu"""
    _, gradient = omega_weight(x, v, params)
    b = np.asarray(v, dtype=np.float64)[..., :2]
    return params.mu * np.einsum("...i,...i->...", b, gradient)


@dataclass
class PositivityReport:
    """Outcome of weight_positivity_check"""
    samples: int
    minimum: float
    tolerance: float
    passed: bool
    active_samples: int
    fitted_constant: float

    def to_dict(self) -> Dict[str, Any]:
        return dict(self.__dict__)


def weight_positivity_check(x: Any, v: Any, params: WeightParams,
                            tolerance: float = POSITIVITY_TOLERANCE) -> PositivityReport:
    """
    Evaluate mu v_planar . grad omega_mu on samples

    The derivative is bounded below by a constant times
    |v_planar|^(1+2eps) / |x_planar|^(1-2eps) * phi_L(mu u) wherever both
    cutoffs are active; the fitted constant is the smallest observed ratio
    over those samples (nan when there are none).

    Args:
        x: positions, shape (n, 3), with nonzero planar part
        v: momenta, shape (n, 3), with nonzero planar part
        params: WeightParams
        tolerance: allowed negative roundoff

    Returns:
        PositivityReport
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    v = np.atleast_2d(np.asarray(v, dtype=np.float64))
    derivative = np.atleast_1d(transport_derivative(x, v, params))
    minimum = float(np.min(derivative)) if derivative.size else 0.0

    a, b = x[:, :2], v[:, :2]
    na, nb = np.hypot(a[:, 0], a[:, 1]), np.hypot(b[:, 0], b[:, 1])
    with np.errstate(invalid="ignore", divide="ignore"):
        u = np.einsum("ij,ij->i", a, b) / (na * nb)
    eps, mu = params.eps_star, params.mu
    inner = np.atleast_1d(cutoff_phi(mu * u, params.inner_scale))
    outer = np.atleast_1d(cutoff_phi(mu * (u + 0.5)))
    active = (na > 0) & (nb > 0) & (inner > 0) & (outer > 0)
    if np.any(active):
        lower = nb[active] ** (1 + 2 * eps) / na[active] ** (1 - 2 * eps) * inner[active]
        fitted = float(np.min(derivative[active] / lower))
    else:
        fitted = math.nan

    passed = minimum >= -tolerance
    if not passed:
        logger.warning(f"Weight transport derivative reached {minimum:.3e} on {derivative.size} samples")
    return PositivityReport(
        samples=int(derivative.size),
        minimum=minimum,
        tolerance=tolerance,
        passed=bool(passed),
        active_samples=int(np.count_nonzero(active)),
        fitted_constant=fitted,
    )
