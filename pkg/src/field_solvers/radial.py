"""
Radial field backend

For a radially symmetric density the field at x depends only on the mass
inside |x|:  E(x) = x / |x|^3 * m(|x|) / (4 pi).  Two realizations:

* RadialProfile: binned cumulative mass, piecewise-linear in r between edges.
  Monotone in r, so |E| <= M / (4 pi |x|^2) holds exactly.
* shell field: one thin shell per particle. Each particle sees the mass of all
  shells strictly inside it plus half of its own; this is the exact gradient
  of the thin-shell energy, so dynamics on it conserve energy to integrator
  order.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict

import numpy as np

from kinetics.exceptions import UndefinedQuantityError, ValidationError
from kinetics.particles import Ensemble

logger = logging.getLogger(__name__)

FOUR_PI = 4.0 * math.pi


@dataclass(frozen=True)
class RadialProfile:
    """
    Cumulative shell-mass table

    Bins are right-closed, (edges[i], edges[i+1]], with r = 0 in the first bin.
    cumulative[i] is the weight with |x| <= edges[i+1]; particles beyond r_max
    are kept out of the table and recorded as overflow_mass.
    """
    edges: np.ndarray
    shell_mass: np.ndarray
    cumulative: np.ndarray
    overflow_mass: float = 0.0
    overflow_count: int = 0

    @property
    def n_bins(self) -> int:
        return int(self.shell_mass.shape[0])

    @property
    def r_max(self) -> float:
        return float(self.edges[-1])

    @property
    def enclosed_mass(self) -> float:
        """Mass inside r_max"""
        return float(self.cumulative[-1]) if self.n_bins else 0.0

    @property
    def total_mass(self) -> float:
        return self.enclosed_mass + self.overflow_mass

    def mass_within(self, r: Any) -> np.ndarray:
        """Piecewise-linear cumulative mass m(r); constant beyond r_max"""
        table = np.concatenate([[0.0], self.cumulative])
        return np.interp(np.asarray(r, dtype=np.float64), self.edges, table)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "edges": self.edges.tolist(),
            "shell_mass": self.shell_mass.tolist(),
            "cumulative": self.cumulative.tolist(),
            "overflow_mass": self.overflow_mass,
            "overflow_count": self.overflow_count,
        }


def build_radial_profile(ensemble: Ensemble, n_bins: int, r_max: float) -> RadialProfile:
    """
    Bin particle weights by |x|

    Args:
        ensemble: particle cloud (may be empty)
        n_bins: number of equal-width bins (>= 1)
        r_max: outer edge of the last bin (> 0)

    Returns:
        RadialProfile; mass beyond r_max is recorded as overflow
    """
    if int(n_bins) != n_bins or n_bins < 1:
        raise ValidationError("profile_bins", "must be a positive integer", n_bins)
    if not (r_max > 0 and math.isfinite(r_max)):
        raise ValidationError("r_max", "must be positive and finite", r_max)
    n_bins = int(n_bins)

    edges = np.linspace(0.0, float(r_max), n_bins + 1)
    r = np.linalg.norm(ensemble.x, axis=1)
    inside = r <= r_max

    index = np.searchsorted(edges, r[inside], side="left") - 1
    index = np.clip(index, 0, n_bins - 1)
    shell_mass = np.bincount(index, weights=ensemble.w[inside], minlength=n_bins).astype(np.float64)
    cumulative = np.cumsum(shell_mass)

    overflow = ~inside
    overflow_mass = math.fsum(ensemble.w[overflow].tolist())
    if overflow_mass > 0:
        logger.debug(f"Radial profile overflow: {int(overflow.sum())} particles, mass {overflow_mass:.6g}")

    return RadialProfile(
        edges=edges,
        shell_mass=shell_mass,
        cumulative=cumulative,
        overflow_mass=overflow_mass,
        overflow_count=int(overflow.sum()),
    )


def radial_field(profile: RadialProfile, x: Any) -> np.ndarray:
    """
    Field of a radial profile, (x / |x|^3) m(|x|) / (4 pi)

    Args:
        profile: cumulative mass table
        x: query position(s), shape (3,) or (n, 3)

    Returns:
        Field vector(s); zero at the origin
    """
    x = np.asarray(x, dtype=np.float64)
    r = np.linalg.norm(x, axis=-1)
    m = profile.mass_within(r)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(r > 0, m / (FOUR_PI * r ** 3), 0.0)
    return x * scale[..., None]


def radial_field_energy(profile: RadialProfile) -> float:
    """
    (1/2) * integral |E|^2 over all space for the binned profile

    Equals (1/8pi) * integral_0^inf m(r)^2 / r^2 dr, evaluated in closed form on
    each bin where m(r) = a + b r, plus the exterior tail m(r_max)^2 / r_max.
    """
    total = []
    for i in range(profile.n_bins):
        r0, r1 = float(profile.edges[i]), float(profile.edges[i + 1])
        m0 = float(profile.cumulative[i - 1]) if i > 0 else 0.0
        b = float(profile.shell_mass[i]) / (r1 - r0)
        a = m0 - b * r0
        if r0 == 0.0:
            total.append(b * b * r1)
            continue
        total.append(a * a * (1.0 / r0 - 1.0 / r1) + 2.0 * a * b * math.log(r1 / r0) + b * b * (r1 - r0))
    m_end = profile.enclosed_mass
    total.append(m_end * m_end / profile.r_max)
    return math.fsum(total) / (2.0 * FOUR_PI)


def _shell_order(x: np.ndarray):
    r = np.linalg.norm(x, axis=1)
    order = np.argsort(r, kind="stable")
    return r, order


def shell_enclosed_mass(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Weight of the shells sorted before each particle plus half its own"""
    _, order = _shell_order(np.asarray(x, dtype=np.float64))
    sorted_w = np.asarray(w, dtype=np.float64)[order]
    enclosed = np.empty_like(sorted_w)
    enclosed[order] = np.cumsum(sorted_w) - 0.5 * sorted_w
    return enclosed


def enclosed_field(x: np.ndarray, enclosed: np.ndarray) -> np.ndarray:
    """x / |x|^3 * enclosed / (4 pi), zero at the origin"""
    x = np.asarray(x, dtype=np.float64)
    r = np.linalg.norm(x, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(r > 0, enclosed / (FOUR_PI * r ** 3), 0.0)
    return x * scale[..., None]


def shell_field(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    """
    Exact thin-shell field at every particle

    Particle i sees the weight of the shells sorted before it plus w_i / 2.

    Args:
        x: positions, shape (n, 3)
        w: weights, shape (n,)

    Returns:
        Field at each particle, shape (n, 3)
    """
    return enclosed_field(x, shell_enclosed_mass(x, w))


def shell_field_energy(x: np.ndarray, w: np.ndarray) -> float:
    """
    Thin-shell field energy, sum_i w_i m_<(i) / (4pi r_i) + w_i^2 / (8pi r_i)

    This is (1/2) * integral |E|^2 for the shell configuration and the
    potential whose negative gradient drives `shell_field`.
    """
    x = np.asarray(x, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    r, order = _shell_order(x)
    occupied = w > 0
    if np.any(occupied & (r == 0)):
        raise UndefinedQuantityError("shell_field_energy", "a weighted particle sits at the origin")
    sorted_w = w[order]
    sorted_r = r[order]
    inner = np.cumsum(sorted_w) - sorted_w
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(sorted_w > 0, sorted_w * (inner + 0.5 * sorted_w) / (FOUR_PI * sorted_r), 0.0)
    return math.fsum(terms.tolist())
