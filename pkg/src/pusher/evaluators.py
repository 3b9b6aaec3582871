"""
Field evaluators

A FieldEvaluator is a field frozen at the instant it was built. The pusher asks
it for the field on each particle (`particle_field`) and at arbitrary points
(`field_at`); the functionals ask it for the field energy of an ensemble.

Self-consistent modes (radial, direct, grid) are rebuilt from the ensemble by
`build_field`; analytic modes are external fields that never change.
"""

import logging
import math
from abc import ABC, abstractmethod
from enum import Enum
from typing import Any, Dict, Optional, Sequence

import numpy as np

from field_solvers.direct import direct_particle_field, direct_sum_field, pairwise_field_energy
from field_solvers.grid import (
    FieldGrid,
    GridSpec,
    grid_deposit,
    grid_field_energy,
    grid_poisson_solve,
    interpolate_field,
)
from field_solvers.radial import (
    build_radial_profile,
    enclosed_field,
    radial_field,
    radial_field_energy,
    shell_enclosed_mass,
    shell_field_energy,
)
from kinetics.exceptions import ConfigurationError, ValidationError
from kinetics.particles import Ensemble

logger = logging.getLogger(__name__)

FOUR_PI = 4.0 * math.pi


class FieldMode(str, Enum):
    """Field backends available to the pusher"""
    RADIAL = "radial"
    DIRECT = "direct"
    GRID = "grid"
    POINT_CHARGE = "point-charge"
    PLANAR_RADIAL = "planar-radial"
    UNIFORM = "uniform"
    ZERO = "zero"

    @property
    def self_consistent(self) -> bool:
        return self in (FieldMode.RADIAL, FieldMode.DIRECT, FieldMode.GRID)


class FieldEvaluator(ABC):
    """A field held fixed between rebuilds"""

    mode: FieldMode

    @abstractmethod
    def particle_field(self, x: np.ndarray) -> np.ndarray:
        """Field on particle i at x[i], excluding its own contribution"""

    @abstractmethod
    def field_at(self, points: Any) -> np.ndarray:
        """Field at arbitrary points"""

    @abstractmethod
    def field_energy(self, ensemble: Ensemble) -> float:
        """Field energy of the ensemble's current configuration"""

    @property
    def source_positions(self) -> Optional[np.ndarray]:
        """Positions the field was built from (None for external fields)"""
        return None

    def describe(self) -> Dict[str, Any]:
        return {"mode": self.mode.value}


class ShellFieldEvaluator(FieldEvaluator):
    """Radial backend with one thin shell per particle"""

    mode = FieldMode.RADIAL

    def __init__(self, ensemble: Ensemble):
        self._x = np.array(ensemble.x)
        self._w = np.asarray(ensemble.w)
        self._enclosed = shell_enclosed_mass(self._x, self._w)
        r = np.linalg.norm(self._x, axis=1)
        order = np.argsort(r, kind="stable")
        self._sorted_r = r[order]
        self._cumulative = np.cumsum(self._w[order])

    def particle_field(self, x: np.ndarray) -> np.ndarray:
        return enclosed_field(x, self._enclosed)

    def field_at(self, points: Any) -> np.ndarray:
        points = np.asarray(points, dtype=np.float64)
        r = np.linalg.norm(points, axis=-1)
        inside = np.searchsorted(self._sorted_r, r, side="left")
        enclosed = np.where(inside > 0, self._cumulative[np.maximum(inside - 1, 0)], 0.0) if self._cumulative.size else np.zeros_like(r)
        return enclosed_field(points, enclosed)

    def field_energy(self, ensemble: Ensemble) -> float:
        return shell_field_energy(ensemble.x, ensemble.w)

    @property
    def source_positions(self) -> np.ndarray:
        return self._x

    def describe(self) -> Dict[str, Any]:
        return {"mode": self.mode.value, "profile_bins": 0}


class RadialProfileEvaluator(FieldEvaluator):
    """Radial backend on a binned cumulative-mass profile"""

    mode = FieldMode.RADIAL

    def __init__(self, ensemble: Ensemble, n_bins: int, r_max: float):
        self.n_bins = n_bins
        self.r_max = r_max
        self._x = np.array(ensemble.x)
        self.profile = build_radial_profile(ensemble, n_bins, r_max)
        if self.profile.overflow_count:
            logger.warning(
                f"{self.profile.overflow_count} particles beyond r_max={r_max}; "
                f"their mass ({self.profile.overflow_mass:.6g}) is left out of the field"
            )

    def particle_field(self, x: np.ndarray) -> np.ndarray:
        return radial_field(self.profile, x)

    def field_at(self, points: Any) -> np.ndarray:
        return radial_field(self.profile, points)

    def field_energy(self, ensemble: Ensemble) -> float:
        return radial_field_energy(build_radial_profile(ensemble, self.n_bins, self.r_max))

    @property
    def source_positions(self) -> np.ndarray:
        return self._x

    def describe(self) -> Dict[str, Any]:
        return {"mode": self.mode.value, "profile_bins": self.n_bins, "r_max": self.r_max}


class DirectFieldEvaluator(FieldEvaluator):
    """Softened direct summation over a snapshot of the particles"""

    mode = FieldMode.DIRECT

    def __init__(self, ensemble: Ensemble, softening: float):
        self.softening = softening
        self._ensemble = ensemble

    def particle_field(self, x: np.ndarray) -> np.ndarray:
        return direct_particle_field(self._ensemble.x, self._ensemble.w, x, self.softening)

    def field_at(self, points: Any) -> np.ndarray:
        points = np.asarray(points, dtype=np.float64)
        return direct_sum_field(self._ensemble, points, self.softening).reshape(points.shape)

    def field_energy(self, ensemble: Ensemble) -> float:
        return pairwise_field_energy(ensemble, self.softening)

    @property
    def source_positions(self) -> np.ndarray:
        return self._ensemble.x

    def describe(self) -> Dict[str, Any]:
        return {"mode": self.mode.value, "softening": self.softening}


class GridFieldEvaluator(FieldEvaluator):
    """Free-space spectral solve on a grid, interpolated to particles"""

    mode = FieldMode.GRID

    def __init__(self, ensemble: Ensemble, spec: GridSpec, workers: int = 1):
        self.spec = spec
        self.workers = workers
        self._x = np.array(ensemble.x)
        self.grid: FieldGrid = grid_poisson_solve(grid_deposit(ensemble, spec, workers=workers), workers=workers)
        if self.grid.out_of_box_count:
            logger.warning(f"{self.grid.out_of_box_count} particles outside the field grid")

    def particle_field(self, x: np.ndarray) -> np.ndarray:
        return interpolate_field(self.grid, x)

    def field_at(self, points: Any) -> np.ndarray:
        return interpolate_field(self.grid, points)

    def field_energy(self, ensemble: Ensemble) -> float:
        grid = self.grid
        if not np.array_equal(ensemble.x, self._x):
            grid = grid_poisson_solve(grid_deposit(ensemble, self.spec, workers=self.workers), workers=self.workers)
        return grid_field_energy(grid)

    @property
    def source_positions(self) -> np.ndarray:
        return self._x

    def describe(self) -> Dict[str, Any]:
        return {"mode": self.mode.value, "grid": self.spec.to_dict()}


class AnalyticField(FieldEvaluator):
    """
    External field E = grad(phi) fixed in time

    Along a characteristic <v> - phi(x) is conserved, so the field energy of an
    ensemble is the external potential energy -sum w phi(x).
    """

    def particle_field(self, x: np.ndarray) -> np.ndarray:
        return self.field_at(x)

    @abstractmethod
    def potential(self, points: Any) -> np.ndarray:
        """phi at points"""

    def field_energy(self, ensemble: Ensemble) -> float:
        return -math.fsum((ensemble.w * self.potential(ensemble.x)).tolist())


class PointChargeField(AnalyticField):
    """Field of a fixed charge Q at the origin, E = Q x / (4 pi |x|^3)"""

    mode = FieldMode.POINT_CHARGE

    def __init__(self, charge: float = 1.0):
        self.charge = float(charge)

    def field_at(self, points: Any) -> np.ndarray:
        points = np.asarray(points, dtype=np.float64)
        r = np.linalg.norm(points, axis=-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            scale = np.where(r > 0, self.charge / (FOUR_PI * r ** 3), 0.0)
        return points * scale[..., None]

    def potential(self, points: Any) -> np.ndarray:
        r = np.linalg.norm(np.asarray(points, dtype=np.float64), axis=-1)
        return -self.charge / (FOUR_PI * r)

    def describe(self) -> Dict[str, Any]:
        return {"mode": self.mode.value, "charge": self.charge}


class PlanarRadialField(AnalyticField):
    """
    Field of a uniform line charge on the x3-axis, E = (lambda / 2pi) x' / |x'|^2

    Invariant under planar rotations and x3-translations, so x1 v2 - x2 v1 is
    conserved by its characteristics.
    """

    mode = FieldMode.PLANAR_RADIAL

    def __init__(self, line_density: float = 1.0):
        self.line_density = float(line_density)

    def field_at(self, points: Any) -> np.ndarray:
        points = np.asarray(points, dtype=np.float64)
        rho2 = points[..., 0] ** 2 + points[..., 1] ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            scale = np.where(rho2 > 0, self.line_density / (2.0 * math.pi * rho2), 0.0)
        out = np.zeros_like(points)
        out[..., 0] = points[..., 0] * scale
        out[..., 1] = points[..., 1] * scale
        return out

    def potential(self, points: Any) -> np.ndarray:
        points = np.asarray(points, dtype=np.float64)
        rho = np.hypot(points[..., 0], points[..., 1])
        return self.line_density * np.log(rho) / (2.0 * math.pi)

    def describe(self) -> Dict[str, Any]:
        return {"mode": self.mode.value, "line_density": self.line_density}


class UniformField(AnalyticField):
    """Constant field E = g"""

    mode = FieldMode.UNIFORM

    def __init__(self, vector: Sequence[float] = (0.0, 0.0, 0.0)):
        self.vector = np.asarray(vector, dtype=np.float64)
        if self.vector.shape != (3,):
            raise ValidationError("integrator.field_vector", "must have three components", tuple(vector))

    def field_at(self, points: Any) -> np.ndarray:
        points = np.asarray(points, dtype=np.float64)
        return np.broadcast_to(self.vector, points.shape).copy()

    def potential(self, points: Any) -> np.ndarray:
        return np.asarray(points, dtype=np.float64) @ self.vector

    def describe(self) -> Dict[str, Any]:
        return {"mode": self.mode.value, "vector": self.vector.tolist()}


class ZeroField(UniformField):
    """No field: free streaming"""

    mode = FieldMode.ZERO

    def __init__(self):
        super().__init__((0.0, 0.0, 0.0))

    def describe(self) -> Dict[str, Any]:
        return {"mode": self.mode.value}


def build_field(ensemble: Ensemble, config: Any) -> FieldEvaluator:
    """
    Build the field evaluator selected by an integrator config

    Args:
        ensemble: current particle state (ignored by analytic modes)
        config: IntegratorConfig

    Returns:
        FieldEvaluator frozen at the ensemble's current positions
    """
    mode = FieldMode(config.field_mode)
    if mode is FieldMode.RADIAL:
        if config.profile_bins == 0:
            return ShellFieldEvaluator(ensemble)
        return RadialProfileEvaluator(ensemble, config.profile_bins, config.r_max)
    if mode is FieldMode.DIRECT:
        return DirectFieldEvaluator(ensemble, config.softening)
    if mode is FieldMode.GRID:
        if config.grid is None:
            raise ConfigurationError("integrator.grid", "grid field mode needs a grid spec")
        return GridFieldEvaluator(ensemble, config.grid, workers=config.workers)

    params = dict(config.analytic or {})
    if mode is FieldMode.POINT_CHARGE:
        return PointChargeField(params.get("charge", 1.0))
    if mode is FieldMode.PLANAR_RADIAL:
        return PlanarRadialField(params.get("line_density", 1.0))
    if mode is FieldMode.UNIFORM:
        return UniformField(params.get("vector", (0.0, 0.0, 0.0)))
    return ZeroField()
