"""
Initial-data scenarios

Four named presets with closed-form densities f0(x, v). Every preset uses a
truncated isotropic Gaussian in momentum (|v - drift| <= v_max) and a smooth
positional law; the weights of a sampled ensemble are uniform.

    radial-gaussian                 f0 ~ exp(-|x|^2 / 2 sx^2) * G(v)
    radial-shell                    f0 ~ exp(-(|x| - R)^2 / 2 W^2) * G(v)
    cylindrical-torus               f0 ~ exp(-((|x'| - R)^2 + x3^2) / 2 a^2) * G(v - u e_phi)
    cylindrical-vanishing-momentum  torus law * (l^2 / (l^2 + lc^2))^(p/2),  l = x' x v'

where x' is the planar part of x and e_phi the azimuthal unit vector. The
cylindrical presets are invariant under simultaneous planar rotation of
(x', v'), which keeps x' x v' a conserved label of each particle.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Any, Callable, Dict, Tuple

import numpy as np
from scipy import integrate, special, stats

from .exceptions import ConfigurationError, ValidationError
from .kinematics import planar_angular_momentum
from .particles import Ensemble

logger = logging.getLogger(__name__)


class ScenarioKind(str, Enum):
    """Initial-data presets"""
    RADIAL_GAUSSIAN = "radial-gaussian"
    RADIAL_SHELL = "radial-shell"
    CYLINDRICAL_TORUS = "cylindrical-torus"
    CYLINDRICAL_VANISHING_MOMENTUM = "cylindrical-vanishing-momentum"


SCENARIO_DEFAULTS: Dict[ScenarioKind, Dict[str, float]] = {
    ScenarioKind.RADIAL_GAUSSIAN: {
        "sigma_x": 0.5, "sigma_v": 1.0, "v_max": 50.0,
    },
    ScenarioKind.RADIAL_SHELL: {
        "radius": 1.0, "width": 0.2, "sigma_v": 1.0, "v_max": 50.0,
    },
    ScenarioKind.CYLINDRICAL_TORUS: {
        "major_radius": 1.0, "minor_width": 0.25, "sigma_v": 1.0, "swirl": 0.0, "v_max": 50.0,
    },
    ScenarioKind.CYLINDRICAL_VANISHING_MOMENTUM: {
        "major_radius": 1.0, "minor_width": 0.25, "sigma_v": 1.0, "v_max": 50.0,
        "order": 14.0, "ell_scale": 0.5,
    },
}

# parameters allowed to be zero
_NONNEGATIVE = {"swirl"}

_TABLE_NODES = 8193
_BATCH_MIN = 256


@dataclass(frozen=True)
class Scenario:
    """A named initial-data preset with its shape parameters"""
    kind: ScenarioKind
    parameters: Dict[str, float] = field(default_factory=dict)

    @classmethod
    def create(cls, kind: Any, **parameters: float) -> "Scenario":
        """
        Build a scenario, filling documented defaults

        Args:
            kind: ScenarioKind or its string value
            **parameters: per-kind shape parameters overriding the defaults

        Raises:
            ConfigurationError: unknown kind or parameter name
            ValidationError: parameter out of range
        """
        try:
            kind = ScenarioKind(kind)
        except ValueError:
            valid = ", ".join(k.value for k in ScenarioKind)
            raise ConfigurationError("scenario.kind", f"unknown scenario kind '{kind}' (expected one of: {valid})")

        defaults = SCENARIO_DEFAULTS[kind]
        unknown = sorted(set(parameters) - set(defaults))
        if unknown:
            raise ConfigurationError(
                f"scenario.{unknown[0]}",
                f"not a parameter of {kind.value} (expected one of: {', '.join(sorted(defaults))})"
            )

        merged = {**defaults, **{k: float(v) for k, v in parameters.items()}}
        for name, value in merged.items():
            if not math.isfinite(value):
                raise ValidationError(f"scenario.{name}", "must be finite", value)
            if name in _NONNEGATIVE:
                continue
            if value <= 0:
                raise ValidationError(f"scenario.{name}", "must be positive", value)
        if kind is ScenarioKind.CYLINDRICAL_TORUS and abs(merged["swirl"]) >= merged["v_max"]:
            raise ValidationError("scenario.swirl", "swirl drift must stay below v_max", merged["swirl"])
        return cls(kind=kind, parameters=merged)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Scenario":
        data = dict(data)
        kind = data.pop("kind", None)
        if kind is None:
            raise ConfigurationError("scenario.kind", "missing scenario kind")
        return cls.create(kind, **data)

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, **self.parameters}

    @property
    def is_radial(self) -> bool:
        return self.kind in (ScenarioKind.RADIAL_GAUSSIAN, ScenarioKind.RADIAL_SHELL)

    @property
    def is_cylindrical(self) -> bool:
        return not self.is_radial

    def __getitem__(self, name: str) -> float:
        return self.parameters[name]

    # ------------------------------------------------------------------
    # closed-form density

    @cached_property
    def _velocity_normalization(self) -> float:
        s = self["sigma_v"]
        return (2.0 * math.pi) ** 1.5 * s ** 3 * float(stats.chi(3).cdf(self["v_max"] / s))

    @cached_property
    def _position_normalization(self) -> float:
        if self.kind is ScenarioKind.RADIAL_GAUSSIAN:
            return (2.0 * math.pi) ** 1.5 * self["sigma_x"] ** 3
        if self.kind is ScenarioKind.RADIAL_SHELL:
            R, W = self["radius"], self["width"]
            value, _ = integrate.quad(lambda r: r * r * math.exp(-0.5 * ((r - R) / W) ** 2), 0.0, np.inf)
            return 4.0 * math.pi * value
        a = self["minor_width"]
        return math.sqrt(2.0 * math.pi) * a * 2.0 * math.pi * _torus_radial_integral(self["major_radius"], a)

    @cached_property
    def _momentum_factor_mean(self) -> float:
        """Mean of the vanishing factor under the torus law"""
        if self.kind is not ScenarioKind.CYLINDRICAL_VANISHING_MOMENTUM:
            return 1.0
        return _vanishing_factor_mean(
            self["major_radius"], self["minor_width"], self["sigma_v"], self["v_max"],
            self["order"], self["ell_scale"]
        )

    def normalization(self, total_mass: float) -> float:
        """Amplitude A such that f0 = A * (unnormalized law) integrates to total_mass"""
        return total_mass / (self._position_normalization * self._velocity_normalization * self._momentum_factor_mean)

    def _position_law(self, x: np.ndarray) -> np.ndarray:
        if self.kind is ScenarioKind.RADIAL_GAUSSIAN:
            r2 = np.einsum("...i,...i->...", x, x)
            return np.exp(-0.5 * r2 / self["sigma_x"] ** 2)
        if self.kind is ScenarioKind.RADIAL_SHELL:
            r = np.linalg.norm(x, axis=-1)
            return np.exp(-0.5 * ((r - self["radius"]) / self["width"]) ** 2)
        rho = np.hypot(x[..., 0], x[..., 1])
        return np.exp(-0.5 * ((rho - self["major_radius"]) ** 2 + x[..., 2] ** 2) / self["minor_width"] ** 2)

    def _drift(self, x: np.ndarray) -> np.ndarray:
        drift = np.zeros_like(x)
        swirl = self.parameters.get("swirl", 0.0)
        if swirl == 0.0:
            return drift
        rho = np.hypot(x[..., 0], x[..., 1])
        safe = np.where(rho > 0, rho, 1.0)
        drift[..., 0] = np.where(rho > 0, -swirl * x[..., 1] / safe, 0.0)
        drift[..., 1] = np.where(rho > 0, swirl * x[..., 0] / safe, 0.0)
        return drift

    def _velocity_law(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        u = v - self._drift(x)
        u2 = np.einsum("...i,...i->...", u, u)
        law = np.exp(-0.5 * u2 / self["sigma_v"] ** 2)
        return np.where(u2 <= self["v_max"] ** 2, law, 0.0)

    def _momentum_factor(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        if self.kind is not ScenarioKind.CYLINDRICAL_VANISHING_MOMENTUM:
            return np.ones(np.shape(x)[:-1])
        ell2 = planar_angular_momentum(x, v) ** 2
        return (ell2 / (ell2 + self["ell_scale"] ** 2)) ** (0.5 * self["order"])

    def density(self, x: Any, v: Any, total_mass: float = 1.0) -> np.ndarray:
        """
        Closed-form f0 at phase points (x, v)

        Args:
            x: positions, shape (3,) or (n, 3)
            v: momenta, same shape as x
            total_mass: integral of f0 over phase space

        Returns:
            f0 values, shape () or (n,)
        """
        x = np.asarray(x, dtype=np.float64)
        v = np.asarray(v, dtype=np.float64)
        return (
            self.normalization(total_mass)
            * self._position_law(x)
            * self._velocity_law(x, v)
            * self._momentum_factor(x, v)
        )

    # ------------------------------------------------------------------
    # sampling

    def _sample_positions(self, rng: np.random.Generator, m: int) -> np.ndarray:
        if self.kind is ScenarioKind.RADIAL_GAUSSIAN:
            return self["sigma_x"] * rng.standard_normal((m, 3))
        if self.kind is ScenarioKind.RADIAL_SHELL:
            R, W = self["radius"], self["width"]
            r = _tabulated_radius(rng, m, lambda r: r * r * np.exp(-0.5 * ((r - R) / W) ** 2), R + 12.0 * W)
            return r[:, None] * _unit_vectors(rng, m)
        R, a = self["major_radius"], self["minor_width"]
        rho = _tabulated_radius(rng, m, lambda r: r * np.exp(-0.5 * ((r - R) / a) ** 2), R + 12.0 * a)
        angle = rng.uniform(0.0, 2.0 * math.pi, m)
        z = a * rng.standard_normal(m)
        return np.column_stack([rho * np.cos(angle), rho * np.sin(angle), z])

    def _sample_thermal(self, rng: np.random.Generator, m: int) -> np.ndarray:
        s, v_max = self["sigma_v"], self["v_max"]

        def propose(batch: int) -> Tuple[np.ndarray, np.ndarray]:
            u = s * rng.standard_normal((batch, 3))
            return u, np.einsum("ij,ij->i", u, u) <= v_max * v_max

        return _fill_by_rejection(m, propose)

    def _propose(self, rng: np.random.Generator, m: int) -> Tuple[np.ndarray, np.ndarray]:
        x = self._sample_positions(rng, m)
        v = self._sample_thermal(rng, m) + self._drift(x)
        return x, v

    def sample(self, rng: np.random.Generator, n: int) -> Tuple[np.ndarray, np.ndarray]:
        """Draw n phase points from the normalized law"""
        if self.kind is not ScenarioKind.CYLINDRICAL_VANISHING_MOMENTUM:
            return self._propose(rng, n)

        def propose(batch: int) -> Tuple[np.ndarray, np.ndarray]:
            x, v = self._propose(rng, batch)
            accept = rng.random(batch) < self._momentum_factor(x, v)
            return np.concatenate([x, v], axis=1), accept

        phase = _fill_by_rejection(n, propose)
        return phase[:, :3], phase[:, 3:]


def sample_initial_ensemble(scenario: Scenario, n: int, total_mass: float, seed: int) -> Ensemble:
    """
    Sample a uniformly weighted ensemble from a scenario

    Identical (scenario, n, total_mass, seed) give bit-identical ensembles.
    The last weight takes up the rounding of total_mass / n, so the weights
    have an exactly rounded sum equal to total_mass.

    Args:
        scenario: initial-data preset
        n: particle count (>= 1)
        total_mass: sum of weights (> 0)
        seed: seed of the PCG64 stream

    Returns:
        Ensemble at t = 0 with f0 set to the closed-form density
    """
    if not isinstance(scenario, Scenario):
        raise ConfigurationError("scenario", f"expected a Scenario, got {type(scenario).__name__}")
    if int(n) != n or n < 1:
        raise ValidationError("particles.count", "must be a positive integer", n)
    if not (total_mass > 0 and math.isfinite(total_mass)):
        raise ValidationError("particles.total_mass", "must be positive and finite", total_mass)
    n = int(n)

    rng = np.random.Generator(np.random.PCG64(seed))
    x, v = scenario.sample(rng, n)
    f0 = scenario.density(x, v, total_mass)
    w = np.full(n, total_mass / n)
    w[-1] = total_mass - math.fsum(w[:-1].tolist())

    logger.info(f"Sampled {n} particles from {scenario.kind.value} (seed={seed}, mass={total_mass})")
    return Ensemble.create(
        x, v, w, f0, t=0.0, seed=seed,
        metadata={"scenario": scenario.to_dict(), "total_mass": total_mass, "rng_state": rng.bit_generator.state}
    )


def _unit_vectors(rng: np.random.Generator, m: int) -> np.ndarray:
    g = rng.standard_normal((m, 3))
    norms = np.linalg.norm(g, axis=1)
    # a zero draw has probability zero but would poison the direction
    norms[norms == 0] = 1.0
    return g / norms[:, None]


def _tabulated_radius(rng: np.random.Generator, m: int, weight: Callable[[np.ndarray], np.ndarray],
                      r_hi: float) -> np.ndarray:
    """Inverse-CDF draws from a radial law with unnormalized density weight(r) on [0, r_hi]"""
    grid = np.linspace(0.0, r_hi, _TABLE_NODES)
    cdf = integrate.cumulative_trapezoid(weight(grid), grid, initial=0.0)
    cdf /= cdf[-1]
    return np.interp(rng.random(m), cdf, grid)


def _fill_by_rejection(n: int, propose: Callable[[int], Tuple[np.ndarray, np.ndarray]]) -> np.ndarray:
    """Collect n accepted proposals; batch sizes depend only on how many remain"""
    chunks = []
    have = 0
    while have < n:
        batch = max(2 * (n - have), _BATCH_MIN)
        values, accept = propose(batch)
        kept = values[accept]
        chunks.append(kept)
        have += kept.shape[0]
    return np.concatenate(chunks, axis=0)[:n]


def _torus_radial_integral(R: float, a: float) -> float:
    """Integral of r * exp(-(r - R)^2 / 2a^2) over r >= 0"""
    return a * a * math.exp(-0.5 * (R / a) ** 2) + R * a * math.sqrt(0.5 * math.pi) * (1.0 + math.erf(R / (math.sqrt(2.0) * a)))


def _gauss_legendre(lo: float, hi: float, n: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = special.roots_legendre(n)
    half = 0.5 * (hi - lo)
    return lo + half * (nodes + 1.0), half * weights


def _vanishing_factor_mean(R: float, a: float, sigma_v: float, v_max: float, order: float,
                           ell_scale: float) -> float:
    """
    Mean of (l^2 / (l^2 + lc^2))^(p/2) under the swirl-free torus law

    l = rho * s * sin(theta) with rho the planar radius, s = |v'| and theta the
    planar angle between x' and v'; theta is uniform and independent of (rho, s).
    Tensor Gauss-Legendre quadrature over (rho, s, theta).
    """
    rho, w_rho = _gauss_legendre(max(0.0, R - 12.0 * a), R + 12.0 * a, 160)
    s, w_s = _gauss_legendre(0.0, min(v_max, 12.0 * sigma_v), 160)
    theta, w_theta = _gauss_legendre(0.0, 0.5 * math.pi, 96)

    p_rho = rho * np.exp(-0.5 * ((rho - R) / a) ** 2) / _torus_radial_integral(R, a)
    # planar speed marginal of the truncated isotropic Gaussian
    v3_room = np.sqrt(np.maximum(v_max * v_max - s * s, 0.0))
    p_s = (s / sigma_v ** 2) * np.exp(-0.5 * (s / sigma_v) ** 2) * special.erf(v3_room / (math.sqrt(2.0) * sigma_v))
    p_s /= float(stats.chi(3).cdf(v_max / sigma_v))

    ell = rho[:, None, None] * s[None, :, None] * np.sin(theta)[None, None, :]
    factor = (ell ** 2 / (ell ** 2 + ell_scale ** 2)) ** (0.5 * order)
    inner = np.einsum("ijk,k->ij", factor, w_theta) / (0.5 * math.pi)
    return float(np.einsum("i,ij,j->", w_rho * p_rho, inner, w_s * p_s))
