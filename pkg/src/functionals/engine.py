"""
Diagnostics engine driven by the integrator

The integrator calls start() once, advance() after every step and record()
at scheduled times. A_cum is the trapezoid rule over the per-step samples of
the space-time rate; beta and the enlarged moments use running maxima over
every step.
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np

from kinetics.exceptions import ValidationError
from kinetics.kinematics import planar_norm
from kinetics.particles import Ensemble
from .majority import MajorityParams
from .moments import kinetic_energy_abs_v, moment, total_energy
from .series import DiagnosticsRecord, DiagnosticsSeries
from .spacetime import (
    DEFAULT_AXIS_REGULARIZATION,
    DEFAULT_INVERSE_POWER,
    inverse_angular_momentum_moment,
    spacetime_rate,
)
from .surrogates import (
    DEFAULT_DELTA,
    DEFAULT_N_C,
    DEFAULT_N_R,
    MomentSurrogates,
    MomentTracker,
    beta_exponent,
    cylindrical_majority,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FunctionalParams:
    """Parameters of every tracked functional"""
    moment_orders: Tuple[float, ...] = (0.0, 1.0, 2.0)
    eps_star: float = 0.01
    delta0: float = DEFAULT_AXIS_REGULARIZATION
    floor: float = 0.1
    inverse_power: float = DEFAULT_INVERSE_POWER
    n_r: int = DEFAULT_N_R
    n_c: int = DEFAULT_N_C
    delta: float = DEFAULT_DELTA

    def __post_init__(self):
        orders = tuple(float(n) for n in self.moment_orders)
        object.__setattr__(self, "moment_orders", orders)
        if any(not (n >= 0 and math.isfinite(n)) for n in orders):
            raise ValidationError("moment_orders", "orders must be finite and nonnegative", orders)
        if len(set(orders)) != len(orders):
            raise ValidationError("moment_orders", "orders must be distinct", orders)
        if not 0.0 <= self.eps_star < 0.5:
            raise ValidationError("eps_star", "must lie in [0, 1/2)", self.eps_star)
        if not self.delta0 >= 0:
            raise ValidationError("delta0", "must be nonnegative", self.delta0)
        if not self.floor > 0:
            raise ValidationError("floor", "must be positive", self.floor)

    def majority_params(self, surrogates: Optional[MomentSurrogates] = None) -> MajorityParams:
        if surrogates is None:
            return MajorityParams(n_r=self.n_r, n_c=self.n_c, delta=self.delta)
        return MajorityParams(n_r=self.n_r, n_c=self.n_c, delta=self.delta,
                              log2_tilde_r=surrogates.log2_tilde_r, m_t=surrogates.m_t)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["moment_orders"] = list(self.moment_orders)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "FunctionalParams":
        data = dict(data)
        if "moment_orders" in data:
            data["moment_orders"] = tuple(data["moment_orders"])
        return cls(**data)


class DiagnosticsEngine:
    """Running functionals of one integration"""

    def __init__(self, params: Optional[FunctionalParams] = None):
        self.params = params or FunctionalParams()
        self.series = DiagnosticsSeries(self.params.moment_orders)
        self.tracker = MomentTracker(self.params.n_r, self.params.n_c)
        self.a_cum = 0.0
        self._rate: Optional[float] = None
        self._speed_max: Optional[np.ndarray] = None
        self._x0: Optional[np.ndarray] = None
        self._v0: Optional[np.ndarray] = None

    def _rate_of(self, ensemble: Ensemble) -> float:
        return spacetime_rate(ensemble, self.params.eps_star, self.params.delta0)

    def start(self, ensemble: Ensemble, field: Any = None):
        self.a_cum = 0.0
        self._rate = self._rate_of(ensemble)
        self._speed_max = np.linalg.norm(ensemble.v, axis=1)
        self._x0 = np.array(ensemble.x0)
        self._v0 = np.array(ensemble.v0)
        self.tracker.observe(ensemble)

    def advance(self, ensemble: Ensemble, dt: float):
        """Fold one completed step into the running quantities"""
        if self._rate is None:
            raise ValidationError("engine", "advance() before start()")
        rate = self._rate_of(ensemble)
        increment = 0.5 * dt * (self._rate + rate)
        self.a_cum += increment
        self._rate = rate
        np.maximum(self._speed_max, np.linalg.norm(ensemble.v, axis=1), out=self._speed_max)
        self.tracker.observe(ensemble)

    def surrogates(self, t: float) -> MomentSurrogates:
        return self.tracker.surrogates(t)

    def beta(self, t: float) -> float:
        """beta_t over the cylindrical majority set"""
        if self._speed_max is None or self._speed_max.size == 0:
            return 0.0
        m_t = self.surrogates(t).m_t
        chosen = cylindrical_majority(self._x0, self._v0, m_t)
        if not np.any(chosen):
            return 0.0
        return float(np.max(beta_exponent(self._speed_max[chosen], m_t)))

    def record(self, ensemble: Ensemble, field: Any = None) -> DiagnosticsRecord:
        energies = total_energy(ensemble, field)
        speed = np.linalg.norm(ensemble.v, axis=1)
        radius = planar_norm(ensemble.x)
        record = DiagnosticsRecord(
            t=ensemble.t,
            mass=ensemble.total_mass,
            kinetic_energy=energies.kinetic,
            field_energy=energies.field,
            total_energy=energies.total,
            moments={n: moment(ensemble, n) for n in self.params.moment_orders},
            A_cum=self.a_cum,
            J=inverse_angular_momentum_moment(ensemble, self.params.floor, self.params.inverse_power),
            max_speed=float(speed.max()) if speed.size else 0.0,
            min_planar_radius=float(radius.min()) if radius.size else 0.0,
            beta=self.beta(ensemble.t),
            kinetic_energy_abs_v=kinetic_energy_abs_v(ensemble),
        )
        self.series.append(record)
        logger.debug(f"Recorded diagnostics at t={ensemble.t:.6g}: total energy {energies.total:.17g}")
        return record

    def state_dict(self) -> Dict[str, Any]:
        """Running state for checkpoints"""
        return {
            "a_cum": self.a_cum,
            "rate": math.nan if self._rate is None else self._rate,
            "speed_max": np.array(self._speed_max) if self._speed_max is not None else np.zeros(0),
            "x0": self._x0 if self._x0 is not None else np.zeros((0, 3)),
            "v0": self._v0 if self._v0 is not None else np.zeros((0, 3)),
            "tracker": self.tracker.state_dict(),
            "series": self.series.state_dict(),
        }

    def load_state(self, state: Dict[str, Any]):
        self.a_cum = float(state["a_cum"])
        rate = float(state["rate"])
        self._rate = None if math.isnan(rate) else rate
        self._speed_max = np.array(state["speed_max"], dtype=np.float64)
        self._x0 = np.array(state["x0"], dtype=np.float64)
        self._v0 = np.array(state["v0"], dtype=np.float64)
        self.tracker.load_state(state["tracker"])
        self.series = DiagnosticsSeries.from_state(state["series"])
