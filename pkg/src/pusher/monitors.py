"""
Per-step invariant monitors

StepMonitor watches a whole ensemble step by step without storing
trajectories: decreases of the monotone quantity (v.x)/|v|, agreement of the
speed change with the sign of v.x, and drift of the planar and full angular
momenta.
"""

import logging
from typing import Any, Dict, Optional

import numpy as np

from kinetics.exceptions import UndefinedQuantityError, ValidationError
from kinetics.kinematics import angular_momentum, planar_angular_momentum
from kinetics.particles import Ensemble

logger = logging.getLogger(__name__)


def monotone_quantity(x: Any, v: Any) -> Any:
    """
    (v . x) / |v|, nondecreasing along characteristics of an outward radial field

    Args:
        x: position(s), shape (3,) or (n, 3)
        v: momentum(s) of the same shape

    Returns:
        Scalar for a single phase point, array otherwise

    Raises:
        UndefinedQuantityError: some |v| is zero
    """
    x = np.asarray(x, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    speed = np.linalg.norm(v, axis=-1)
    if np.any(speed == 0):
        raise UndefinedQuantityError("monotone_quantity", "|v| = 0")
    value = np.einsum("...i,...i->...", v, x) / speed
    return float(value) if value.ndim == 0 else value


class StepMonitor:
    """
    Running per-step checks over every particle

    Decreases of the monotone quantity smaller than monotone_band * dt^2 are
    integrator noise; larger ones are counted as violations. The speed-sign
    check is skipped where |v.x| at the midpoint is below speed_band * dt.
    """

    def __init__(self, monotone_band: float = 1.0, speed_band: float = 1.0):
        if not (monotone_band >= 0 and speed_band >= 0):
            raise ValidationError("monitor.band", "bands must be nonnegative", (monotone_band, speed_band))
        self.monotone_band = float(monotone_band)
        self.speed_band = float(speed_band)
        self.steps = 0
        self.max_monotone_decrease = 0.0
        self.monotone_violations = 0
        self.speed_checks = 0
        self.speed_mismatches = 0
        self.max_ell_drift = 0.0
        self.max_relative_ell_drift = 0.0
        self.max_angular_momentum_drift = 0.0
        self._l0: Optional[np.ndarray] = None

    def start(self, ensemble: Ensemble):
        self._l0 = angular_momentum(ensemble.x, ensemble.v)

    def observe(self, previous: Ensemble, current: Ensemble, dt: float):
        """Update the running statistics with one step previous -> current"""
        if self._l0 is None:
            self.start(previous)
        self.steps += 1

        speed_prev = np.linalg.norm(previous.v, axis=1)
        speed_now = np.linalg.norm(current.v, axis=1)
        moving = (speed_prev > 0) & (speed_now > 0)
        if np.any(moving):
            q_prev = np.einsum("ij,ij->i", previous.v[moving], previous.x[moving]) / speed_prev[moving]
            q_now = np.einsum("ij,ij->i", current.v[moving], current.x[moving]) / speed_now[moving]
            decrease = q_prev - q_now
            worst = float(np.max(decrease))
            self.max_monotone_decrease = max(self.max_monotone_decrease, worst)
            self.monotone_violations += int(np.count_nonzero(decrease > self.monotone_band * dt * dt))

        x_mid = 0.5 * (previous.x + current.x)
        v_mid = 0.5 * (previous.v + current.v)
        radial = np.einsum("ij,ij->i", x_mid, v_mid)
        checked = np.abs(radial) > self.speed_band * dt
        change = speed_now - speed_prev
        self.speed_checks += int(np.count_nonzero(checked))
        self.speed_mismatches += int(np.count_nonzero(checked & (np.sign(change) != np.sign(radial))))

        ell_drift = np.abs(planar_angular_momentum(current.x, current.v) - current.ell0)
        if ell_drift.size:
            self.max_ell_drift = max(self.max_ell_drift, float(np.max(ell_drift)))
            relative = ell_drift / (1.0 + np.abs(current.ell0))
            self.max_relative_ell_drift = max(self.max_relative_ell_drift, float(np.max(relative)))
            l_drift = np.linalg.norm(angular_momentum(current.x, current.v) - self._l0, axis=1)
            self.max_angular_momentum_drift = max(self.max_angular_momentum_drift, float(np.max(l_drift)))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "steps": self.steps,
            "monotone_band": self.monotone_band,
            "max_monotone_decrease": self.max_monotone_decrease,
            "monotone_violations": self.monotone_violations,
            "speed_band": self.speed_band,
            "speed_checks": self.speed_checks,
            "speed_mismatches": self.speed_mismatches,
            "max_ell_drift": self.max_ell_drift,
            "max_relative_ell_drift": self.max_relative_ell_drift,
            "max_angular_momentum_drift": self.max_angular_momentum_drift,
        }

    def state_dict(self) -> Dict[str, Any]:
        """Running state for checkpoints"""
        state = self.to_dict()
        state["l0"] = None if self._l0 is None else np.array(self._l0)
        return state

    def load_state(self, state: Dict[str, Any]):
        for key, value in state.items():
            if key == "l0":
                self._l0 = None if value is None else np.asarray(value, dtype=np.float64)
            elif hasattr(self, key):
                setattr(self, key, type(getattr(self, key))(value))
