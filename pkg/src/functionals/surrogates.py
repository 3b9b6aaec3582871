"""
Enlarged-moment surrogates and the dyadic scale M_t

The enlarged moments are

    M~_r(t) = (1 + t)^(2 n_r) + sup_{s <= t} M_{n_r}(s)
    M~_c(t) = (1 + t)^(n_c^2) + sup_{s <= t} M_{n_c}(s)

and M_t is the least positive integer k with 2^k >= M~_c^(1/(n_c - 1)).
Everything is carried in log2 since M_{n_c} overflows a double long before
desk-scale speeds do.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np

from kinetics.exceptions import ValidationError
from kinetics.particles import Ensemble
from .moments import log2_moment

logger = logging.getLogger(__name__)

DEFAULT_N_R = 10
DEFAULT_N_C = 20
DEFAULT_DELTA = 1e-3


def enlarged_log2(t: float, sup_log2_moment: float, time_exponent: float) -> float:
    """log2((1 + t)^time_exponent + 2^sup_log2_moment)"""
    return float(np.logaddexp2(time_exponent * math.log2(1.0 + t), sup_log2_moment))


def dyadic_scale(log2_tilde_c: float, n_c: int) -> int:
    """M_t >= 1 with 2^M_t >= M~_c^(1/(n_c - 1))"""
    return max(1, int(math.ceil(log2_tilde_c / (n_c - 1))))


def localization_epsilon(n_c: int) -> float:
    return 10.0 / n_c


def beta_exponent(speed: Any, m_t: int) -> np.ndarray:
    """inf{k >= 0 : |v| <= 2^(k M_t)} for each speed"""
    speed = np.asarray(speed, dtype=np.float64)
    with np.errstate(divide="ignore"):
        return np.maximum(0.0, np.log2(speed) / m_t)


def cylindrical_majority(x0: Any, v0: Any, m_t: int) -> np.ndarray:
    """|x(0)| + |v(0)| <= 2^(M_t / 2)"""
    size = np.linalg.norm(np.asarray(x0, dtype=np.float64), axis=-1) \
        + np.linalg.norm(np.asarray(v0, dtype=np.float64), axis=-1)
    return size <= 2.0 ** (m_t / 2.0)


def radial_threshold(log2_tilde_r: float, n_r: int) -> float:
    """(M~_r)^(1/(2 n_r))"""
    return 2.0 ** (log2_tilde_r / (2.0 * n_r))


def position_exponent(n_r: int) -> float:
    return 1.0 / (2.0 * n_r)


def speed_exponent(n_r: int, delta: float = DEFAULT_DELTA) -> float:
    """Exponent of M~_r in the majority-set speed bound"""
    return (5.0 + 2.0 * delta) / ((6.0 - 2.0 * delta) * (n_r - 1))


def rough_field_exponent(n_r: int, delta: float = DEFAULT_DELTA) -> float:
    """Exponent of M~_r in the rough sup bound on the field"""
    return (5.0 + delta) / ((3.0 - delta) * (n_r - 1))


@dataclass(frozen=True)
class MomentSurrogates:
    """Enlarged moments at time t"""
    t: float
    n_r: int
    n_c: int
    log2_tilde_r: float
    log2_tilde_c: float

    @property
    def m_t(self) -> int:
        return dyadic_scale(self.log2_tilde_c, self.n_c)

    @property
    def epsilon(self) -> float:
        return localization_epsilon(self.n_c)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "t": self.t,
            "n_r": self.n_r,
            "n_c": self.n_c,
            "log2_tilde_r": self.log2_tilde_r,
            "log2_tilde_c": self.log2_tilde_c,
            "m_t": self.m_t,
            "epsilon": self.epsilon,
        }


class MomentTracker:
    """Running sup of log2 M_{n_r} and log2 M_{n_c} over observed times"""

    def __init__(self, n_r: int = DEFAULT_N_R, n_c: int = DEFAULT_N_C):
        if int(n_r) != n_r or n_r < 2:
            raise ValidationError("n_r", "must be an integer >= 2", n_r)
        if int(n_c) != n_c or n_c < 2:
            raise ValidationError("n_c", "must be an integer >= 2", n_c)
        self.n_r = int(n_r)
        self.n_c = int(n_c)
        self.t0: Optional[float] = None
        self.sup_log2_r = -math.inf
        self.sup_log2_c = -math.inf

    def observe(self, ensemble: Ensemble):
        if self.t0 is None:
            self.t0 = ensemble.t
        self.sup_log2_r = max(self.sup_log2_r, log2_moment(ensemble, self.n_r))
        self.sup_log2_c = max(self.sup_log2_c, log2_moment(ensemble, self.n_c))

    def surrogates(self, t: float) -> MomentSurrogates:
        """Enlarged moments at t, with time measured from the first observation"""
        elapsed = max(0.0, t - (self.t0 if self.t0 is not None else t))
        return MomentSurrogates(
            t=t,
            n_r=self.n_r,
            n_c=self.n_c,
            log2_tilde_r=enlarged_log2(elapsed, self.sup_log2_r, 2.0 * self.n_r),
            log2_tilde_c=enlarged_log2(elapsed, self.sup_log2_c, float(self.n_c) ** 2),
        )

    def state_dict(self) -> Dict[str, Any]:
        return {
            "n_r": self.n_r,
            "n_c": self.n_c,
            "t0": math.nan if self.t0 is None else self.t0,
            "sup_log2_r": self.sup_log2_r,
            "sup_log2_c": self.sup_log2_c,
        }

    def load_state(self, state: Dict[str, Any]):
        self.n_r = int(state["n_r"])
        self.n_c = int(state["n_c"])
        t0 = float(state["t0"])
        self.t0 = None if math.isnan(t0) else t0
        self.sup_log2_r = float(state["sup_log2_r"])
        self.sup_log2_c = float(state["sup_log2_c"])
