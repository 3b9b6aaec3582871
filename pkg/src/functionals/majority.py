"""
Majority-set reports over a logged trajectory

The majority set holds the logged particles whose initial data satisfies
|x(0)| + |v(0)| <= threshold. Over the logged run the report gives how far
they travel and how fast they get, the empirical constants of the radial
bounds |x| <= C M~_r^(1/(2 n_r)) and |v| <= C M~_r^((5+2d)/((6-2d)(n_r-1))),
and beta_t over the cylindrical majority set |x(0)| + |v(0)| <= 2^(M_t/2).
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
from scipy.special import logsumexp

from kinetics.exceptions import ValidationError
from pusher.trajectory import TrajectoryLog
from .surrogates import (
    DEFAULT_DELTA,
    DEFAULT_N_C,
    DEFAULT_N_R,
    beta_exponent,
    cylindrical_majority,
    dyadic_scale,
    enlarged_log2,
    position_exponent,
    rough_field_exponent,
    speed_exponent,
)

logger = logging.getLogger(__name__)

SPEED_BOUND_TOLERANCE = 1e-9


@dataclass(frozen=True)
class MajorityParams:
    """
    Exponent parameters for the majority report

    log2_tilde_r and m_t come from the diagnostics engine when the whole
    ensemble was tracked; left as None they are estimated from the logged
    particles with equal weights of unit total mass.
    """
    n_r: int = DEFAULT_N_R
    n_c: int = DEFAULT_N_C
    delta: float = DEFAULT_DELTA
    log2_tilde_r: Optional[float] = None
    m_t: Optional[int] = None

    def __post_init__(self):
        if self.n_r < 2 or self.n_c < 2:
            raise ValidationError("n_r, n_c", "must be >= 2", (self.n_r, self.n_c))
        if not 0.0 < self.delta < 1e-2:
            raise ValidationError("delta", "must lie in (0, 1e-2)", self.delta)


@dataclass
class MajorityReport:
    threshold: float
    t_end: float
    tracked: int
    majority: int
    empty: bool
    starts_at_zero: bool
    initial_max_speed: float = 0.0
    max_position: float = 0.0
    max_speed: float = 0.0
    max_speed_history: List[float] = field(default_factory=list)
    log2_tilde_r: float = math.nan
    position_constant: float = math.nan
    speed_constant: float = math.nan
    rough_field_ratio: float = math.nan
    speed_bound_violations: int = 0
    max_speed_bound_ratio: float = 0.0
    m_t: int = 1
    cylindrical_majority: int = 0
    beta: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return dict(self.__dict__)


def _subset_log2_moment(v: np.ndarray, n: float) -> float:
    """log2 of the equal-weight moment of order n over logged particles, max over times"""
    m = v.shape[1]
    if m == 0 or v.shape[0] == 0:
        return -math.inf
    speeds = np.linalg.norm(v, axis=-1)
    per_time = (logsumexp(n * np.log1p(speeds), axis=1) - math.log(m)) / math.log(2.0)
    return float(np.max(per_time))


def _cumulative_trapezoid(values: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Running trapezoid integral along axis 0, starting at zero"""
    out = np.zeros_like(values)
    if len(t) > 1:
        steps = 0.5 * np.diff(t)[:, None] * (values[1:] + values[:-1])
        out[1:] = np.cumsum(steps, axis=0)
    return out


def majority_report(trajectory: TrajectoryLog, initial_threshold: float,
                    params: Optional[MajorityParams] = None) -> MajorityReport:
    """
    Majority-set statistics of a logged run

    Args:
        trajectory: log whose first record is the initial state
        initial_threshold: bound on |x(0)| + |v(0)|
        params: MajorityParams

    Returns:
        MajorityReport; `empty` is set when no logged particle is in the set
    """
    params = params or MajorityParams()
    if len(trajectory) == 0:
        raise ValidationError("trajectory", "no logged states")
    if not initial_threshold >= 0:
        raise ValidationError("initial_threshold", "must be nonnegative", initial_threshold)

    t = trajectory.t
    x, v, e = trajectory.x, trajectory.v, trajectory.e_field
    starts_at_zero = bool(t[0] == 0.0)
    if not starts_at_zero:
        logger.warning(f"Trajectory starts at t={t[0]:.6g}; its first record is treated as initial data")

    x0, v0 = x[0], v[0]
    size0 = np.linalg.norm(x0, axis=1) + np.linalg.norm(v0, axis=1)
    chosen = size0 <= initial_threshold

    log2_tilde_r = params.log2_tilde_r
    if log2_tilde_r is None:
        log2_tilde_r = enlarged_log2(t[-1] - t[0], _subset_log2_moment(v, params.n_r), 2.0 * params.n_r)
    m_t = params.m_t
    if m_t is None:
        m_t = dyadic_scale(
            enlarged_log2(t[-1] - t[0], _subset_log2_moment(v, params.n_c), float(params.n_c) ** 2),
            params.n_c,
        )

    speeds = np.linalg.norm(v, axis=-1)
    cylindrical = cylindrical_majority(x0, v0, m_t)
    beta = float(np.max(beta_exponent(speeds[:, cylindrical].max(axis=0), m_t))) if np.any(cylindrical) else 0.0

    report = MajorityReport(
        threshold=float(initial_threshold),
        t_end=float(t[-1]),
        tracked=int(trajectory.sample_ids.size),
        majority=int(np.count_nonzero(chosen)),
        empty=not bool(np.any(chosen)),
        starts_at_zero=starts_at_zero,
        log2_tilde_r=float(log2_tilde_r),
        m_t=int(m_t),
        cylindrical_majority=int(np.count_nonzero(cylindrical)),
        beta=beta,
    )
    if report.empty:
        logger.info(f"Majority set empty at threshold {initial_threshold:.6g}")
        return report

    sub_speed = speeds[:, chosen]
    sub_radius = np.linalg.norm(x[:, chosen], axis=-1)
    field_norm = np.linalg.norm(e[:, chosen], axis=-1)

    report.initial_max_speed = float(sub_speed[0].max())
    report.max_position = float(sub_radius.max())
    report.max_speed = float(sub_speed.max())
    report.max_speed_history = np.maximum.accumulate(sub_speed.max(axis=1)).tolist()

    report.position_constant = report.max_position / 2.0 ** (position_exponent(params.n_r) * log2_tilde_r)
    report.speed_constant = report.max_speed / 2.0 ** (speed_exponent(params.n_r, params.delta) * log2_tilde_r)
    rough = 1.0 + 2.0 ** (rough_field_exponent(params.n_r, params.delta) * log2_tilde_r)
    report.rough_field_ratio = float(np.max(np.linalg.norm(e, axis=-1))) / rough

    bound = sub_speed[0][None, :] + _cumulative_trapezoid(field_norm, t)
    ratio = sub_speed / np.where(bound > 0, bound, 1.0)
    report.max_speed_bound_ratio = float(np.max(np.where(bound > 0, ratio, 0.0)))
    report.speed_bound_violations = int(np.count_nonzero(
        sub_speed > bound * (1.0 + SPEED_BOUND_TOLERANCE) + SPEED_BOUND_TOLERANCE
    ))
    return report
