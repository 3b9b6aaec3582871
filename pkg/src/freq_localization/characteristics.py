"""
Time-integrated localized field along logged characteristics

For each logged particle the integral of V~(s) . E_{k;j1,j2}(s, X(s)) with
V~ = V / |V| is taken by the trapezoid rule over the logged times. The field
at a logged time is interpolated linearly between the two snapshots that
bracket it.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from scipy.integrate import trapezoid

from kinetics.exceptions import CoverageError, ValidationError
from pusher.trajectory import TrajectoryLog
from .fields import LocalizedField
from .shells import DyadicIndex, IndexClass, classify_index

logger = logging.getLogger(__name__)

COVERAGE_SLACK = 1e-9


@dataclass
class CharacteristicReport:
    """Integrals along each logged particle and their ratio to the naive bound"""
    index: DyadicIndex
    index_class: IndexClass
    m_t: int
    epsilon: float
    t_range: List[float]
    snapshots: int
    particle_ids: List[int] = field(default_factory=list)
    integrals: List[float] = field(default_factory=list)
    naive_bound: float = 0.0
    max_abs_integral: float = 0.0
    max_ratio: float = 0.0
    mean_ratio: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            **self.index.to_dict(),
            "class": self.index_class.value,
            "m_t": self.m_t,
            "epsilon": self.epsilon,
            "t_range": list(self.t_range),
            "snapshots": self.snapshots,
            "particle_ids": list(self.particle_ids),
            "integrals": list(self.integrals),
            "naive_bound": self.naive_bound,
            "max_abs_integral": self.max_abs_integral,
            "max_ratio": self.max_ratio,
            "mean_ratio": self.mean_ratio,
        }


def _ordered_snapshots(snapshots: Sequence[LocalizedField], index: DyadicIndex) -> List[LocalizedField]:
    if not snapshots:
        raise ValidationError("snapshots", "no field snapshots supplied")
    for snap in snapshots:
        if snap.index != index:
            raise ValidationError("snapshots", "snapshot index differs from the requested index",
                                  snap.index.to_dict())
    ordered = sorted(snapshots, key=lambda s: s.t)
    times = [s.t for s in ordered]
    if len(set(times)) != len(times):
        raise ValidationError("snapshots", "two snapshots share a time")
    return ordered


def _check_coverage(times: np.ndarray, snap_times: np.ndarray, max_gap: Optional[float]):
    slack = COVERAGE_SLACK * max(1.0, float(np.max(np.abs(snap_times))))
    t_range = (float(times[0]), float(times[-1]))
    snap_range = (float(snap_times[0]), float(snap_times[-1]))
    if times[0] < snap_times[0] - slack or times[-1] > snap_times[-1] + slack:
        raise CoverageError("trajectory extends beyond the snapshot times", t_range, snap_range)
    if max_gap is not None and snap_times.size > 1:
        gaps = np.diff(snap_times)
        if np.max(gaps) > max_gap + slack:
            worst = int(np.argmax(gaps))
            raise CoverageError(
                f"gap of {gaps[worst]:.6g} after t={snap_times[worst]:.6g} exceeds {max_gap:.6g}",
                t_range, snap_range,
            )


def _field_along(ordered: List[LocalizedField], snap_times: np.ndarray,
                 t: float, points: np.ndarray) -> np.ndarray:
    """Field at time t and positions `points`, linear in time between snapshots"""
    if snap_times.size == 1:
        return ordered[0].at(points)
    hi = int(np.clip(np.searchsorted(snap_times, t), 1, snap_times.size - 1))
    lo = hi - 1
    theta = (t - snap_times[lo]) / (snap_times[hi] - snap_times[lo])
    theta = min(max(theta, 0.0), 1.0)
    if theta == 0.0:
        return ordered[lo].at(points)
    if theta == 1.0:
        return ordered[hi].at(points)
    return (1.0 - theta) * ordered[lo].at(points) + theta * ordered[hi].at(points)


def integrated_field_along_characteristic(trajectory: TrajectoryLog, snapshots: Sequence[LocalizedField],
                                          index: DyadicIndex, m_t: int, epsilon: float,
                                          max_gap: Optional[float] = None) -> CharacteristicReport:
    """
    Integral of V~ . E_{k;j1,j2} along every logged particle

    Args:
        trajectory: log of the particles to follow
        snapshots: LocalizedField history of one index, any order
        index: index every snapshot must carry
        m_t: dyadic scale used to classify the index
        epsilon: localization epsilon used to classify the index
        max_gap: largest admissible time between consecutive snapshots

    Returns:
        CharacteristicReport

    Raises:
        CoverageError: the snapshots do not span the logged times, or leave a
            gap wider than max_gap
    """
    if len(trajectory) == 0:
        raise ValidationError("trajectory", "no logged states")
    ordered = _ordered_snapshots(snapshots, index)
    snap_times = np.asarray([s.t for s in ordered], dtype=np.float64)
    times = trajectory.t
    _check_coverage(times, snap_times, max_gap)

    x, v = trajectory.x, trajectory.v
    speed = np.linalg.norm(v, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        direction = np.where(speed[..., None] > 0, v / speed[..., None], 0.0)

    integrand = np.zeros(speed.shape)
    for i, t in enumerate(times):
        e = _field_along(ordered, snap_times, float(t), x[i])
        integrand[i] = np.einsum("ij,ij->i", direction[i], e)

    if times.size > 1:
        integrals = trapezoid(integrand, times, axis=0)
    else:
        integrals = np.zeros(speed.shape[1])

    span = float(times[-1] - times[0])
    naive = span * max(s.sup_norm for s in ordered)
    ratios = np.abs(integrals) / naive if naive > 0 else np.zeros_like(integrals)

    report = CharacteristicReport(
        index=index,
        index_class=classify_index(index, m_t, epsilon),
        m_t=int(m_t),
        epsilon=float(epsilon),
        t_range=[float(times[0]), float(times[-1])],
        snapshots=len(ordered),
        particle_ids=[int(i) for i in trajectory.sample_ids],
        integrals=[float(a) for a in integrals],
        naive_bound=naive,
        max_abs_integral=float(np.max(np.abs(integrals))) if integrals.size else 0.0,
        max_ratio=float(np.max(ratios)) if ratios.size else 0.0,
        mean_ratio=float(np.mean(ratios)) if ratios.size else 0.0,
    )
    logger.debug(
        f"Characteristic integral for {index.to_dict()} ({report.index_class.value}): "
        f"max ratio {report.max_ratio:.3g} over {len(report.integrals)} particles"
    )
    if not math.isfinite(report.max_ratio):
        logger.warning(f"Non-finite characteristic integral for {index.to_dict()}")
    return report
