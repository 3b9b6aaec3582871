"""
Trajectory logging for a fixed subset of particles
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np

from kinetics.exceptions import ValidationError
from kinetics.particles import Ensemble

logger = logging.getLogger(__name__)

TRAJECTORY_COLUMNS = ("id", "t", "x1", "x2", "x3", "v1", "v2", "v3", "E1", "E2", "E3")


def evenly_spaced_ids(n: int, count: int) -> np.ndarray:
    """Up to `count` distinct particle indices spread over range(n)"""
    if n <= 0 or count <= 0:
        return np.zeros(0, dtype=np.int64)
    return np.unique(np.linspace(0, n - 1, min(count, n)).round().astype(np.int64))


class TrajectoryLog:
    """
    States (x, v) and the field on a subset of particles at logged instants

    The integrator calls `observe` after every step; a state is stored every
    `stride` steps and always at the final step.
    """

    def __init__(self, sample_ids: Any, stride: int = 1):
        self.sample_ids = np.asarray(sample_ids, dtype=np.int64).reshape(-1)
        if np.unique(self.sample_ids).size != self.sample_ids.size:
            raise ValidationError("trajectory.sample_ids", "ids must be distinct")
        if int(stride) != stride or stride < 1:
            raise ValidationError("trajectory.stride", "must be an integer >= 1", stride)
        self.stride = int(stride)
        self.times: List[float] = []
        self._x: List[np.ndarray] = []
        self._v: List[np.ndarray] = []
        self._e: List[np.ndarray] = []

    def __len__(self) -> int:
        return len(self.times)

    def record(self, t: float, ensemble: Ensemble, e_field: np.ndarray):
        """Store the sampled particles' state at time t"""
        if self.times and not t > self.times[-1]:
            raise ValidationError("trajectory.t", "logged times must be strictly increasing", t)
        if self.sample_ids.size and self.sample_ids.max() >= len(ensemble):
            raise ValidationError("trajectory.sample_ids", "id beyond the ensemble size", int(self.sample_ids.max()))
        self.times.append(float(t))
        self._x.append(np.array(ensemble.x[self.sample_ids]))
        self._v.append(np.array(ensemble.v[self.sample_ids]))
        self._e.append(np.array(np.asarray(e_field)[self.sample_ids]))

    def observe(self, step: int, n_steps: int, ensemble: Ensemble, e_field: np.ndarray):
        if step % self.stride == 0 or step == n_steps:
            self.record(ensemble.t, ensemble, e_field)

    @property
    def t(self) -> np.ndarray:
        return np.asarray(self.times, dtype=np.float64)

    @property
    def x(self) -> np.ndarray:
        """Positions, shape (n_times, n_ids, 3)"""
        return np.asarray(self._x).reshape(len(self.times), self.sample_ids.size, 3)

    @property
    def v(self) -> np.ndarray:
        return np.asarray(self._v).reshape(len(self.times), self.sample_ids.size, 3)

    @property
    def e_field(self) -> np.ndarray:
        return np.asarray(self._e).reshape(len(self.times), self.sample_ids.size, 3)

    def state(self, particle_id: int, time_index: int) -> Dict[str, Any]:
        """(x, v, E) of one logged particle at one logged time"""
        column = np.flatnonzero(self.sample_ids == particle_id)
        if column.size == 0:
            raise ValidationError("particle_id", "particle is not logged", particle_id)
        j = int(column[0])
        return {
            "t": self.times[time_index],
            "x": self._x[time_index][j],
            "v": self._v[time_index][j],
            "E": self._e[time_index][j],
        }

    def rows(self) -> np.ndarray:
        """Time-major table with the TRAJECTORY_COLUMNS layout"""
        m = self.sample_ids.size
        if not self.times or m == 0:
            return np.zeros((0, len(TRAJECTORY_COLUMNS)))
        n_t = len(self.times)
        ids = np.tile(self.sample_ids, n_t).astype(np.float64)
        times = np.repeat(self.t, m)
        return np.column_stack([
            ids, times,
            self.x.reshape(-1, 3), self.v.reshape(-1, 3), self.e_field.reshape(-1, 3),
        ])

    def to_csv(self, path: Union[str, Path]) -> Path:
        """Write the log with 17 significant digits per float"""
        path = Path(path)
        fmt = ["%d"] + ["%.17g"] * (len(TRAJECTORY_COLUMNS) - 1)
        np.savetxt(path, self.rows(), fmt=fmt, delimiter=",",
                   header=",".join(TRAJECTORY_COLUMNS), comments="")
        logger.debug(f"Wrote {len(self.times)} trajectory samples to {path}")
        return path

    def state_dict(self) -> Dict[str, np.ndarray]:
        return {
            "sample_ids": self.sample_ids,
            "stride": np.asarray(self.stride),
            "times": self.t,
            "x": self.x,
            "v": self.v,
            "e_field": self.e_field,
        }

    @classmethod
    def from_state(cls, state: Dict[str, np.ndarray]) -> "TrajectoryLog":
        log = cls(state["sample_ids"], int(state["stride"]))
        log.times = [float(t) for t in np.asarray(state["times"])]
        log._x = [np.array(a) for a in np.asarray(state["x"])]
        log._v = [np.array(a) for a in np.asarray(state["v"])]
        log._e = [np.array(a) for a in np.asarray(state["e_field"])]
        return log
