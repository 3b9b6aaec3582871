"""
Particle and ensemble data structures

An Ensemble stores one characteristic curve per particle as structure-of-arrays.
Weights, initial phase points and f0 values are frozen at sampling time; only
positions, momenta and the clock change under pushing.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, Optional

import numpy as np

from .exceptions import ValidationError
from .kinematics import planar_angular_momentum


def _frozen(array: Any, shape_tail: tuple = ()) -> np.ndarray:
    out = np.array(array, dtype=np.float64, copy=True)
    if out.shape[1:] != shape_tail:
        raise ValidationError("shape", f"expected trailing shape {shape_tail}", out.shape)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class Particle:
    """
    One characteristic curve

    x, v are the current phase point, x0, v0 the frozen initial phase point,
    ell0 the initial planar angular momentum and f0 the value of the initial
    distribution at (x0, v0), which is also the value of f along the curve.
    """
    x: np.ndarray
    v: np.ndarray
    w: float
    f0: float
    x0: np.ndarray
    v0: np.ndarray
    ell0: float

    @property
    def ell(self) -> float:
        """Current planar angular momentum"""
        return float(planar_angular_momentum(self.x, self.v))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "x": self.x.tolist(),
            "v": self.v.tolist(),
            "w": self.w,
            "f0": self.f0,
            "x0": self.x0.tolist(),
            "v0": self.v0.tolist(),
            "ell0": self.ell0,
        }


@dataclass(frozen=True)
class Ensemble:
    """
    Weighted particle cloud approximating f(t, x, v)

    Build one with `Ensemble.create`; every array is read-only afterwards.
    """
    x: np.ndarray
    v: np.ndarray
    w: np.ndarray
    f0: np.ndarray
    x0: np.ndarray
    v0: np.ndarray
    ell0: np.ndarray
    t: float = 0.0
    seed: Optional[int] = None
    metadata: Dict[str, Any] = field(default_factory=dict, compare=False)

    @classmethod
    def create(cls, x, v, w, f0=None, t: float = 0.0, seed: Optional[int] = None,
               x0=None, v0=None, metadata: Optional[Dict[str, Any]] = None) -> "Ensemble":
        """
        Create an ensemble; the initial phase point defaults to (x, v)

        Args:
            x: positions, shape (n, 3)
            v: momenta, shape (n, 3)
            w: nonnegative weights, shape (n,)
            f0: values of f0 at the initial phase points (defaults to zeros)
            t: clock
            seed: RNG seed used at sampling
        """
        x = _frozen(np.reshape(x, (-1, 3)), (3,))
        v = _frozen(np.reshape(v, (-1, 3)), (3,))
        w = _frozen(np.reshape(w, (-1,)))
        n = x.shape[0]
        if v.shape[0] != n or w.shape[0] != n:
            raise ValidationError("particles", "x, v and w must have the same length", (n, v.shape[0], w.shape[0]))
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValidationError("w", "weights must be finite and nonnegative")
        f0 = _frozen(np.zeros(n) if f0 is None else np.reshape(f0, (-1,)))
        if f0.shape[0] != n:
            raise ValidationError("f0", "f0 must have one value per particle", f0.shape)
        if np.any(f0 < 0):
            raise ValidationError("f0", "f0 must be nonnegative")
        x0 = x if x0 is None else _frozen(np.reshape(x0, (-1, 3)), (3,))
        v0 = v if v0 is None else _frozen(np.reshape(v0, (-1, 3)), (3,))
        ell0 = _frozen(planar_angular_momentum(x0, v0))
        return cls(x=x, v=v, w=w, f0=f0, x0=x0, v0=v0, ell0=ell0, t=float(t),
                   seed=seed, metadata=dict(metadata or {}))

    def __len__(self) -> int:
        return int(self.x.shape[0])

    @property
    def n(self) -> int:
        return len(self)

    @property
    def total_mass(self) -> float:
        """Exactly rounded sum of weights"""
        return math.fsum(self.w.tolist())

    def particle(self, i: int) -> Particle:
        return Particle(
            x=self.x[i], v=self.v[i], w=float(self.w[i]), f0=float(self.f0[i]),
            x0=self.x0[i], v0=self.v0[i], ell0=float(self.ell0[i])
        )

    def particles(self) -> Iterator[Particle]:
        for i in range(len(self)):
            yield self.particle(i)

    def distribution_value(self, i: int) -> float:
        """Value of f at (x_i(t), v_i(t)); f is transported, so this is f0"""
        return float(self.f0[i])

    def ell(self) -> np.ndarray:
        """Current planar angular momenta"""
        return planar_angular_momentum(self.x, self.v)

    def with_state(self, x: np.ndarray, v: np.ndarray, t: float) -> "Ensemble":
        """New ensemble at time t sharing every frozen array with this one"""
        if t < self.t:
            raise ValidationError("t", "ensemble clock must not decrease", t)
        return Ensemble(
            x=_frozen(x, (3,)), v=_frozen(v, (3,)), w=self.w, f0=self.f0,
            x0=self.x0, v0=self.v0, ell0=self.ell0, t=float(t), seed=self.seed,
            metadata=self.metadata
        )

    def select(self, ids: np.ndarray) -> "Ensemble":
        """Sub-ensemble of the given particle indices"""
        ids = np.asarray(ids, dtype=np.int64)
        return Ensemble.create(
            self.x[ids], self.v[ids], self.w[ids], self.f0[ids], t=self.t,
            seed=self.seed, x0=self.x0[ids], v0=self.v0[ids], metadata=self.metadata
        )

    def to_arrays(self) -> Dict[str, np.ndarray]:
        """Arrays for checkpointing"""
        return {
            "x": np.asarray(self.x), "v": np.asarray(self.v), "w": np.asarray(self.w),
            "f0": np.asarray(self.f0), "x0": np.asarray(self.x0), "v0": np.asarray(self.v0),
        }

    @classmethod
    def from_arrays(cls, arrays: Dict[str, np.ndarray], t: float,
                    seed: Optional[int] = None) -> "Ensemble":
        return cls.create(arrays["x"], arrays["v"], arrays["w"], arrays["f0"], t=t,
                          seed=seed, x0=arrays["x0"], v0=arrays["v0"])


def block_slices(n: int, block_size: int) -> Iterator[slice]:
    """Fixed, ordered partition of range(n) used by deterministic reductions"""
    block_size = max(1, int(block_size))
    for start in range(0, n, block_size):
        yield slice(start, min(start + block_size, n))
