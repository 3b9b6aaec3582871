"""
Dyadic shells in frequency and momentum

psi_k(xi) = psi~(|xi| / 2^k) - psi~(|xi| / 2^(k-1)) localizes |xi| to
[5/8 2^k, 3/2 2^k]. Momentum bins use phi_0 = psi~ and phi_j = psi_j for
j > 0, so sum_{j >= 0} phi_j = 1.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Any, Dict, Iterator, Tuple

import numpy as np

from kinetics.exceptions import ResolutionError, ValidationError
from field_solvers.grid import GridSpec
from functionals.cutoffs import BUMP_PROFILE, bump

logger = logging.getLogger(__name__)


def dyadic_cutoff(xi: Any, k: int) -> Any:
    """
    Shell cutoff psi_k at a frequency vector or magnitude

    Args:
        xi: scalar magnitude, or vector(s) with the last axis of length 3
        k: shell index

    Returns:
        Float for a single frequency, array otherwise
    """
    xi = np.asarray(xi, dtype=np.float64)
    magnitude = np.linalg.norm(xi, axis=-1) if xi.ndim >= 1 and xi.shape[-1] == 3 else np.abs(xi)
    out = shell_profile(magnitude, k)
    return float(out) if out.ndim == 0 else out


def shell_profile(magnitude: np.ndarray, k: int) -> np.ndarray:
    """psi_k on an array of frequency magnitudes"""
    magnitude = np.asarray(magnitude, dtype=np.float64)
    return np.asarray(bump(np.ldexp(magnitude, -int(k)), BUMP_PROFILE)) \
        - np.asarray(bump(np.ldexp(magnitude, 1 - int(k)), BUMP_PROFILE))


def momentum_cutoff(speed: Any, j: int) -> np.ndarray:
    """phi_j(speed): psi~ for j = 0, psi_j for j > 0"""
    if int(j) != j or j < 0:
        raise ValidationError("j", "momentum shell must be a nonnegative integer", j)
    speed = np.asarray(speed, dtype=np.float64)
    if j == 0:
        return np.asarray(bump(speed, BUMP_PROFILE))
    return np.asarray(dyadic_cutoff(speed, int(j)))


def top_momentum_shell(max_speed: float) -> int:
    """Smallest J with sum_{j <= J} phi_j = 1 up to max_speed"""
    if max_speed <= 1.25:
        return 0
    return int(math.ceil(math.log2(max_speed / 1.25)))


class IndexClass(str, Enum):
    """Membership of a dyadic index in the core set B"""
    CORE = "B"
    COMPLEMENT = "B^c"


@dataclass(frozen=True, order=True)
class DyadicIndex:
    """(k, j1, j2): frequency shell k, planar-momentum shell j1, momentum shell j2"""
    k: int
    j1: int
    j2: int

    def __post_init__(self):
        for name in ("k", "j1", "j2"):
            value = getattr(self, name)
            if int(value) != value:
                raise ValidationError(name, "must be an integer", value)
            object.__setattr__(self, name, int(value))
        if self.j1 < 0 or self.j2 < 0:
            raise ValidationError("j1, j2", "momentum shells are nonnegative", (self.j1, self.j2))
        if self.j1 > self.j2 + 2:
            raise ValidationError("j1", "planar shell above j2 + 2 is always empty", (self.j1, self.j2))

    @property
    def bin(self) -> Tuple[int, int]:
        return (self.j1, self.j2)

    def to_dict(self) -> Dict[str, int]:
        return {"k": self.k, "j1": self.j1, "j2": self.j2}


def momentum_bins(j2_max: int) -> Iterator[Tuple[int, int]]:
    """Every (j1, j2) with j2 <= j2_max that can hold particles"""
    for j2 in range(j2_max + 1):
        for j1 in range(j2 + 2):
            yield (j1, j2)


def classify_index(index: DyadicIndex, m_t: int, epsilon: float) -> IndexClass:
    """
    Core set B: |k - 2 j1| <= 4 eps M_t, (1 - 5.5 eps) M_t <= j2 <= (1 + eps) M_t
    and j1 >= 5 M_t / 8 + 10 eps M_t
    """
    em = epsilon * m_t
    core = (
        abs(index.k - 2 * index.j1) <= 4.0 * em
        and (1.0 - 5.5 * epsilon) * m_t <= index.j2 <= (1.0 + epsilon) * m_t
        and index.j1 >= 5.0 * m_t / 8.0 + 10.0 * em
    )
    return IndexClass.CORE if core else IndexClass.COMPLEMENT


def resolvable_band(spec: GridSpec) -> Tuple[int, int]:
    """
    Integer shells k with log2(2 pi / L) + 1 <= k <= log2(pi / h) - 1

    L is the shortest box side, h the spacing.
    """
    length = float(np.min(spec.lengths))
    k_min = math.ceil(math.log2(2.0 * math.pi / length) + 1.0)
    k_max = math.floor(math.log2(math.pi / spec.spacing) - 1.0)
    return int(k_min), int(k_max)


def check_resolvable(spec: GridSpec, k: int) -> None:
    k_min, k_max = resolvable_band(spec)
    if not k_min <= k <= k_max:
        raise ResolutionError(k, (k_min, k_max))


@lru_cache(maxsize=4)
def wavevectors(spec: GridSpec) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Sparse rFFT wavevector components and |xi| for a grid"""
    h = spec.spacing
    nx, ny, nz = spec.dims
    kx = 2.0 * np.pi * np.fft.fftfreq(nx, d=h)
    ky = 2.0 * np.pi * np.fft.fftfreq(ny, d=h)
    kz = 2.0 * np.pi * np.fft.rfftfreq(nz, d=h)
    KX, KY, KZ = np.meshgrid(kx, ky, kz, indexing="ij", sparse=True)
    magnitude = np.sqrt(KX * KX + KY * KY + KZ * KZ)
    return KX, KY, KZ, magnitude
