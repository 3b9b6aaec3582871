"""
Momentum-binned densities and frequency-localized fields

E_{k;j1,j2} is the field of the particles weighted by phi_j1(|v_planar|)
phi_j2(|v|), band-limited to the frequency shell psi_k. On the grid it is the
periodic spectral multiply

    E_hat = -i xi / |xi|^2 * psi_k(xi) * rho_hat,    E_hat(0) = 0

which matches the outward convention E = grad(phi), laplacian(phi) = rho.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy import fft as sfft

from kinetics.exceptions import SolverResourceError, ValidationError
from kinetics.kinematics import lorentz_factor, planar_norm
from kinetics.particles import Ensemble
from field_solvers.grid import FieldGrid, GridSpec, grid_deposit, interpolate_field
from functionals.cutoffs import BUMP_PROFILE, bump
from .shells import (
    DyadicIndex,
    check_resolvable,
    momentum_cutoff,
    resolvable_band,
    shell_profile,
    wavevectors,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BinStats:
    """Weighted content of one momentum bin"""
    mass: float
    energy: float
    f_max: float

    def to_dict(self) -> Dict[str, float]:
        return {"mass": self.mass, "energy": self.energy, "f_max": self.f_max}


def bin_weights(ensemble: Ensemble, j1: int, j2: int) -> np.ndarray:
    """w_i phi_j1(|v_planar_i|) phi_j2(|v_i|)"""
    DyadicIndex(0, j1, j2)
    planar = momentum_cutoff(planar_norm(ensemble.v), j1)
    full = momentum_cutoff(np.linalg.norm(ensemble.v, axis=1), j2)
    return ensemble.w * planar * full


def bin_statistics(ensemble: Ensemble, j1: int, j2: int) -> BinStats:
    weights = bin_weights(ensemble, j1, j2)
    occupied = weights > 0
    return BinStats(
        mass=math.fsum(weights.tolist()),
        energy=math.fsum((weights * lorentz_factor(ensemble.v)).tolist()),
        f_max=float(np.max(ensemble.f0[occupied])) if np.any(occupied) else 0.0,
    )


def velocity_bin(ensemble: Ensemble, spec: GridSpec, j1: int, j2: int, workers: int = 1) -> FieldGrid:
    """
    Deposit of the (j1, j2) momentum bin

    Summed over every bin the deposits give back the full deposit.

    Args:
        ensemble: particles
        spec: target grid
        j1: planar-momentum shell
        j2: momentum shell
        workers: deposit threads

    Returns:
        FieldGrid with rho filled
    """
    grid = grid_deposit(ensemble, spec, weights=bin_weights(ensemble, j1, j2), workers=workers)
    return replace(grid, metadata={"j1": int(j1), "j2": int(j2)})


@dataclass(frozen=True)
class LocalizedField:
    """E_{k;j1,j2} on a grid, with the snapshot time and measured sup norm"""
    index: DyadicIndex
    grid: FieldGrid
    sup_norm: float
    t: float = 0.0

    @property
    def mean(self) -> np.ndarray:
        return self.grid.e_field.reshape(-1, 3).mean(axis=0)

    def recompute_sup_norm(self) -> float:
        return float(np.max(np.linalg.norm(self.grid.e_field, axis=-1)))

    def at(self, points: Any) -> np.ndarray:
        """Trilinear values at points; zero outside the grid"""
        return interpolate_field(replace(self.grid, total_mass=0.0), points)


def _multiplied(rho_hat: np.ndarray, spec: GridSpec, profile: np.ndarray, workers: int) -> np.ndarray:
    """irfft of -i xi / |xi|^2 * profile * rho_hat, per component"""
    KX, KY, KZ, magnitude = wavevectors(spec)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(magnitude > 0, profile / (magnitude * magnitude), 0.0)
    base = -1j * scale * rho_hat
    components = []
    for K in (KX, KY, KZ):
        components.append(sfft.irfftn(base * K, s=spec.dims, workers=workers))
    return np.stack(components, axis=-1)


def _transform(density: FieldGrid, workers: int) -> np.ndarray:
    try:
        return sfft.rfftn(density.rho, workers=workers)
    except MemoryError as exc:
        raise SolverResourceError(density.spec.dims, f"out of memory in the density transform ({exc})")


def localized_field(density: FieldGrid, k: int, j1: Optional[int] = None, j2: Optional[int] = None,
                    t: float = 0.0, workers: int = 1, rho_hat: Optional[np.ndarray] = None) -> LocalizedField:
    """
    Frequency-shell field of a binned density

    Args:
        density: binned deposit from velocity_bin (its metadata supplies j1, j2
            unless they are passed)
        k: frequency shell, inside resolvable_band(density.spec)
        j1, j2: momentum shells of the density
        t: snapshot time
        workers: scipy.fft workers
        rho_hat: precomputed rFFT of density.rho

    Returns:
        LocalizedField

    Raises:
        ResolutionError: k outside the resolvable band
    """
    spec = density.spec
    check_resolvable(spec, k)
    j1 = density.metadata.get("j1", 0) if j1 is None else j1
    j2 = density.metadata.get("j2", 0) if j2 is None else j2
    index = DyadicIndex(k, j1, j2)

    if rho_hat is None:
        rho_hat = _transform(density, workers)
    profile = shell_profile(wavevectors(spec)[3], k)
    e_field = _multiplied(rho_hat, spec, profile, workers)
    sup_norm = float(np.max(np.linalg.norm(e_field, axis=-1)))
    grid = replace(density, e_field=e_field, potential=None)
    return LocalizedField(index=index, grid=grid, sup_norm=sup_norm, t=t)


def band_limited_field(density: FieldGrid, band: Optional[Tuple[int, int]] = None,
                       workers: int = 1) -> FieldGrid:
    """
    Periodic spectral field restricted to the shells k_min..k_max

    The multiplier is psi~(|xi| / 2^k_max) - psi~(|xi| / 2^(k_min - 1)), the
    telescoped sum of the shell cutoffs.
    """
    spec = density.spec
    k_min, k_max = resolvable_band(spec) if band is None else band
    check_resolvable(spec, k_min)
    check_resolvable(spec, k_max)
    magnitude = wavevectors(spec)[3]
    profile = np.asarray(bump(np.ldexp(magnitude, -k_max), BUMP_PROFILE)) \
        - np.asarray(bump(np.ldexp(magnitude, 1 - k_min), BUMP_PROFILE))
    e_field = _multiplied(_transform(density, workers), spec, profile, workers)
    return replace(density, e_field=e_field, potential=None)


def localized_fields(density: FieldGrid, ks: Sequence[int], t: float = 0.0,
                     workers: int = 1) -> List[LocalizedField]:
    """
    Every shell of one binned density

    Shells are computed concurrently and returned in the order of `ks`.
    """
    for k in ks:
        check_resolvable(density.spec, k)
    rho_hat = _transform(density, 1)
    if len(ks) <= 1 or workers <= 1:
        return [localized_field(density, k, t=t, rho_hat=rho_hat) for k in ks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda k: localized_field(density, k, t=t, rho_hat=rho_hat), ks))


def iter_localized_fields(ensemble: Ensemble, spec: GridSpec, bins: Sequence[Tuple[int, int]],
                          ks: Sequence[int], t: float = 0.0, workers: int = 1) -> Iterator[LocalizedField]:
    """Localized fields bin by bin, shell by shell, without holding more than one bin"""
    for j1, j2 in bins:
        density = velocity_bin(ensemble, spec, j1, j2, workers=workers)
        yield from localized_fields(density, ks, t=t, workers=workers)


@dataclass
class KernelEnvelope:
    """Realized kernel of shell k measured against C 2^(2k) (1 + 2^k |y|)^-6"""
    k: int
    spacing: float
    envelope_power: float
    envelope_constant: float
    decay_exponent: float
    tail_range: Tuple[float, float]

    def to_dict(self) -> Dict[str, Any]:
        return dict(self.__dict__)


def kernel_envelope(spec: GridSpec, k: int, envelope_power: float = 6.0,
                    tail_start: float = 4.0, workers: int = 1) -> KernelEnvelope:
    """
    Kernel of shell k realized by the spectral multiplier

    A unit mass in the center cell is transformed; |K(y)| is compared to the
    envelope 2^(2k) (1 + 2^k |y|)^-power for |y| up to half the box. The decay
    exponent is the least-squares slope of log(max |K| per radial shell)
    against log(1 + 2^k |y|) over 2^k |y| >= tail_start.

    Args:
        spec: grid
        k: resolvable shell
        envelope_power: power of the envelope
        tail_start: start of the fitted tail in units of 2^-k
        workers: scipy.fft workers

    Returns:
        KernelEnvelope
    """
    check_resolvable(spec, k)
    rho = np.zeros(spec.dims)
    center = tuple(n // 2 for n in spec.dims)
    rho[center] = 1.0 / spec.cell_volume
    density = FieldGrid(spec=spec, rho=rho, deposited_mass=1.0, total_mass=1.0)
    kernel = localized_field(density, k, 0, 0, workers=workers).grid.e_field
    magnitude = np.linalg.norm(kernel, axis=-1)

    centers = spec.centers()
    distance = np.linalg.norm(centers - centers[center], axis=-1)
    del centers
    half_box = 0.5 * float(np.min(spec.lengths))
    scale = 2.0 ** k
    inside = distance <= half_box
    envelope = scale * scale * (1.0 + scale * distance) ** (-envelope_power)
    constant = float(np.max(magnitude[inside] / envelope[inside]))

    reach = scale * half_box
    edges = np.linspace(tail_start, reach, 17) if reach > tail_start else np.zeros(0)
    scaled = scale * distance
    shell_max, shell_mid = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        chosen = (scaled >= lo) & (scaled < hi)
        if np.any(chosen) and np.max(magnitude[chosen]) > 0:
            shell_max.append(float(np.max(magnitude[chosen])))
            shell_mid.append(0.5 * (lo + hi))
    if len(shell_max) >= 2:
        slope = np.polyfit(np.log1p(np.asarray(shell_mid)), np.log(np.asarray(shell_max)), 1)[0]
        decay = float(-slope)
    else:
        decay = math.nan
        logger.warning(f"Kernel tail for k={k} spans too few shells to fit a decay exponent")

    return KernelEnvelope(
        k=int(k),
        spacing=spec.spacing,
        envelope_power=float(envelope_power),
        envelope_constant=constant,
        decay_exponent=decay,
        tail_range=(float(tail_start), float(reach)),
    )
