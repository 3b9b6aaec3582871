"""
Direct Green's-function summation

E(x) = (1/4pi) sum_j w_j (x - x_j) / (|x - x_j|^2 + eps^2)^(3/2)

The O(N M) oracle backend. Kernels are parallel over targets only; each
target's sum runs sequentially over sources in index order, so results do not
depend on the numba thread count.
"""

import logging
import math
from typing import Any

import numpy as np
from numba import njit, prange

from kinetics.exceptions import ValidationError
from kinetics.particles import Ensemble

logger = logging.getLogger(__name__)

INV_FOUR_PI = 1.0 / (4.0 * math.pi)


@njit(parallel=True, cache=True)
def _field_kernel(targets, sources, weights, eps2, out):
    n_targets = targets.shape[0]
    n_sources = sources.shape[0]
    for i in prange(n_targets):
        ex = 0.0
        ey = 0.0
        ez = 0.0
        tx = targets[i, 0]
        ty = targets[i, 1]
        tz = targets[i, 2]
        for j in range(n_sources):
            dx = tx - sources[j, 0]
            dy = ty - sources[j, 1]
            dz = tz - sources[j, 2]
            r2 = dx * dx + dy * dy + dz * dz
            if r2 == 0.0:
                continue
            d2 = r2 + eps2
            s = weights[j] / (d2 * math.sqrt(d2))
            ex += dx * s
            ey += dy * s
            ez += dz * s
        out[i, 0] = ex * INV_FOUR_PI
        out[i, 1] = ey * INV_FOUR_PI
        out[i, 2] = ez * INV_FOUR_PI


@njit(parallel=True, cache=True)
def _particle_field_kernel(positions, sources, weights, eps2, out):
    n = positions.shape[0]
    for i in prange(n):
        ex = 0.0
        ey = 0.0
        ez = 0.0
        for j in range(sources.shape[0]):
            if j == i:
                continue
            dx = positions[i, 0] - sources[j, 0]
            dy = positions[i, 1] - sources[j, 1]
            dz = positions[i, 2] - sources[j, 2]
            d2 = dx * dx + dy * dy + dz * dz + eps2
            if d2 == 0.0:
                continue
            s = weights[j] / (d2 * math.sqrt(d2))
            ex += dx * s
            ey += dy * s
            ez += dz * s
        out[i, 0] = ex * INV_FOUR_PI
        out[i, 1] = ey * INV_FOUR_PI
        out[i, 2] = ez * INV_FOUR_PI


@njit(parallel=True, cache=True)
def _second_moment_kernel(targets, sources, weights, eps2, out_sq, out_vec):
    for i in prange(targets.shape[0]):
        sq = 0.0
        vx = 0.0
        vy = 0.0
        vz = 0.0
        for j in range(sources.shape[0]):
            dx = targets[i, 0] - sources[j, 0]
            dy = targets[i, 1] - sources[j, 1]
            dz = targets[i, 2] - sources[j, 2]
            r2 = dx * dx + dy * dy + dz * dz
            if r2 == 0.0:
                continue
            d2 = r2 + eps2
            s = INV_FOUR_PI / (d2 * math.sqrt(d2))
            w2 = weights[j] * weights[j]
            sq += w2 * r2 * s * s
            vx += w2 * dx * s
            vy += w2 * dy * s
            vz += w2 * dz * s
        out_sq[i] = sq
        out_vec[i, 0] = vx
        out_vec[i, 1] = vy
        out_vec[i, 2] = vz


@njit(parallel=True, cache=True)
def _potential_kernel(targets, sources, weights, eps2, out):
    n_targets = targets.shape[0]
    n_sources = sources.shape[0]
    for i in prange(n_targets):
        acc = 0.0
        for j in range(n_sources):
            dx = targets[i, 0] - sources[j, 0]
            dy = targets[i, 1] - sources[j, 1]
            dz = targets[i, 2] - sources[j, 2]
            r2 = dx * dx + dy * dy + dz * dz
            if r2 == 0.0:
                continue
            acc += weights[j] / math.sqrt(r2 + eps2)
        out[i] = -acc * INV_FOUR_PI


@njit(parallel=True, cache=True)
def _pair_energy_kernel(positions, weights, eps2, out):
    n = positions.shape[0]
    for i in prange(n):
        acc = 0.0
        for j in range(n):
            if j == i:
                continue
            dx = positions[i, 0] - positions[j, 0]
            dy = positions[i, 1] - positions[j, 1]
            dz = positions[i, 2] - positions[j, 2]
            d2 = dx * dx + dy * dy + dz * dz + eps2
            if d2 == 0.0:
                continue
            acc += weights[j] / math.sqrt(d2)
        out[i] = weights[i] * acc


def _as_targets(targets: Any) -> np.ndarray:
    return np.ascontiguousarray(np.reshape(np.asarray(targets, dtype=np.float64), (-1, 3)))


def _check_softening(softening: float) -> float:
    if not (softening >= 0 and math.isfinite(softening)):
        raise ValidationError("softening", "must be finite and nonnegative", softening)
    return float(softening) ** 2


def direct_sum_field(ensemble: Ensemble, targets: Any, softening: float = 0.0) -> np.ndarray:
    """
    Softened Coulomb sum over every particle

    A source coinciding with a target is skipped, which removes the
    self-interaction when the targets are the particles themselves.

    Args:
        ensemble: sources
        targets: query positions, shape (3,) or (m, 3)
        softening: Plummer length eps >= 0

    Returns:
        Field at each target, shape (m, 3)
    """
    eps2 = _check_softening(softening)
    pts = _as_targets(targets)
    out = np.zeros_like(pts)
    if len(ensemble) and pts.shape[0]:
        _field_kernel(pts, np.ascontiguousarray(ensemble.x), np.ascontiguousarray(ensemble.w), eps2, out)
    return out


def direct_sum_noise(ensemble: Ensemble, targets: Any, softening: float = 0.0) -> np.ndarray:
    """
    Sampling standard error of direct_sum_field at each target

    The particles are taken as independent draws of their distribution, so
    with k_j the kernel of source j and E the summed field

        sigma^2 = sum_j w_j^2 |k_j - E / M|^2,    M = sum_j w_j

    is the spread of the summed field over independent samples of one
    distribution. A single close source dominates it near a particle.

    Returns:
        sigma at each target, shape (m,)
    """
    eps2 = _check_softening(softening)
    pts = _as_targets(targets)
    if not len(ensemble) or not pts.shape[0]:
        return np.zeros(pts.shape[0])
    sources = np.ascontiguousarray(ensemble.x)
    weights = np.ascontiguousarray(ensemble.w)
    field = np.zeros_like(pts)
    _field_kernel(pts, sources, weights, eps2, field)
    second = np.zeros(pts.shape[0])
    cross = np.zeros_like(pts)
    _second_moment_kernel(pts, sources, weights, eps2, second, cross)

    mass = ensemble.total_mass
    mean = field / mass if mass > 0 else np.zeros_like(field)
    weight_sq = float(np.dot(weights, weights))
    variance = second - 2.0 * np.einsum("ij,ij->i", mean, cross) + weight_sq * np.einsum("ij,ij->i", mean, mean)
    return np.sqrt(np.maximum(variance, 0.0))


def direct_sum_potential(ensemble: Ensemble, targets: Any, softening: float = 0.0) -> np.ndarray:
    """phi(x) = -(1/4pi) sum_j w_j / sqrt(|x - x_j|^2 + eps^2), with grad phi = direct_sum_field"""
    eps2 = _check_softening(softening)
    pts = _as_targets(targets)
    out = np.zeros(pts.shape[0])
    if len(ensemble) and pts.shape[0]:
        _potential_kernel(pts, np.ascontiguousarray(ensemble.x), np.ascontiguousarray(ensemble.w), eps2, out)
    return out


def pairwise_field_energy(ensemble: Ensemble, softening: float = 0.0) -> float:
    """
    Softened pairwise field energy (1/8pi) sum_{i != j} w_i w_j / dist_ij

    Per-particle partial sums are combined with an exactly rounded sum.
    """
    eps2 = _check_softening(softening)
    n = len(ensemble)
    if n < 2:
        return 0.0
    partial = np.zeros(n)
    _pair_energy_kernel(np.ascontiguousarray(ensemble.x), np.ascontiguousarray(ensemble.w), eps2, partial)
    return math.fsum(partial.tolist()) * 0.5 * INV_FOUR_PI


def direct_particle_field(sources: np.ndarray, weights: np.ndarray, positions: np.ndarray,
                          softening: float = 0.0) -> np.ndarray:
    """
    Field on particle i at positions[i] from every source j != i

    Sources and positions share particle indices; the sources may be an older
    snapshot of the same particles when the field is held between rebuilds.
    """
    eps2 = _check_softening(softening)
    positions = np.ascontiguousarray(positions, dtype=np.float64)
    out = np.zeros_like(positions)
    if positions.shape[0]:
        _particle_field_kernel(
            positions, np.ascontiguousarray(sources, dtype=np.float64),
            np.ascontiguousarray(weights, dtype=np.float64), eps2, out
        )
    return out
