"""
Relativistic kinematics shared by every module

All helpers accept a single 3-vector or an (n, 3) array and broadcast over the
leading axes. Momenta are dimensionless (mass and c set to one).
"""

import numpy as np
import numpy.typing as npt

ArrayLike = npt.ArrayLike


def lorentz_factor(v: ArrayLike) -> np.ndarray:
    """<v> = sqrt(1 + |v|^2)"""
    v = np.asarray(v, dtype=np.float64)
    return np.sqrt(1.0 + np.einsum("...i,...i->...", v, v))


def relativistic_velocity(v: ArrayLike) -> np.ndarray:
    """
    Velocity v / sqrt(1 + |v|^2) of a particle with momentum v

    Args:
        v: momentum vector(s), shape (3,) or (n, 3)

    Returns:
        Velocity with the same shape; its norm is strictly below one
    """
    v = np.asarray(v, dtype=np.float64)
    return v / lorentz_factor(v)[..., None]


def planar_angular_momentum(x: ArrayLike, v: ArrayLike) -> np.ndarray:
    """x1*v2 - x2*v1, the x3-component of x cross v"""
    x = np.asarray(x, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    return x[..., 0] * v[..., 1] - x[..., 1] * v[..., 0]


def angular_momentum(x: ArrayLike, v: ArrayLike) -> np.ndarray:
    """Full angular momentum x cross v"""
    return np.cross(np.asarray(x, dtype=np.float64), np.asarray(v, dtype=np.float64))


def planar_norm(x: ArrayLike) -> np.ndarray:
    """|(x1, x2)|"""
    x = np.asarray(x, dtype=np.float64)
    return np.hypot(x[..., 0], x[..., 1])


def norm(x: ArrayLike) -> np.ndarray:
    return np.linalg.norm(np.asarray(x, dtype=np.float64), axis=-1)


def rotate_planar(x: ArrayLike, angle: float) -> np.ndarray:
    """Rotate the planar part of x by `angle` about the x3-axis"""
    x = np.array(x, dtype=np.float64, copy=True)
    c, s = np.cos(angle), np.sin(angle)
    x1, x2 = x[..., 0].copy(), x[..., 1].copy()
    x[..., 0] = c * x1 - s * x2
    x[..., 1] = s * x1 + c * x2
    return x
