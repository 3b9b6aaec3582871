"""
Cutoff functions

`cutoff_phi` is the piecewise-cubic C^1 ramp used inside the weight function.
`bump` is the even plateau function psi~ (one on [-5/4, 5/4], zero outside
[-3/2, 3/2]) from which the dyadic shells and the angular-momentum floor are
built.
"""

from enum import Enum
from typing import Any

import numpy as np

LOWER_PLATEAU = 1.25
UPPER_SUPPORT = 1.5


class BumpProfile(str, Enum):
    """Transition profiles of psi~ between its plateau and its support edge"""
    SMOOTH = "smooth"
    SMOOTHSTEP = "smoothstep"


# Shared by the J cutoff, the velocity bins and the frequency shells.
BUMP_PROFILE = BumpProfile.SMOOTHSTEP


def _scaled(x: Any, l: int) -> np.ndarray:
    return np.ldexp(np.asarray(x, dtype=np.float64), -int(l))


def cutoff_phi(x: Any, l: int = 0) -> Any:
    """
    phi_l(x) = phi(2^-l x)

    phi is 0 for x <= 0, x^3 on [0, 1), 2 + (x - 2)^3 on [1, 2] and 2 for
    x >= 2. The scaling is a power of two, so phi_l agrees bit for bit with phi
    evaluated at the rescaled argument.

    Args:
        x: argument(s)
        l: dyadic scale

    Returns:
        Float for scalar input, array otherwise
    """
    y = _scaled(x, l)
    out = np.where(
        y <= 0.0, 0.0,
        np.where(y < 1.0, y ** 3, np.where(y <= 2.0, 2.0 + (y - 2.0) ** 3, 2.0)),
    )
    return float(out) if out.ndim == 0 else out


def cutoff_phi_derivative(x: Any, l: int = 0) -> Any:
    """phi_l'(x) = 2^-l phi'(2^-l x)"""
    y = _scaled(x, l)
    inner = np.where(
        y <= 0.0, 0.0,
        np.where(y < 1.0, 3.0 * y * y, np.where(y <= 2.0, 3.0 * (y - 2.0) ** 2, 0.0)),
    )
    out = np.ldexp(inner, -int(l))
    return float(out) if out.ndim == 0 else out


def _transition(s: np.ndarray, profile: BumpProfile) -> np.ndarray:
    """Rises from 0 at s <= 0 to 1 at s >= 1"""
    s = np.clip(s, 0.0, 1.0)
    if profile is BumpProfile.SMOOTHSTEP:
        return s * s * s * (10.0 + s * (-15.0 + 6.0 * s))

    inside = (s > 0.0) & (s < 1.0)
    safe = np.where(inside, s, 0.5)
    with np.errstate(over="ignore"):
        g = 1.0 / (1.0 + np.exp(1.0 / safe - 1.0 / (1.0 - safe)))
    return np.where(inside, g, np.where(s >= 1.0, 1.0, 0.0))


def bump(y: Any, profile: Any = BUMP_PROFILE) -> Any:
    """
    psi~(|y|): even, one on [-5/4, 5/4], zero outside [-3/2, 3/2]

    The default profile is the quintic C^2 smoothstep; `smooth` is a
    C-infinity transition kept for kernel-decay comparisons.
    """
    profile = BumpProfile(profile)
    t = np.abs(np.asarray(y, dtype=np.float64))
    s = (t - LOWER_PLATEAU) / (UPPER_SUPPORT - LOWER_PLATEAU)
    out = 1.0 - _transition(s, profile)
    return float(out) if out.ndim == 0 else out


def psi_at_least(y: Any, floor: float, profile: Any = BUMP_PROFILE) -> Any:
    """
    psi_{>=k}(y) = 1 - psi~(|y| / 2^(k-1)) with 2^k = floor

    Equals one for |y| >= floor and zero for |y| < floor / 2.
    """
    return 1.0 - bump(np.asarray(y, dtype=np.float64) / (0.5 * float(floor)), profile)
