"""
Gridded spectral backend

Cloud-in-cell deposition onto cell centers, free-space Poisson solve by
zero-padded FFT convolution with the Green's function (domain doubling), and
trilinear interpolation back to particles.

Cell (i, j, k) has center origin + (i + 1/2, j + 1/2, k + 1/2) * h. A particle is
in the box when it lies in the hull of the cell centers; particles outside are
skipped by the deposit and counted.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import fft as sfft

from kinetics.exceptions import SolverResourceError, ValidationError
from kinetics.particles import Ensemble, block_slices

logger = logging.getLogger(__name__)

FOUR_PI = 4.0 * math.pi

# mean of 1/|r| over the unit cube centered at the origin
_CUBE_SELF_POTENTIAL = 2.3800773

DEFAULT_BLOCK_SIZE = 65536


@dataclass(frozen=True)
class GridSpec:
    """Uniform Cartesian grid: origin is the low corner of cell (0, 0, 0)"""
    origin: Tuple[float, float, float]
    spacing: float
    dims: Tuple[int, int, int]

    def __post_init__(self):
        if not (self.spacing > 0 and math.isfinite(self.spacing)):
            raise ValidationError("grid.spacing", "must be positive and finite", self.spacing)
        if len(self.dims) != 3 or any(int(n) != n or n < 2 for n in self.dims):
            raise ValidationError("grid.dims", "need three integer dims, each >= 2", tuple(self.dims))
        if len(self.origin) != 3 or not all(math.isfinite(o) for o in self.origin):
            raise ValidationError("grid.origin", "need three finite coordinates", tuple(self.origin))
        object.__setattr__(self, "dims", tuple(int(n) for n in self.dims))
        object.__setattr__(self, "origin", tuple(float(o) for o in self.origin))
        object.__setattr__(self, "spacing", float(self.spacing))

    @classmethod
    def centered(cls, n: int, half_width: float) -> "GridSpec":
        """Cube [-half_width, half_width]^3 split into n^3 cells"""
        if not half_width > 0:
            raise ValidationError("grid.half_width", "must be positive", half_width)
        return cls(origin=(-half_width,) * 3, spacing=2.0 * half_width / n, dims=(n, n, n))

    @property
    def cell_volume(self) -> float:
        return self.spacing ** 3

    @property
    def lengths(self) -> np.ndarray:
        """Periodic box lengths n * h"""
        return np.asarray(self.dims, dtype=np.float64) * self.spacing

    def axis(self, d: int) -> np.ndarray:
        """Cell-center coordinates along axis d"""
        return self.origin[d] + (np.arange(self.dims[d]) + 0.5) * self.spacing

    def centers(self) -> np.ndarray:
        """All cell centers, shape dims + (3,)"""
        return np.stack(np.meshgrid(self.axis(0), self.axis(1), self.axis(2), indexing="ij"), axis=-1)

    def to_dict(self) -> Dict[str, Any]:
        return {"origin": list(self.origin), "spacing": self.spacing, "dims": list(self.dims)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "GridSpec":
        return cls(origin=tuple(data["origin"]), spacing=float(data["spacing"]), dims=tuple(data["dims"]))


@dataclass(frozen=True)
class FieldGrid:
    """
    Gridded density and field

    rho is mass per unit volume in each cell; e_field and potential are filled
    by `grid_poisson_solve`. total_mass includes particles that fell outside the
    box and is used by the far-field fallback.
    """
    spec: GridSpec
    rho: np.ndarray
    e_field: Optional[np.ndarray] = None
    potential: Optional[np.ndarray] = None
    deposited_mass: float = 0.0
    total_mass: float = 0.0
    out_of_box_count: int = 0
    out_of_box_mass: float = 0.0
    metadata: Dict[str, Any] = field(default_factory=dict, compare=False)

    @property
    def has_field(self) -> bool:
        return self.e_field is not None

    def mass(self) -> float:
        """sum rho * cell volume"""
        return math.fsum(self.rho.ravel().tolist()) * self.spec.cell_volume


def _cic_indices(spec: GridSpec, x: np.ndarray):
    """Lower corner index, fractional offsets and in-box mask for CIC weights"""
    n = np.asarray(spec.dims)
    s = (x - np.asarray(spec.origin)) / spec.spacing - 0.5
    inside = np.all((s >= 0.0) & (s <= n - 1), axis=-1)
    i0 = np.clip(np.floor(s).astype(np.int64), 0, n - 2)
    frac = s - i0
    return i0, frac, inside


def _deposit_block(spec: GridSpec, x: np.ndarray, w: np.ndarray) -> Tuple[np.ndarray, float, int]:
    i0, frac, inside = _cic_indices(spec, x)
    i0, frac, w_in = i0[inside], frac[inside], w[inside]
    ny, nz = spec.dims[1], spec.dims[2]
    size = spec.dims[0] * ny * nz
    out = np.zeros(size)
    for dx in (0, 1):
        wx = frac[:, 0] if dx else 1.0 - frac[:, 0]
        for dy in (0, 1):
            wy = frac[:, 1] if dy else 1.0 - frac[:, 1]
            for dz in (0, 1):
                wz = frac[:, 2] if dz else 1.0 - frac[:, 2]
                flat = ((i0[:, 0] + dx) * ny + (i0[:, 1] + dy)) * nz + (i0[:, 2] + dz)
                out += np.bincount(flat, weights=w_in * wx * wy * wz, minlength=size)
    outside = ~inside
    return out, math.fsum(w[outside].tolist()), int(outside.sum())


def grid_deposit(ensemble: Ensemble, spec: GridSpec, weights: Optional[np.ndarray] = None,
                 workers: int = 1, block_size: int = DEFAULT_BLOCK_SIZE) -> FieldGrid:
    """
    Cloud-in-cell deposit of particle weights

    Particles are split into fixed blocks; blocks are deposited concurrently
    and reduced in block order, so the result does not depend on `workers`.

    Args:
        ensemble: particles to deposit
        spec: target grid
        weights: per-particle masses overriding ensemble.w (used for
            velocity-binned deposits)
        workers: deposit threads
        block_size: particles per block

    Returns:
        FieldGrid with rho filled
    """
    w = np.asarray(ensemble.w if weights is None else weights, dtype=np.float64)
    if w.shape != (len(ensemble),):
        raise ValidationError("weights", "need one weight per particle", w.shape)

    blocks = list(block_slices(len(ensemble), block_size))
    mass = np.zeros(int(np.prod(spec.dims)))
    outside_mass, outside_count = [], 0
    if blocks:
        with ThreadPoolExecutor(max_workers=max(1, int(workers))) as pool:
            results = pool.map(lambda sl: _deposit_block(spec, ensemble.x[sl], w[sl]), blocks)
            for partial, lost_mass, lost_count in results:
                mass += partial
                outside_mass.append(lost_mass)
                outside_count += lost_count

    lost = math.fsum(outside_mass)
    if outside_count:
        logger.debug(f"Grid deposit skipped {outside_count} out-of-box particles (mass {lost:.6g})")

    rho = mass.reshape(spec.dims) / spec.cell_volume
    deposited = math.fsum(mass.tolist())
    return FieldGrid(
        spec=spec,
        rho=rho,
        deposited_mass=deposited,
        total_mass=math.fsum(w.tolist()),
        out_of_box_count=outside_count,
        out_of_box_mass=lost,
    )


@lru_cache(maxsize=8)
def _green_transform(dims: Tuple[int, int, int], spacing: float) -> np.ndarray:
    """rFFT of G = -1/(4pi r) on the doubled grid, with the cell-averaged value at r = 0"""
    axes = []
    for n in dims:
        i = np.arange(2 * n)
        axes.append(np.minimum(i, 2 * n - i) * spacing)
    X, Y, Z = np.meshgrid(*axes, indexing="ij", sparse=True)
    r = np.sqrt(X * X + Y * Y + Z * Z)
    with np.errstate(divide="ignore"):
        green = -1.0 / (FOUR_PI * r)
    green[0, 0, 0] = -_CUBE_SELF_POTENTIAL / (FOUR_PI * spacing)
    return sfft.rfftn(green)


def grid_poisson_solve(grid: FieldGrid, workers: int = 1) -> FieldGrid:
    """
    Free-space solve of laplacian(phi) = rho and E = grad(phi)

    The density is zero-padded to twice the grid in every axis and convolved
    with the free-space Green's function, so no periodic images enter. E is
    the second-order central-difference gradient of phi.

    Args:
        grid: FieldGrid with rho filled
        workers: scipy.fft worker threads

    Returns:
        New FieldGrid with potential and e_field filled
    """
    spec = grid.spec
    dims = spec.dims
    padded = tuple(2 * n for n in dims)
    try:
        green_hat = _green_transform(dims, spec.spacing)
        rho_hat = sfft.rfftn(grid.rho, s=padded, workers=workers)
        phi = sfft.irfftn(rho_hat * green_hat, s=padded, workers=workers)
    except MemoryError as exc:
        raise SolverResourceError(padded, f"out of memory during domain doubling ({exc})")

    phi = phi[: dims[0], : dims[1], : dims[2]] * spec.cell_volume
    gradient = np.gradient(phi, spec.spacing)
    e_field = np.stack(gradient, axis=-1)
    return replace(grid, potential=phi, e_field=e_field)


def interpolate_field(grid: FieldGrid, x: Any) -> np.ndarray:
    """
    Trilinear interpolation of the gridded field

    Queries outside the hull of cell centers use the monopole far field
    M / (4pi |x|^2) x_hat with M the grid's total mass.

    Args:
        grid: FieldGrid with e_field filled
        x: query position(s), shape (3,) or (n, 3)

    Returns:
        Field vector(s) with the shape of x
    """
    if grid.e_field is None:
        raise ValidationError("grid.e_field", "field not solved; call grid_poisson_solve first")
    x = np.asarray(x, dtype=np.float64)
    pts = np.reshape(x, (-1, 3))
    i0, frac, inside = _cic_indices(grid.spec, pts)

    out = np.zeros_like(pts)
    e = grid.e_field
    for dx in (0, 1):
        wx = frac[:, 0] if dx else 1.0 - frac[:, 0]
        for dy in (0, 1):
            wy = frac[:, 1] if dy else 1.0 - frac[:, 1]
            for dz in (0, 1):
                wz = frac[:, 2] if dz else 1.0 - frac[:, 2]
                corner = e[i0[:, 0] + dx, i0[:, 1] + dy, i0[:, 2] + dz]
                out += (wx * wy * wz)[:, None] * corner

    if not np.all(inside):
        far = pts[~inside]
        r = np.linalg.norm(far, axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            scale = np.where(r > 0, grid.total_mass / (FOUR_PI * r ** 3), 0.0)
        out[~inside] = far * scale[:, None]
    return out.reshape(x.shape)


def grid_field_energy(grid: FieldGrid, method: str = "gradient") -> float:
    """
    Field energy of a solved grid

    Args:
        grid: FieldGrid with e_field and potential filled
        method: "gradient" for (1/2) sum |E|^2 h^3 over the box, "potential"
            for -(1/2) sum rho phi h^3, which also counts the field outside
            the box

    Returns:
        Field energy
    """
    if grid.e_field is None or grid.potential is None:
        raise ValidationError("grid.e_field", "field not solved; call grid_poisson_solve first")
    if method == "gradient":
        density = np.einsum("...i,...i->...", grid.e_field, grid.e_field)
        return 0.5 * math.fsum(density.ravel().tolist()) * grid.spec.cell_volume
    if method == "potential":
        return -0.5 * math.fsum((grid.rho * grid.potential).ravel().tolist()) * grid.spec.cell_volume
    raise ValidationError("method", "expected 'gradient' or 'potential'", method)


def discrete_curl_residual(grid: FieldGrid) -> float:
    """
    max |curl E| * h / max |E| over interior cells

    Central differences of a central-difference gradient commute, so this is
    at roundoff level for the spectral backend.
    """
    if grid.e_field is None:
        raise ValidationError("grid.e_field", "field not solved; call grid_poisson_solve first")
    h = grid.spec.spacing
    e = grid.e_field
    d = [np.gradient(e[..., c], h) for c in range(3)]
    curl = np.stack([
        d[2][1] - d[1][2],
        d[0][2] - d[2][0],
        d[1][0] - d[0][1],
    ], axis=-1)
    interior = curl[2:-2, 2:-2, 2:-2]
    scale = float(np.max(np.linalg.norm(e, axis=-1)))
    if scale == 0.0 or interior.size == 0:
        return 0.0
    return float(np.max(np.linalg.norm(interior, axis=-1))) * h / scale


def grid_snapshot_fields(grid: FieldGrid) -> Sequence[str]:
    """Names of the arrays present on a grid"""
    names = ["rho"]
    if grid.potential is not None:
        names.append("potential")
    if grid.e_field is not None:
        names.append("e_field")
    return names
