"""
Field solvers

E = grad(phi) with laplacian(phi) = rho from an ensemble, by three
interchangeable backends: the radial cumulative formula, direct summation and
the gridded free-space spectral solve.
"""

from .radial import (
    RadialProfile,
    build_radial_profile,
    radial_field,
    radial_field_energy,
    shell_enclosed_mass,
    enclosed_field,
    shell_field,
    shell_field_energy,
)
from .direct import (
    direct_sum_field,
    direct_sum_noise,
    direct_sum_potential,
    direct_particle_field,
    pairwise_field_energy,
)
from .grid import (
    GridSpec,
    FieldGrid,
    grid_deposit,
    grid_poisson_solve,
    interpolate_field,
    grid_field_energy,
    discrete_curl_residual,
)
from .snapshot import write_grid_snapshot, read_grid_snapshot

__all__ = [
    "RadialProfile",
    "build_radial_profile",
    "radial_field",
    "radial_field_energy",
    "shell_enclosed_mass",
    "enclosed_field",
    "shell_field",
    "shell_field_energy",
    "direct_sum_field",
    "direct_sum_noise",
    "direct_sum_potential",
    "direct_particle_field",
    "pairwise_field_energy",
    "GridSpec",
    "FieldGrid",
    "grid_deposit",
    "grid_poisson_solve",
    "interpolate_field",
    "grid_field_energy",
    "discrete_curl_residual",
    "write_grid_snapshot",
    "read_grid_snapshot",
]
