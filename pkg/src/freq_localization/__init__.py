"""
Frequency localization

Momentum-binned, frequency-shell fields E_{k;j1,j2} on a periodic grid, their
sup-norm and pointwise bound checks, and their time integral along logged
characteristics.
"""

from .shells import (
    DyadicIndex,
    IndexClass,
    classify_index,
    check_resolvable,
    dyadic_cutoff,
    momentum_bins,
    momentum_cutoff,
    resolvable_band,
    top_momentum_shell,
)
from .fields import (
    BinStats,
    KernelEnvelope,
    LocalizedField,
    band_limited_field,
    bin_statistics,
    bin_weights,
    iter_localized_fields,
    kernel_envelope,
    localized_field,
    localized_fields,
    velocity_bin,
)
from .bounds import (
    BoundReport,
    LocalizedBoundVerifier,
    shell_reconstruction_residual,
    velocity_partition_residual,
    verify_localized_bounds,
)
from .characteristics import CharacteristicReport, integrated_field_along_characteristic

__all__ = [
    "DyadicIndex",
    "IndexClass",
    "classify_index",
    "check_resolvable",
    "dyadic_cutoff",
    "momentum_bins",
    "momentum_cutoff",
    "resolvable_band",
    "top_momentum_shell",
    "BinStats",
    "KernelEnvelope",
    "LocalizedField",
    "band_limited_field",
    "bin_statistics",
    "bin_weights",
    "iter_localized_fields",
    "kernel_envelope",
    "localized_field",
    "localized_fields",
    "velocity_bin",
    "BoundReport",
    "LocalizedBoundVerifier",
    "shell_reconstruction_residual",
    "velocity_partition_residual",
    "verify_localized_bounds",
    "CharacteristicReport",
    "integrated_field_along_characteristic",
]
