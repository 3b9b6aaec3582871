"""
Unit tests for momentum-binned densities and localized fields
"""

import math
import sys
from pathlib import Path

import numpy as np
import pytest

# Add src directory to Python path
sys.path.insert(0, str(Path(__file__).parent.parent.parent.parent / "src"))

from kinetics import Ensemble, ResolutionError, Scenario, sample_initial_ensemble
from field_solvers.grid import FieldGrid, GridSpec, grid_deposit
from freq_localization import (
    DyadicIndex,
    bin_statistics,
    bin_weights,
    iter_localized_fields,
    kernel_envelope,
    localized_field,
    localized_fields,
    momentum_bins,
    top_momentum_shell,
    velocity_bin,
)
from freq_localization.bounds import shell_reconstruction_residual, velocity_partition_residual


@pytest.fixture(scope="module")
def gaussian():
    return sample_initial_ensemble(Scenario.create("radial-gaussian"), 5000, 1.0, seed=4)


@pytest.fixture(scope="module")
def spec():
    return GridSpec.centered(32, 4.0)


@pytest.fixture(scope="module")
def blob(gaussian, spec):
    return grid_deposit(gaussian, spec)


class TestBinWeights:
    """Test cases for velocity bins"""

    def test_particle_on_shell_centers(self):
        ensemble = Ensemble.create([[1.0, 0.0, 0.0]], [[4.0, 0.0, 0.0]], [0.7])
        assert bin_weights(ensemble, 2, 2)[0] == 0.7
        assert bin_weights(ensemble, 1, 2)[0] == 0.0
        assert bin_weights(ensemble, 2, 1)[0] == 0.0

    def test_fast_particle_outside_low_bins(self):
        ensemble = Ensemble.create([[0.0, 0.0, 0.0]], [[0.0, 0.0, 64.0]], [1.0])
        for j1 in range(3):
            assert bin_weights(ensemble, j1, 1)[0] == 0.0

    def test_bin_masses_sum_to_total(self, gaussian):
        top = top_momentum_shell(float(np.linalg.norm(gaussian.v, axis=1).max()))
        total = math.fsum(bin_statistics(gaussian, j1, j2).mass for j1, j2 in momentum_bins(top))
        assert total == pytest.approx(gaussian.total_mass, rel=1e-12)

    def test_bin_statistics(self, gaussian):
        stats = bin_statistics(gaussian, 0, 0)
        assert stats.mass > 0
        assert stats.energy >= stats.mass
        assert stats.f_max == pytest.approx(float(np.max(gaussian.f0[bin_weights(gaussian, 0, 0) > 0])))

    def test_empty_bin_statistics(self, gaussian):
        stats = bin_statistics(gaussian, 0, 12)
        assert stats.to_dict() == {"mass": 0.0, "energy": 0.0, "f_max": 0.0}

    def test_velocity_partition(self, gaussian, spec):
        top = top_momentum_shell(float(np.linalg.norm(gaussian.v, axis=1).max()))
        assert velocity_partition_residual(gaussian, spec, top) <= 1e-10

    def test_bin_metadata(self, gaussian, spec):
        density = velocity_bin(gaussian, spec, 1, 2)
        assert density.metadata == {"j1": 1, "j2": 2}
        assert localized_field(density, 1).index == DyadicIndex(1, 1, 2)


class TestLocalizedField:
    """Test cases for localized_field"""

    def test_zero_density(self, spec):
        density = FieldGrid(spec=spec, rho=np.zeros(spec.dims))
        field = localized_field(density, 1, 0, 0)
        assert field.sup_norm == 0.0
        assert not np.any(field.grid.e_field)

    def test_sup_norm_recomputable(self, blob):
        field = localized_field(blob, 2, 0, 0)
        assert field.sup_norm > 0
        assert field.recompute_sup_norm() == field.sup_norm

    def test_zero_mean(self, blob):
        for k in (1, 2):
            field = localized_field(blob, k, 0, 0)
            assert np.max(np.abs(field.mean)) <= 1e-12 * field.sup_norm

    def test_unresolvable_shell(self, blob):
        with pytest.raises(ResolutionError):
            localized_field(blob, 3, 0, 0)

    def test_shell_reconstruction(self, blob):
        assert shell_reconstruction_residual(blob, (1, 2)) <= 1e-6

    def test_shell_reconstruction_finer_grid(self, gaussian):
        density = grid_deposit(gaussian, GridSpec.centered(64, 4.0))
        assert shell_reconstruction_residual(density, (1, 3)) <= 1e-6

    def test_point_values_inside_grid(self, blob):
        field = localized_field(blob, 2, 0, 0)
        centers = blob.spec.centers()
        np.testing.assert_allclose(field.at(centers[3, 5, 7]), field.grid.e_field[3, 5, 7], atol=1e-14)

    def test_thread_count_independent(self, blob):
        serial = localized_fields(blob, [1, 2], workers=1)
        threaded = localized_fields(blob, [1, 2], workers=2)
        assert [f.index.k for f in threaded] == [1, 2]
        for a, b in zip(serial, threaded):
            np.testing.assert_array_equal(a.grid.e_field, b.grid.e_field)

    def test_streamed_fields(self, gaussian, spec):
        bins = list(momentum_bins(1))
        fields = list(iter_localized_fields(gaussian, spec, bins, [1, 2], t=0.25))
        assert len(fields) == 2 * len(bins)
        assert {f.index.bin for f in fields} == set(bins)
        assert all(f.t == 0.25 for f in fields)


class TestKernelEnvelope:
    """Test cases for the realized shell kernel"""

    def test_envelope_constant(self):
        envelope = kernel_envelope(GridSpec.centered(64, 4.0), 2)
        assert math.isfinite(envelope.envelope_constant)
        assert envelope.envelope_constant > 0
        assert envelope.tail_range == (4.0, 16.0)
        assert set(envelope.to_dict()) >= {"k", "envelope_constant", "decay_exponent"}

    def test_tail_too_short(self):
        envelope = kernel_envelope(GridSpec.centered(32, 4.0), 1, tail_start=100.0)
        assert math.isnan(envelope.decay_exponent)
