"""
Unit tests for the gridded spectral backend
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add src directory to Python path
sys.path.insert(0, str(Path(__file__).parent.parent.parent.parent / "src"))

from kinetics import Ensemble, ValidationError
from field_solvers.direct import direct_sum_field
from field_solvers.grid import (
    FieldGrid,
    GridSpec,
    discrete_curl_residual,
    grid_deposit,
    grid_field_energy,
    grid_poisson_solve,
    interpolate_field,
)
from field_solvers.snapshot import read_grid_snapshot, write_grid_snapshot


def _ensemble(x, w):
    x = np.asarray(x, dtype=float).reshape(-1, 3)
    return Ensemble.create(x, np.zeros_like(x), w)


def _ball(n, radius, mass, seed, center=(0.0, 0.0, 0.0)):
    rng = np.random.default_rng(seed)
    direction = rng.normal(size=(n, 3))
    direction /= np.linalg.norm(direction, axis=1)[:, None]
    r = radius * rng.random(n) ** (1.0 / 3.0)
    return _ensemble(direction * r[:, None] + np.asarray(center), np.full(n, mass / n))


@pytest.fixture(scope="module")
def blob_grid():
    spec = GridSpec.centered(64, 2.0)
    ensemble = _ball(20000, 0.5, 1.0, seed=1)
    return ensemble, grid_poisson_solve(grid_deposit(ensemble, spec))


class TestGridSpec:
    """Test cases for GridSpec validation"""

    @pytest.mark.parametrize("spacing", [0.0, -1.0, float("nan")])
    def test_degenerate_spacing(self, spacing):
        with pytest.raises(ValidationError):
            GridSpec(origin=(0.0, 0.0, 0.0), spacing=spacing, dims=(4, 4, 4))

    def test_dims_at_least_two(self):
        with pytest.raises(ValidationError):
            GridSpec(origin=(0.0, 0.0, 0.0), spacing=1.0, dims=(4, 1, 4))

    def test_centered(self):
        spec = GridSpec.centered(8, 2.0)
        assert spec.spacing == 0.5
        np.testing.assert_array_equal(spec.axis(0), np.arange(-1.75, 2.0, 0.5))


class TestGridDeposit:
    """Test cases for grid_deposit"""

    @pytest.fixture
    def spec(self):
        return GridSpec(origin=(0.0, 0.0, 0.0), spacing=1.0, dims=(4, 4, 4))

    def test_particle_at_cell_center(self, spec):
        grid = grid_deposit(_ensemble([1.5, 2.5, 0.5], [2.0]), spec)
        assert grid.rho[1, 2, 0] == 2.0
        assert grid.rho.sum() == 2.0

    def test_particle_at_cell_corner(self, spec):
        grid = grid_deposit(_ensemble([2.0, 2.0, 2.0], [1.0]), spec)
        np.testing.assert_array_equal(grid.rho[1:3, 1:3, 1:3], np.full((2, 2, 2), 0.125))
        assert grid.rho.sum() == 1.0

    def test_mass_conserved_in_box(self):
        spec = GridSpec.centered(16, 1.0)
        ensemble = _ball(3000, 0.8, 1.7, seed=3)
        grid = grid_deposit(ensemble, spec)
        assert grid.mass() == pytest.approx(ensemble.total_mass, rel=1e-12)
        assert grid.out_of_box_count == 0

    def test_out_of_box_counted(self, spec):
        grid = grid_deposit(_ensemble([[1.5, 1.5, 1.5], [9.0, 1.0, 1.0], [0.1, 1.0, 1.0]], [1.0, 0.5, 0.25]), spec)
        assert grid.out_of_box_count == 2
        assert grid.out_of_box_mass == 0.75
        assert grid.deposited_mass == 1.0
        assert grid.total_mass == 1.75

    def test_independent_of_workers_and_blocks(self):
        spec = GridSpec.centered(16, 1.0)
        ensemble = _ball(5000, 0.9, 1.0, seed=4)
        single = grid_deposit(ensemble, spec, workers=1, block_size=700)
        threaded = grid_deposit(ensemble, spec, workers=4, block_size=700)
        np.testing.assert_array_equal(single.rho, threaded.rho)

    def test_weight_override(self, spec):
        ensemble = _ensemble([[1.5, 1.5, 1.5], [2.5, 2.5, 2.5]], [1.0, 1.0])
        grid = grid_deposit(ensemble, spec, weights=np.array([0.0, 3.0]))
        assert grid.rho[1, 1, 1] == 0.0
        assert grid.rho[2, 2, 2] == 3.0


class TestGridPoissonSolve:
    """Test cases for the free-space spectral solve"""

    def test_zero_density(self):
        grid = grid_poisson_solve(grid_deposit(_ensemble(np.zeros((0, 3)), np.zeros(0)), GridSpec.centered(8, 1.0)))
        np.testing.assert_array_equal(grid.e_field, np.zeros((8, 8, 8, 3)))

    def test_far_field_of_blob(self, blob_grid):
        ensemble, grid = blob_grid
        rng = np.random.default_rng(6)
        targets = rng.normal(size=(100, 3))
        targets *= (1.5 / np.linalg.norm(targets, axis=1))[:, None]
        e_grid = interpolate_field(grid, targets)
        e_direct = direct_sum_field(ensemble, targets)
        magnitude = np.linalg.norm(e_grid, axis=1)
        np.testing.assert_allclose(magnitude, 1.0 / (4 * np.pi * 1.5 ** 2), rtol=2e-2)
        error = np.linalg.norm(e_grid - e_direct, axis=1) / np.linalg.norm(e_direct, axis=1)
        assert error.max() < 2e-2

    def test_superposition(self):
        spec = GridSpec.centered(32, 2.0)
        a = grid_deposit(_ball(2000, 0.3, 1.0, seed=1, center=(-0.7, 0.0, 0.0)), spec)
        b = grid_deposit(_ball(2000, 0.3, 0.5, seed=2, center=(0.6, 0.4, 0.0)), spec)
        both = FieldGrid(spec=spec, rho=a.rho + b.rho)
        e_sum = grid_poisson_solve(a).e_field + grid_poisson_solve(b).e_field
        e_both = grid_poisson_solve(both).e_field
        np.testing.assert_allclose(e_both, e_sum, atol=1e-12 * np.abs(e_sum).max())

    def test_curl_free(self, blob_grid):
        _, grid = blob_grid
        assert discrete_curl_residual(grid) < 1e-10

    def test_field_energy_of_uniform_ball(self, blob_grid):
        _, grid = blob_grid
        assert grid_field_energy(grid, method="potential") == pytest.approx(3.0 / (20.0 * np.pi * 0.5), rel=5e-2)
        assert grid_field_energy(grid, method="gradient") < grid_field_energy(grid, method="potential")

    def test_unknown_energy_method(self, blob_grid):
        _, grid = blob_grid
        with pytest.raises(ValidationError):
            grid_field_energy(grid, method="spectral")


class TestInterpolateField:
    """Test cases for interpolate_field"""

    @pytest.fixture
    def linear_grid(self):
        spec = GridSpec(origin=(-2.0, -2.0, -2.0), spacing=0.5, dims=(8, 8, 8))
        centers = spec.centers()
        matrix = np.array([[1.0, -2.0, 0.5], [0.0, 3.0, 1.0], [-1.0, 0.25, 2.0]])
        e_field = centers @ matrix.T + np.array([0.1, -0.2, 0.3])
        grid = FieldGrid(spec=spec, rho=np.zeros(spec.dims), e_field=e_field, potential=np.zeros(spec.dims),
                         total_mass=2.0)
        return grid, matrix

    def test_exact_at_cell_centers(self, linear_grid):
        grid, _ = linear_grid
        centers = grid.spec.centers().reshape(-1, 3)
        np.testing.assert_array_equal(interpolate_field(grid, centers), grid.e_field.reshape(-1, 3))

    def test_reproduces_linear_field(self, linear_grid):
        grid, matrix = linear_grid
        rng = np.random.default_rng(0)
        x = rng.uniform(-1.7, 1.7, size=(200, 3))
        expected = x @ matrix.T + np.array([0.1, -0.2, 0.3])
        np.testing.assert_allclose(interpolate_field(grid, x), expected, rtol=1e-12, atol=1e-12)

    def test_monopole_outside_box(self, linear_grid):
        grid, _ = linear_grid
        e = interpolate_field(grid, [0.0, 0.0, 10.0])
        np.testing.assert_allclose(e, [0.0, 0.0, 2.0 / (4 * np.pi * 100.0)], rtol=1e-15)

    def test_requires_solved_field(self):
        spec = GridSpec.centered(4, 1.0)
        with pytest.raises(ValidationError):
            interpolate_field(FieldGrid(spec=spec, rho=np.zeros(spec.dims)), [0.0, 0.0, 0.0])


class TestGridSnapshot:
    """Test cases for the binary snapshot format"""

    def test_write_and_read(self, tmp_path, blob_grid):
        _, grid = blob_grid
        bin_path, header_path = write_grid_snapshot(grid, tmp_path / "snap", field="e_field", t=0.5)
        assert bin_path.stat().st_size == 64 ** 3 * 3 * 8
        header, array = read_grid_snapshot(tmp_path / "snap")
        assert header["dtype"] == "<f8"
        assert header["dims"] == [64, 64, 64]
        assert header["t"] == 0.5
        np.testing.assert_array_equal(array, grid.e_field)

    def test_missing_field(self, tmp_path):
        spec = GridSpec.centered(4, 1.0)
        with pytest.raises(ValidationError):
            write_grid_snapshot(FieldGrid(spec=spec, rho=np.zeros(spec.dims)), tmp_path / "s", field="e_field")
