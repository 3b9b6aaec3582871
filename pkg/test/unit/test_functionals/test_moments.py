"""
Unit tests for moments and the energy triple
"""

import math
import sys
from pathlib import Path

import numpy as np
import pytest

# Add src directory to Python path
sys.path.insert(0, str(Path(__file__).parent.parent.parent.parent / "src"))

from kinetics import Ensemble, Scenario, ValidationError, sample_initial_ensemble
from field_solvers import GridSpec, grid_deposit, grid_field_energy, grid_poisson_solve
from functionals import field_energy, kinetic_energy_abs_v, log2_moment, moment, total_energy
from pusher import DirectFieldEvaluator, PointChargeField


def _single(v, w=1.0):
    return Ensemble.create([[0.5, 0.0, 0.0]], [v], [w])


class TestMoment:
    """Test cases for M_n"""

    def test_zero_momentum(self):
        assert moment(_single([0.0, 0.0, 0.0]), 3.7) == 1.0

    def test_unit_speed(self):
        assert moment(_single([0.0, 1.0, 0.0], w=2.0), 2) == 8.0

    def test_order_zero_is_mass(self):
        ensemble = sample_initial_ensemble(Scenario.create("radial-gaussian"), 300, 2.5, seed=1)
        assert moment(ensemble, 0) == ensemble.total_mass

    def test_rejects_negative_order(self):
        with pytest.raises(ValidationError):
            moment(_single([0.0, 0.0, 0.0]), -1.0)

    def test_log2_moment_matches(self):
        ensemble = sample_initial_ensemble(Scenario.create("radial-gaussian"), 300, 1.0, seed=2)
        assert log2_moment(ensemble, 4.0) == pytest.approx(math.log2(moment(ensemble, 4.0)), rel=1e-12)

    def test_log2_moment_beyond_double_range(self):
        ensemble = _single([1000.0, 0.0, 0.0])
        assert log2_moment(ensemble, 400.0) == pytest.approx(400.0 * math.log2(1001.0))


class TestTotalEnergy:
    """Test cases for the energy triple"""

    def test_single_particle_at_rest(self):
        ensemble = _single([0.0, 0.0, 0.0], w=0.7)
        energies = total_energy(ensemble, DirectFieldEvaluator(ensemble, softening=0.0))
        assert energies.kinetic == pytest.approx(0.7)
        assert energies.field == 0.0
        assert energies.total == energies.kinetic

    def test_two_particle_pair_energy(self):
        x = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
        ensemble = Ensemble.create(x, np.zeros_like(x), [0.5, 0.5])
        energies = total_energy(ensemble, DirectFieldEvaluator(ensemble, softening=0.0))
        assert energies.field == pytest.approx(1.0 / (16.0 * math.pi))
        assert energies.total == energies.kinetic + energies.field

    def test_grid_energy(self):
        ensemble = sample_initial_ensemble(Scenario.create("radial-gaussian"), 500, 1.0, seed=4)
        grid = grid_poisson_solve(grid_deposit(ensemble, GridSpec.centered(16, 3.0)))
        energies = total_energy(ensemble, grid)
        assert energies.field == grid_field_energy(grid)
        assert energies.total == energies.kinetic + energies.field

    def test_external_field_energy(self):
        ensemble = _single([0.0, 0.0, 0.0], w=2.0)
        assert field_energy(ensemble, PointChargeField(1.0)) == pytest.approx(2.0 / (4 * math.pi * 0.5))

    def test_no_field(self):
        ensemble = _single([3.0, 4.0, 0.0])
        energies = total_energy(ensemble)
        assert energies == (math.sqrt(26.0), 0.0, math.sqrt(26.0))
        assert kinetic_energy_abs_v(ensemble) == 5.0

    def test_rejects_unknown_field(self):
        with pytest.raises(ValidationError):
            total_energy(_single([0.0, 0.0, 0.0]), field="grid")
