"""
Unit tests for field evaluators
"""

import math
import sys
from pathlib import Path

import numpy as np
import pytest

# Add src directory to Python path
sys.path.insert(0, str(Path(__file__).parent.parent.parent.parent / "src"))

from kinetics import ConfigurationError, Ensemble, Scenario, sample_initial_ensemble
from field_solvers import GridSpec, pairwise_field_energy, shell_field, shell_field_energy
from pusher import (
    DirectFieldEvaluator,
    FieldMode,
    GridFieldEvaluator,
    IntegratorConfig,
    PlanarRadialField,
    PointChargeField,
    RadialProfileEvaluator,
    ShellFieldEvaluator,
    UniformField,
    ZeroField,
    build_field,
)


@pytest.fixture
def ensemble():
    return sample_initial_ensemble(Scenario.create("radial-gaussian"), 400, 1.0, seed=3)


class TestBuildField:
    """Test cases for build_field dispatch"""

    @pytest.mark.parametrize("mode,expected", [
        ("radial", ShellFieldEvaluator),
        ("direct", DirectFieldEvaluator),
        ("point-charge", PointChargeField),
        ("planar-radial", PlanarRadialField),
        ("uniform", UniformField),
        ("zero", ZeroField),
    ])
    def test_dispatch(self, ensemble, mode, expected):
        field = build_field(ensemble, IntegratorConfig(dt=0.1, field_mode=mode))
        assert type(field) is expected
        assert field.mode is FieldMode(mode)

    def test_profile_bins_select_binned_radial(self, ensemble):
        field = build_field(ensemble, IntegratorConfig(dt=0.1, profile_bins=64, r_max=5.0))
        assert isinstance(field, RadialProfileEvaluator)
        assert field.profile.n_bins == 64

    def test_grid_needs_spec(self, ensemble):
        with pytest.raises(ConfigurationError):
            build_field(ensemble, IntegratorConfig(dt=0.1, field_mode="grid"))

    def test_grid_mode(self, ensemble):
        spec = GridSpec.centered(16, 3.0)
        field = build_field(ensemble, IntegratorConfig(dt=0.1, field_mode="grid", grid=spec))
        assert isinstance(field, GridFieldEvaluator)
        assert field.grid.has_field

    def test_self_consistent_flag(self):
        assert FieldMode.GRID.self_consistent
        assert not FieldMode.UNIFORM.self_consistent


class TestShellFieldEvaluator:
    """The radial backend with one shell per particle"""

    def test_particle_field_matches_shell_field(self, ensemble):
        field = ShellFieldEvaluator(ensemble)
        np.testing.assert_array_equal(field.particle_field(ensemble.x), shell_field(ensemble.x, ensemble.w))

    def test_field_at_counts_mass_strictly_inside(self):
        x = np.array([[1.0, 0.0, 0.0], [0.0, 2.0, 0.0]])
        field = ShellFieldEvaluator(Ensemble.create(x, np.zeros_like(x), [1.0, 3.0]))
        e = field.field_at([[0.5, 0.0, 0.0], [1.5, 0.0, 0.0], [3.0, 0.0, 0.0]])
        assert e[0] == pytest.approx([0.0, 0.0, 0.0])
        assert e[1, 0] == pytest.approx(1.0 / (4 * math.pi * 1.5 ** 2))
        assert e[2, 0] == pytest.approx(4.0 / (4 * math.pi * 9.0))

    def test_energy(self, ensemble):
        assert ShellFieldEvaluator(ensemble).field_energy(ensemble) == shell_field_energy(ensemble.x, ensemble.w)


class TestDirectFieldEvaluator:
    """Direct summation held between rebuilds"""

    def test_self_excluded_by_index(self):
        x = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
        field = DirectFieldEvaluator(Ensemble.create(x, np.zeros_like(x), [1.0, 1.0]), softening=0.0)
        moved = x + np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
        e = field.particle_field(moved)
        assert e[1, 0] == pytest.approx(1.0 / (4 * math.pi * 4.0))
        assert e[0, 0] == pytest.approx(-1.0 / (4 * math.pi))

    def test_energy_is_pairwise(self, ensemble):
        field = DirectFieldEvaluator(ensemble, softening=0.01)
        assert field.field_energy(ensemble) == pairwise_field_energy(ensemble, 0.01)


class TestAnalyticFields:
    """Analytic external fields and their potentials"""

    @pytest.mark.parametrize("field", [
        PointChargeField(2.0),
        PlanarRadialField(1.5),
        UniformField((0.3, -0.2, 0.1)),
    ])
    def test_field_is_potential_gradient(self, field):
        rng = np.random.default_rng(0)
        points = rng.uniform(0.5, 2.0, size=(20, 3)) * rng.choice([-1, 1], size=(20, 3))
        h = 1e-6
        for d in range(3):
            step = np.zeros(3)
            step[d] = h
            numeric = (field.potential(points + step) - field.potential(points - step)) / (2 * h)
            np.testing.assert_allclose(field.field_at(points)[:, d], numeric, rtol=1e-6, atol=1e-8)

    def test_point_charge_value(self):
        e = PointChargeField(1.0).field_at([1.0, 0.0, 0.0])
        assert e == pytest.approx([1.0 / (4 * math.pi), 0.0, 0.0])

    def test_planar_radial_has_no_axial_component(self):
        e = PlanarRadialField(1.0).field_at([[3.0, 4.0, 7.0]])
        assert e[0, 2] == 0.0
        assert np.hypot(e[0, 0], e[0, 1]) == pytest.approx(1.0 / (2 * math.pi * 5.0))

    def test_external_energy(self):
        x = np.array([[1.0, 2.0, 3.0]])
        ensemble = Ensemble.create(x, np.zeros_like(x), [2.0])
        assert UniformField((1.0, 0.0, 0.0)).field_energy(ensemble) == pytest.approx(-2.0)
        assert ZeroField().field_energy(ensemble) == 0.0
