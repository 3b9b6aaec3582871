"""
Unit tests for the radial field backend
"""

import math
import sys
from pathlib import Path

import numpy as np
import pytest

# Add src directory to Python path
sys.path.insert(0, str(Path(__file__).parent.parent.parent.parent / "src"))

from kinetics import Ensemble, ValidationError
from field_solvers.radial import (
    RadialProfile,
    build_radial_profile,
    radial_field,
    radial_field_energy,
    shell_field,
    shell_field_energy,
)


def _ensemble(x, w):
    x = np.asarray(x, dtype=float).reshape(-1, 3)
    return Ensemble.create(x, np.zeros_like(x), w)


def _uniform_ball(n, radius, mass, seed):
    rng = np.random.default_rng(seed)
    direction = rng.normal(size=(n, 3))
    direction /= np.linalg.norm(direction, axis=1)[:, None]
    r = radius * rng.random(n) ** (1.0 / 3.0)
    return _ensemble(direction * r[:, None], np.full(n, mass / n))


class TestBuildRadialProfile:
    """Test cases for build_radial_profile"""

    def test_single_particle(self):
        profile = build_radial_profile(_ensemble([0.55, 0.0, 0.0], [1.0]), n_bins=10, r_max=1.0)
        np.testing.assert_array_equal(profile.cumulative[:5], 0.0)
        np.testing.assert_array_equal(profile.cumulative[5:], 1.0)
        assert profile.shell_mass[5] == 1.0

    def test_uniform_ball_cdf(self):
        n = 20000
        profile = build_radial_profile(_uniform_ball(n, 1.0, 1.0, seed=2), n_bins=20, r_max=1.0)
        p = profile.edges[1:] ** 3
        sigma = np.sqrt(p * (1 - p) / n) + 1e-12
        assert np.all(np.abs(profile.cumulative - p) <= 4.0 * sigma + 1e-10)

    def test_mass_bookkeeping(self):
        profile = build_radial_profile(_uniform_ball(500, 0.9, 2.0, seed=1), n_bins=7, r_max=1.0)
        assert profile.cumulative[-1] == pytest.approx(2.0, rel=1e-14)
        assert np.all(np.diff(profile.cumulative) >= 0)
        assert np.all(profile.shell_mass >= 0)
        assert profile.overflow_mass == 0.0

    def test_overflow_recorded(self):
        profile = build_radial_profile(_ensemble([[0.5, 0, 0], [3.0, 0, 0]], [1.0, 0.25]), n_bins=4, r_max=1.0)
        assert profile.enclosed_mass == 1.0
        assert profile.overflow_mass == 0.25
        assert profile.overflow_count == 1
        assert profile.total_mass == 1.25

    def test_empty_ensemble(self):
        profile = build_radial_profile(_ensemble(np.zeros((0, 3)), np.zeros(0)), n_bins=5, r_max=2.0)
        np.testing.assert_array_equal(profile.cumulative, np.zeros(5))

    @pytest.mark.parametrize("n_bins, r_max", [(0, 1.0), (3, 0.0), (3, -1.0)])
    def test_invalid_arguments(self, n_bins, r_max):
        with pytest.raises(ValidationError):
            build_radial_profile(_ensemble([1.0, 0, 0], [1.0]), n_bins, r_max)


class TestRadialField:
    """Test cases for radial_field and the pointwise bound"""

    def test_point_mass(self):
        profile = build_radial_profile(_ensemble([0.0, 0.0, 0.0], [1.0]), n_bins=10, r_max=2.0)
        e = radial_field(profile, [0.0, 1.0, 0.0])
        np.testing.assert_allclose(e, [0.0, 1.0 / (4 * np.pi), 0.0], rtol=1e-15)

    def test_zero_at_origin(self):
        profile = build_radial_profile(_uniform_ball(100, 1.0, 1.0, seed=0), n_bins=10, r_max=2.0)
        np.testing.assert_array_equal(radial_field(profile, [0.0, 0.0, 0.0]), [0.0, 0.0, 0.0])

    def test_uniform_ball_interior(self):
        edges = np.linspace(0.0, 1.0, 101)
        shell = np.diff(edges ** 3)
        profile = RadialProfile(edges=edges, shell_mass=shell, cumulative=np.cumsum(shell))
        e = radial_field(profile, [0.5, 0.0, 0.0])
        assert e[0] == pytest.approx(0.5 / (4 * np.pi), rel=1e-12)

    def test_bound_outward_and_exterior_equality(self):
        ensemble = _uniform_ball(5000, 1.0, 1.0, seed=4)
        profile = build_radial_profile(ensemble, n_bins=50, r_max=1.0)
        rng = np.random.default_rng(8)
        x = rng.normal(size=(400, 3))
        x *= (rng.uniform(0.1, 3.0, 400) / np.linalg.norm(x, axis=1))[:, None]
        e = radial_field(profile, x)
        r = np.linalg.norm(x, axis=1)
        bound = profile.total_mass / (4 * np.pi * r ** 2)
        magnitude = np.linalg.norm(e, axis=1)
        assert np.all(magnitude <= bound + 1e-12)
        assert np.all(np.einsum("ij,ij->i", e, x) >= 0)
        outside = r > 1.0
        np.testing.assert_allclose(magnitude[outside], bound[outside], rtol=1e-12)

    def test_field_energy_uniform_ball(self):
        """(1/2) integral |E|^2 of a uniform ball is 3 M^2 / (20 pi R)"""
        edges = np.linspace(0.0, 1.0, 2001)
        shell = np.diff(edges ** 3)
        profile = RadialProfile(edges=edges, shell_mass=shell, cumulative=np.cumsum(shell))
        assert radial_field_energy(profile) == pytest.approx(3.0 / (20.0 * np.pi), rel=1e-5)


class TestShellField:
    """Test cases for the one-shell-per-particle backend"""

    def test_two_shells(self):
        x = np.array([[1.0, 0.0, 0.0], [0.0, 2.0, 0.0]])
        e = shell_field(x, np.array([1.0, 1.0]))
        np.testing.assert_allclose(e[0], [0.5 / (4 * np.pi), 0.0, 0.0], rtol=1e-15)
        np.testing.assert_allclose(e[1], [0.0, 1.5 / (16 * np.pi), 0.0], rtol=1e-15)

    def test_energy_matches_shell_integral(self):
        w1, w2, r1, r2 = 0.3, 0.7, 0.5, 1.5
        x = np.array([[0.0, 0.0, r2], [r1, 0.0, 0.0]])
        expected = (w1 * w1 * (1 / r1 - 1 / r2) + (w1 + w2) ** 2 / r2) / (8 * np.pi)
        assert shell_field_energy(x, np.array([w2, w1])) == pytest.approx(expected, rel=1e-14)

    def test_field_is_energy_gradient(self):
        rng = np.random.default_rng(21)
        x = rng.normal(size=(6, 3))
        w = rng.uniform(0.1, 1.0, 6)
        e = shell_field(x, w)
        step = 1e-6
        for i in range(6):
            r_hat = x[i] / np.linalg.norm(x[i])
            plus, minus = x.copy(), x.copy()
            plus[i] += step * r_hat
            minus[i] -= step * r_hat
            dU = (shell_field_energy(plus, w) - shell_field_energy(minus, w)) / (2 * step)
            assert -dU == pytest.approx(w[i] * np.dot(e[i], r_hat), rel=1e-6)

    def test_particle_at_origin(self):
        from kinetics import UndefinedQuantityError
        with pytest.raises(UndefinedQuantityError):
            shell_field_energy(np.zeros((1, 3)), np.ones(1))
        np.testing.assert_array_equal(shell_field(np.zeros((1, 3)), np.ones(1)), np.zeros((1, 3)))

    def test_matches_profile_for_sorted_shells(self):
        ensemble = _uniform_ball(2000, 1.0, 1.0, seed=5)
        e_shell = shell_field(ensemble.x, ensemble.w)
        profile = build_radial_profile(ensemble, n_bins=1, r_max=1.0)
        bound = profile.total_mass / (4 * np.pi * np.linalg.norm(ensemble.x, axis=1) ** 2)
        assert np.all(np.linalg.norm(e_shell, axis=1) <= bound)
        assert math.isclose(
            shell_field_energy(ensemble.x, ensemble.w), 3.0 / (20.0 * np.pi), rel_tol=5e-2
        )
