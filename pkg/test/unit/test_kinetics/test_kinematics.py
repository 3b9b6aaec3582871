"""
Unit tests for relativistic kinematics helpers
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add src directory to Python path
sys.path.insert(0, str(Path(__file__).parent.parent.parent.parent / "src"))

from kinetics.kinematics import (
    relativistic_velocity,
    planar_angular_momentum,
    lorentz_factor,
    rotate_planar,
)


class TestRelativisticVelocity:
    """Test cases for v / sqrt(1 + |v|^2)"""

    def test_zero_momentum_is_fixed_point(self):
        np.testing.assert_array_equal(relativistic_velocity([0.0, 0.0, 0.0]), [0.0, 0.0, 0.0])

    def test_direct_formula(self):
        np.testing.assert_allclose(relativistic_velocity([3.0, 0.0, 0.0]), [3.0 / np.sqrt(10.0), 0.0, 0.0], rtol=1e-15)

    def test_speed_below_light(self):
        """|v| = 1e6 gives a velocity norm in (0.999999, 1)"""
        direction = np.array([1.0, -2.0, 0.5])
        v = 1e6 * direction / np.linalg.norm(direction)
        speed = np.linalg.norm(relativistic_velocity(v))
        assert 0.999999 < speed < 1.0

    def test_odd_and_monotone_along_rays(self):
        rng = np.random.default_rng(3)
        v = rng.normal(size=(200, 3)) * 5.0
        np.testing.assert_array_equal(relativistic_velocity(-v), -relativistic_velocity(v))

        ray = np.outer(np.linspace(0.0, 100.0, 500), [0.3, -0.4, 0.5])
        speeds = np.linalg.norm(relativistic_velocity(ray), axis=1)
        assert np.all(np.diff(speeds) > 0)
        assert np.all(speeds < 1.0)

    def test_lorentz_factor_batch(self):
        np.testing.assert_allclose(lorentz_factor([[0.0, 0.0, 0.0], [0.0, 3.0, 4.0]]), [1.0, np.sqrt(26.0)])


class TestPlanarAngularMomentum:
    """Test cases for x1 v2 - x2 v1"""

    @pytest.mark.parametrize("x, v, expected", [
        ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), 1.0),
        ((1.0, 0.0, 5.0), (2.0, 0.0, -3.0), 0.0),
        ((0.3, -0.4, 1.0), (2.0, 1.0, 0.0), 1.1),
    ])
    def test_examples(self, x, v, expected):
        assert planar_angular_momentum(x, v) == pytest.approx(expected, abs=1e-15)

    def test_rotation_invariance(self):
        """Simultaneous planar rotation of x and v leaves x1 v2 - x2 v1 unchanged"""
        rng = np.random.default_rng(11)
        x = rng.normal(size=(1000, 3))
        v = rng.normal(size=(1000, 3))
        base = planar_angular_momentum(x, v)
        for angle in rng.uniform(0.0, 2.0 * np.pi, 10):
            rotated = planar_angular_momentum(rotate_planar(x, angle), rotate_planar(v, angle))
            np.testing.assert_allclose(rotated, base, atol=1e-12)
