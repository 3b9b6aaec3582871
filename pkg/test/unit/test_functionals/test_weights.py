"""
Unit tests for the angular weight omega_mu
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add src directory to Python path
sys.path.insert(0, str(Path(__file__).parent.parent.parent.parent / "src"))

from kinetics import ValidationError, rotate_planar
from functionals import WeightParams, omega_weight, transport_derivative, weight_positivity_check


def planar_samples(n, seed):
    """Phase points with |x_planar|, |v_planar| in [0.5, 2] and random angles"""
    rng = np.random.default_rng(seed)
    r = rng.uniform(0.5, 2.0, size=(2, n))
    angle = rng.uniform(0.0, 2 * np.pi, size=(2, n))
    x = np.column_stack([r[0] * np.cos(angle[0]), r[0] * np.sin(angle[0]), rng.normal(size=n)])
    v = np.column_stack([r[1] * np.cos(angle[1]), r[1] * np.sin(angle[1]), rng.normal(size=n)])
    return x, v


class TestWeightParams:
    """Test cases for WeightParams validation"""

    @pytest.mark.parametrize("kwargs", [{"mu": 0}, {"Mt": -1}, {"Mt": 1.5}, {"eps_star": 0.5}, {"eps_star": 0.0}])
    def test_rejects(self, kwargs):
        with pytest.raises(ValidationError):
            WeightParams(**kwargs)


class TestOmegaWeight:
    """Test cases for the weight value and its planar gradient"""

    def test_orthogonal_case(self):
        value, _ = omega_weight([1.0, 0.0, 0.3], [0.0, 2.0, -1.0], WeightParams(mu=1, Mt=3, eps_star=0.01))
        assert value == pytest.approx(4.0 ** 0.01 * 0.125, rel=1e-14)

    def test_anti_aligned_is_zero(self):
        value, gradient = omega_weight([1.0, 0.0, 0.0], [-2.0, 0.0, 0.0], WeightParams(mu=1))
        assert value == 0.0
        np.testing.assert_array_equal(gradient, [0.0, 0.0])

    def test_axis_extends_by_zero(self):
        value, gradient = omega_weight([0.0, 0.0, 1.0], [1.0, 0.0, 0.0], WeightParams())
        assert value == 0.0
        assert np.all(gradient == 0.0)

    def test_rejects_non_finite(self):
        with pytest.raises(ValidationError):
            omega_weight([np.nan, 0.0, 0.0], [1.0, 0.0, 0.0], WeightParams())

    @pytest.mark.parametrize("mu", [1, -1])
    def test_gradient_matches_finite_differences(self, mu):
        params = WeightParams(mu=mu, Mt=1, eps_star=0.01)
        x, v = planar_samples(4000, seed=5 + mu)
        a, b = x[:, :2], v[:, :2]
        u = np.einsum("ij,ij->i", a, b) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
        s = mu * (u + 0.5)
        smooth = (np.abs(u) > 0.01) & (np.abs(s) > 1e-3) & (np.abs(s - 1.0) > 1e-3)
        x, v = x[smooth], v[smooth]

        _, gradient = omega_weight(x, v, params)
        h = 1e-6
        for d in range(2):
            step = np.zeros(3)
            step[d] = h
            plus, _ = omega_weight(x + step, v, params)
            minus, _ = omega_weight(x - step, v, params)
            np.testing.assert_allclose(gradient[:, d], (plus - minus) / (2 * h), rtol=1e-6, atol=1e-8)

    def test_planar_rotation_invariance(self):
        params = WeightParams(mu=1, Mt=2, eps_star=0.05)
        x, v = planar_samples(1000, seed=9)
        value, _ = omega_weight(x, v, params)
        for angle in (0.3, 2.0, -1.1):
            rotated, _ = omega_weight(rotate_planar(x, angle), rotate_planar(v, angle), params)
            np.testing.assert_allclose(rotated, value, rtol=0, atol=1e-12)

    def test_batched_matches_single(self):
        params = WeightParams(mu=-1, Mt=1)
        x, v = planar_samples(5, seed=2)
        values, gradients = omega_weight(x, v, params)
        for i in range(5):
            value, gradient = omega_weight(x[i], v[i], params)
            assert value == pytest.approx(values[i], rel=1e-14)
            np.testing.assert_allclose(gradient, gradients[i], rtol=1e-14, atol=1e-15)


class TestWeightPositivity:
    """Test cases for mu v_planar . grad omega_mu >= 0"""

    def test_aligned_strictly_positive(self):
        assert transport_derivative([1.0, 0.0, 0.0], [1.0, 0.0, 0.0], WeightParams(mu=1)) > 0

    def test_anti_aligned_zero(self):
        assert transport_derivative([1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], WeightParams(mu=1)) == 0.0

    @pytest.mark.parametrize("mu", [1, -1])
    def test_random_samples(self, mu):
        x, v = planar_samples(100_000, seed=21 + mu)
        report = weight_positivity_check(x, v, WeightParams(mu=mu, Mt=10, eps_star=0.01))
        assert report.samples == 100_000
        assert report.passed
        assert report.minimum >= -1e-10
        assert report.active_samples > 0
        assert report.fitted_constant > 0
