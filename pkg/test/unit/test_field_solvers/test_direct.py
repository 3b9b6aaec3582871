"""
Unit tests for direct Green's-function summation
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add src directory to Python path
sys.path.insert(0, str(Path(__file__).parent.parent.parent.parent / "src"))

from kinetics import Ensemble, Scenario, ValidationError, sample_initial_ensemble
from field_solvers.direct import direct_sum_field, direct_sum_noise, direct_sum_potential, pairwise_field_energy
from field_solvers.radial import build_radial_profile, radial_field


def _ensemble(x, w):
    x = np.asarray(x, dtype=float).reshape(-1, 3)
    return Ensemble.create(x, np.zeros_like(x), w)


class TestDirectSumField:
    """Test cases for direct_sum_field"""

    def test_single_source(self):
        e = direct_sum_field(_ensemble([0.0, 0.0, 0.0], [1.0]), [[1.0, 0.0, 0.0]])
        np.testing.assert_allclose(e, [[1.0 / (4 * np.pi), 0.0, 0.0]], rtol=1e-15)

    def test_symmetric_pair_cancels_at_origin(self):
        e = direct_sum_field(_ensemble([[0.3, -0.2, 0.7], [-0.3, 0.2, -0.7]], [0.5, 0.5]), [[0.0, 0.0, 0.0]])
        np.testing.assert_allclose(e, np.zeros((1, 3)), atol=1e-16)

    def test_self_interaction_excluded(self):
        ensemble = _ensemble([1.0, 2.0, 3.0], [1.0])
        np.testing.assert_array_equal(direct_sum_field(ensemble, ensemble.x), np.zeros((1, 3)))

    def test_pair_antisymmetry(self):
        """Equal weights: the kick i receives from j is minus the kick j receives from i"""
        rng = np.random.default_rng(3)
        for _ in range(20):
            x = rng.normal(size=(2, 3))
            e = direct_sum_field(_ensemble(x, [0.4, 0.4]), x)
            np.testing.assert_allclose(e[0], -e[1], rtol=1e-14, atol=1e-16)

    def test_softening_caps_field(self):
        ensemble = _ensemble([0.0, 0.0, 0.0], [1.0])
        eps = 0.1
        e = direct_sum_field(ensemble, [[eps / np.sqrt(2), 0.0, 0.0]], softening=eps)
        assert np.linalg.norm(e) <= 1.0 / (4 * np.pi * eps ** 2)

    def test_negative_softening_rejected(self):
        with pytest.raises(ValidationError):
            direct_sum_field(_ensemble([0.0, 0.0, 0.0], [1.0]), [[1.0, 0.0, 0.0]], softening=-1.0)

    def test_potential_gradient(self):
        rng = np.random.default_rng(5)
        ensemble = _ensemble(rng.normal(size=(30, 3)), rng.uniform(0.1, 1.0, 30))
        target = np.array([2.5, -1.0, 0.5])
        step = 1e-5
        grad = np.array([
            (direct_sum_potential(ensemble, target + step * d) - direct_sum_potential(ensemble, target - step * d))[0]
            / (2 * step)
            for d in np.eye(3)
        ])
        np.testing.assert_allclose(grad, direct_sum_field(ensemble, target)[0], rtol=1e-7)

    def test_agrees_with_radial_backend(self):
        """Raw direct sum matches the shell-theorem field of the same sample within its sampling noise"""
        ensemble = sample_initial_ensemble(Scenario.create("radial-gaussian", sigma_x=0.5), 20000, 1.0, seed=7)
        profile = build_radial_profile(ensemble, n_bins=20000, r_max=4.0)
        rng = np.random.default_rng(9)
        targets = rng.normal(size=(20, 3))
        targets *= (rng.uniform(0.1, 3.0, 20) / np.linalg.norm(targets, axis=1))[:, None]

        direct = direct_sum_field(ensemble, targets)
        scale = np.linalg.norm(direct, axis=1)
        error = np.linalg.norm(radial_field(profile, targets) - direct, axis=1) / scale
        noise = direct_sum_noise(ensemble, targets) / scale
        assert np.all(error <= np.maximum(1e-2, 4.0 * noise))


class TestDirectSumNoise:
    """Test cases for direct_sum_noise"""

    def test_single_source_has_no_spread(self):
        noise = direct_sum_noise(_ensemble([0.2, -0.1, 0.4], [0.7]), [[1.0, 0.5, 0.0], [-2.0, 0.0, 1.0]])
        np.testing.assert_allclose(noise, np.zeros(2), atol=1e-15)

    def test_two_equal_sources(self):
        x = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
        target = [[0.3, 0.8, -0.2]]
        k = [direct_sum_field(_ensemble(xj, [1.0]), target)[0] for xj in x]
        expected = np.linalg.norm(k[0] - k[1]) / np.sqrt(8.0)
        assert direct_sum_noise(_ensemble(x, [0.5, 0.5]), target)[0] == pytest.approx(expected, rel=1e-12)

    def test_matches_per_source_spread(self):
        rng = np.random.default_rng(4)
        x = rng.normal(size=(30, 3))
        w = rng.uniform(0.1, 1.0, 30)
        targets = rng.normal(size=(5, 3)) * 2.0
        k = np.stack([direct_sum_field(_ensemble(xj, [1.0]), targets) for xj in x])
        mean = np.einsum("j,jik->ik", w, k) / w.sum()
        expected = np.sqrt(np.einsum("j,ji->i", w ** 2, np.sum((k - mean) ** 2, axis=2)))
        np.testing.assert_allclose(direct_sum_noise(_ensemble(x, w), targets), expected, rtol=1e-10)

    def test_empty_inputs(self):
        assert direct_sum_noise(_ensemble(np.zeros((0, 3)), []), [[1.0, 0.0, 0.0]]).tolist() == [0.0]
        assert direct_sum_noise(_ensemble([0.0, 0.0, 0.0], [1.0]), np.zeros((0, 3))).shape == (0,)


class TestPairwiseFieldEnergy:
    """Test cases for pairwise_field_energy"""

    def test_two_particles(self):
        ensemble = _ensemble([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]], [0.5, 0.5])
        assert pairwise_field_energy(ensemble) == pytest.approx(1.0 / (16 * np.pi), rel=1e-15)

    def test_single_particle_has_no_energy(self):
        assert pairwise_field_energy(_ensemble([0.0, 0.0, 0.0], [1.0])) == 0.0

    def test_energy_is_half_potential_sum(self):
        rng = np.random.default_rng(2)
        ensemble = _ensemble(rng.normal(size=(50, 3)), rng.uniform(0.1, 1.0, 50))
        phi = direct_sum_potential(ensemble, ensemble.x, softening=0.05)
        expected = -0.5 * np.sum(ensemble.w * phi)
        assert pairwise_field_energy(ensemble, softening=0.05) == pytest.approx(expected, rel=1e-12)
