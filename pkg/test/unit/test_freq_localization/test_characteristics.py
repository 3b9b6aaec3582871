"""
Unit tests for localized-field integrals along characteristics
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add src directory to Python path
sys.path.insert(0, str(Path(__file__).parent.parent.parent.parent / "src"))

from kinetics import CoverageError, Ensemble, ValidationError
from field_solvers.grid import FieldGrid, GridSpec
from freq_localization import (
    DyadicIndex,
    IndexClass,
    LocalizedField,
    integrated_field_along_characteristic,
)
from pusher import IntegratorConfig, TrajectoryLog, integrate

INDEX = DyadicIndex(1, 0, 0)
SPEC = GridSpec.centered(8, 4.0)


def snapshot(vector, t, index=INDEX):
    vector = np.asarray(vector, dtype=np.float64)
    e_field = np.broadcast_to(vector, SPEC.dims + (3,)).copy()
    grid = FieldGrid(spec=SPEC, rho=np.zeros(SPEC.dims), e_field=e_field)
    return LocalizedField(index=index, grid=grid, sup_norm=float(np.linalg.norm(vector)), t=t)


def history(vectors, t_end=1.0):
    times = np.linspace(0.0, t_end, len(vectors))
    return [snapshot(v, float(t)) for v, t in zip(vectors, times)]


@pytest.fixture(scope="module")
def straight_lines():
    """Two free particles moving along x and along y for unit time"""
    ensemble = Ensemble.create(np.zeros((2, 3)), [[0.5, 0.0, 0.0], [0.0, 0.5, 0.0]], [0.5, 0.5])
    log = TrajectoryLog([0, 1])
    return integrate(ensemble, IntegratorConfig(dt=0.05, field_mode="zero"), 1.0, trajectory=log).trajectory


def integral(trajectory, snapshots, **kwargs):
    return integrated_field_along_characteristic(trajectory, snapshots, INDEX, m_t=1, epsilon=0.5, **kwargs)


class TestCharacteristicIntegral:
    """Test cases for integrated_field_along_characteristic"""

    def test_zero_field(self, straight_lines):
        report = integral(straight_lines, history([(0.0, 0.0, 0.0)] * 3))
        assert report.integrals == [0.0, 0.0]
        assert report.max_ratio == 0.0
        assert report.naive_bound == 0.0

    def test_orthogonal_constant_field(self, straight_lines):
        report = integral(straight_lines, history([(0.0, 0.0, 2.0)] * 2))
        assert report.integrals == [0.0, 0.0]

    def test_aligned_constant_field(self, straight_lines):
        report = integral(straight_lines, history([(1.0, 0.0, 0.0)] * 2))
        assert report.integrals[0] == pytest.approx(1.0, rel=1e-12)
        assert report.integrals[1] == pytest.approx(0.0, abs=1e-15)
        assert report.naive_bound == pytest.approx(1.0)
        assert report.max_ratio == pytest.approx(1.0, rel=1e-12)

    def test_oscillating_field_beats_naive_bound(self, straight_lines):
        constant = integral(straight_lines, history([(1.0, 0.0, 0.0)] * 11))
        signs = [(-1.0) ** i for i in range(11)]
        oscillating = integral(straight_lines, history([(s, 0.0, 0.0) for s in signs]))
        assert oscillating.naive_bound == constant.naive_bound
        assert oscillating.max_ratio < 0.1 * constant.max_ratio

    def test_snapshot_order_irrelevant(self, straight_lines):
        snaps = history([(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (1.0, 1.0, 0.0)])
        forward = integral(straight_lines, snaps)
        backward = integral(straight_lines, list(reversed(snaps)))
        assert forward.integrals == backward.integrals

    def test_classification(self, straight_lines):
        report = integral(straight_lines, history([(1.0, 0.0, 0.0)] * 2))
        assert report.index_class == IndexClass.COMPLEMENT
        assert report.to_dict()["class"] == "B^c"

    def test_snapshots_end_early(self, straight_lines):
        with pytest.raises(CoverageError):
            integral(straight_lines, history([(1.0, 0.0, 0.0)] * 2, t_end=0.5))

    def test_snapshot_gap(self, straight_lines):
        with pytest.raises(CoverageError) as info:
            integral(straight_lines, history([(1.0, 0.0, 0.0)] * 2), max_gap=0.25)
        assert info.value.error_code == "SNAPSHOT_COVERAGE"

    def test_index_mismatch(self, straight_lines):
        snaps = [snapshot((1.0, 0.0, 0.0), 0.0), snapshot((1.0, 0.0, 0.0), 1.0, DyadicIndex(2, 0, 0))]
        with pytest.raises(ValidationError):
            integral(straight_lines, snaps)

    def test_no_snapshots(self, straight_lines):
        with pytest.raises(ValidationError):
            integral(straight_lines, [])
