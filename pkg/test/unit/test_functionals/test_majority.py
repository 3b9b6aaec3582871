"""
Unit tests for majority-set reports
"""

import math
import sys
from pathlib import Path

import numpy as np
import pytest

# Add src directory to Python path
sys.path.insert(0, str(Path(__file__).parent.parent.parent.parent / "src"))

from kinetics import Ensemble, Scenario, ValidationError, sample_initial_ensemble
from functionals import MajorityParams, majority_report
from pusher import IntegratorConfig, TrajectoryLog, integrate


@pytest.fixture
def gaussian():
    return sample_initial_ensemble(Scenario.create("radial-gaussian"), 200, 1.0, seed=12)


def logged_run(ensemble, config, t_end):
    log = TrajectoryLog(np.arange(len(ensemble)))
    return integrate(ensemble, config, t_end, trajectory=log).trajectory


class TestMajorityReport:
    """Test cases for majority_report"""

    def test_free_streaming_keeps_speeds(self, gaussian):
        log = logged_run(gaussian, IntegratorConfig(dt=0.05, field_mode="zero"), 1.0)
        report = majority_report(log, initial_threshold=3.0)
        assert not report.empty
        assert report.starts_at_zero
        assert report.max_speed == report.initial_max_speed
        assert report.speed_bound_violations == 0

    def test_radially_outgoing_particle_saturates_speed_bound(self):
        ensemble = Ensemble.create([[1.0, 0.0, 0.0]], [[0.5, 0.0, 0.0]], [1.0])
        config = IntegratorConfig(dt=0.01, field_mode="point-charge", analytic={"charge": 4 * math.pi})
        log = logged_run(ensemble, config, 2.0)
        report = majority_report(log, initial_threshold=10.0)
        assert report.majority == 1
        assert report.max_speed > report.initial_max_speed
        assert report.speed_bound_violations == 0
        assert report.max_speed_bound_ratio == pytest.approx(1.0, abs=1e-12)

    def test_speed_bound_holds_in_self_consistent_field(self, gaussian):
        log = logged_run(gaussian, IntegratorConfig(dt=0.01), 0.5)
        report = majority_report(log, initial_threshold=5.0)
        assert report.speed_bound_violations == 0
        assert report.max_speed_bound_ratio <= 1.0 + 1e-9

    def test_empty_majority_is_flagged(self, gaussian):
        log = logged_run(gaussian, IntegratorConfig(dt=0.1, field_mode="zero"), 0.2)
        report = majority_report(log, initial_threshold=1e-6)
        assert report.empty
        assert report.majority == 0
        assert report.max_speed_history == []

    def test_max_speed_is_a_running_maximum(self, gaussian):
        config = IntegratorConfig(dt=0.0625)
        short = majority_report(logged_run(gaussian, config, 0.5), initial_threshold=5.0)
        full = majority_report(logged_run(gaussian, config, 1.0), initial_threshold=5.0)
        assert np.all(np.diff(full.max_speed_history) >= 0)
        assert short.max_speed <= full.max_speed
        assert full.max_speed_history[: len(short.max_speed_history)] == short.max_speed_history

    def test_constants_use_supplied_surrogates(self, gaussian):
        log = logged_run(gaussian, IntegratorConfig(dt=0.1, field_mode="zero"), 0.2)
        report = majority_report(log, 5.0, MajorityParams(n_r=10, log2_tilde_r=40.0, m_t=3))
        assert report.position_constant == pytest.approx(report.max_position / 4.0)
        assert report.m_t == 3
        assert report.beta >= 0.0

    def test_needs_logged_states(self):
        with pytest.raises(ValidationError):
            majority_report(TrajectoryLog([0]), 1.0)
