"""
Unit tests for MetricsCollector
"""

import sys
from pathlib import Path

import pytest

# Add src directory to Python path
sys.path.insert(0, str(Path(__file__).parent.parent.parent.parent / "src"))

from utils.metrics_collector import PROMETHEUS_AVAILABLE, MetricsCollector


class TestMetricsCollector:
    """Test cases for MetricsCollector"""

    def test_summary(self):
        metrics = MetricsCollector()
        metrics.record_steps(3)
        metrics.record_steps()
        metrics.record_field_rebuild("radial", 0.25)
        metrics.record_field_rebuild("grid", 0.5)
        metrics.set_particles(128)
        metrics.record_rows("diagnostics.csv", 6)
        metrics.record_error("INTEGRATION_BLOWUP")

        summary = metrics.get_metrics()
        assert summary["steps"] == 4
        assert summary["field_rebuilds"] == 2
        assert summary["field_rebuild_seconds_total"] == pytest.approx(0.75)
        assert summary["particles"] == 128
        assert summary["errors"] == 1
        assert summary["uptime_seconds"] >= 0

    def test_collectors_are_independent(self):
        first, second = MetricsCollector(), MetricsCollector()
        first.record_steps(5)
        assert second.get_metrics()["steps"] == 0

    @pytest.mark.skipif(not PROMETHEUS_AVAILABLE, reason="prometheus_client not installed")
    def test_textfile(self, tmp_path):
        metrics = MetricsCollector()
        metrics.record_steps(7)
        metrics.record_rows("trajectory.csv", 12)
        path = metrics.write_textfile(tmp_path / "metrics.prom")
        text = path.read_text()
        assert "rvp_integration_steps_total 7.0" in text
        assert 'rvp_records_total{artifact="trajectory.csv"} 12.0' in text

    def test_textfile_disabled(self, tmp_path):
        metrics = MetricsCollector(enable_prometheus=False)
        assert metrics.write_textfile(tmp_path / "metrics.prom") is None
        assert not (tmp_path / "metrics.prom").exists()
