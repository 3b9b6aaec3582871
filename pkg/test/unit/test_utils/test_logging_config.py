"""
Unit tests for logging setup and the structured run log
"""

import json
import logging
import sys
from pathlib import Path

import pytest

# Add src directory to Python path
sys.path.insert(0, str(Path(__file__).parent.parent.parent.parent / "src"))

from utils.logging_config import RunLogger, setup_logging, timing_decorator


@pytest.fixture
def structured_log(tmp_path):
    path = tmp_path / "logs" / "run.log"
    setup_logging({"level": "DEBUG", "file": str(path), "structured": True, "format": "%(message)s"})
    yield path
    setup_logging({"level": "WARNING"})


def _events(path: Path):
    for handler in logging.getLogger().handlers:
        handler.flush()
    return [json.loads(line) for line in path.read_text().splitlines() if line.startswith("{")]


class TestSetupLogging:
    """Test cases for setup_logging"""

    def test_file_handler_created(self, structured_log):
        logging.getLogger("rvp.test").info("plain message")
        assert structured_log.is_file()
        assert "plain message" in structured_log.read_text()

    def test_module_levels(self, tmp_path):
        setup_logging({"level": "INFO", "module_levels": {"rvp.noisy": "ERROR"}})
        assert logging.getLogger("rvp.noisy").level == logging.ERROR
        assert logging.getLogger("numba").level == logging.WARNING


class TestRunLogger:
    """Test cases for RunLogger events"""

    def test_events_carry_config_hash(self, structured_log):
        run_logger = RunLogger("a" * 64)
        run_logger.run_started("run", 100, 1.0, "runs/x")
        run_logger.checkpoint_written("runs/x/ck.npz", 10, 0.1)
        run_logger.run_failed("run", "INTEGRATION_BLOWUP", "non-finite state")

        events = _events(structured_log)
        names = [e["event"] for e in events]
        assert names == ["run_started", "checkpoint_written", "run_failed"]
        assert all(e["config_hash"] == "a" * 12 for e in events)
        assert events[0]["particles"] == 100
        assert events[2]["level"] == "error"

    def test_timing_decorator(self, structured_log):
        @timing_decorator("rvp.timing")
        def work(x):
            return 2 * x

        assert work(4) == 8
        events = [e for e in _events(structured_log) if e["event"] == "function_timing"]
        assert events[-1]["function"] == "work"
        assert events[-1]["success"] is True

    def test_timing_decorator_reraises(self, structured_log):
        @timing_decorator("rvp.timing")
        def broken():
            raise RuntimeError("boom")

        with pytest.raises(RuntimeError):
            broken()
        events = [e for e in _events(structured_log) if e["event"] == "function_timing"]
        assert events[-1]["success"] is False
        assert events[-1]["error"] == "boom"
