"""
Run harness

Config parsing, run orchestration, checkpoints, artifacts and the acceptance
suites behind the `rvp` command line.
"""

from .config import Criterion, RunConfig, load_run_config, parse_config
from .artifacts import OutputDirectory, write_error, write_json
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .recorder import LocalizationRecorder, RunDiagnostics
from .runner import RunResult, SimulationRun, configure_threads, resume_simulation, run_simulation
from .verify import CriterionResult, VerificationSuite, VerifyReport, verify

__version__ = "1.0.0"

__all__ = [
    "Criterion",
    "RunConfig",
    "load_run_config",
    "parse_config",
    "OutputDirectory",
    "write_error",
    "write_json",
    "Checkpoint",
    "load_checkpoint",
    "save_checkpoint",
    "LocalizationRecorder",
    "RunDiagnostics",
    "RunResult",
    "SimulationRun",
    "configure_threads",
    "resume_simulation",
    "run_simulation",
    "CriterionResult",
    "VerificationSuite",
    "VerifyReport",
    "verify",
]
