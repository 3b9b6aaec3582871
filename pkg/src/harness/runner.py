"""
Run orchestration

scenario -> ensemble -> integrate (field backend, diagnostics engine,
localization recorder, step monitor, trajectory log) -> artifacts.
The harness itself is single threaded; worker counts are handed to the
modules that parallelize.
"""

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numba
import numpy as np

from functionals.engine import DiagnosticsEngine
from functionals.majority import majority_report
from functionals.surrogates import MomentSurrogates, MomentTracker
from kinetics.exceptions import ConfigurationError, RVPException
from kinetics.particles import Ensemble
from kinetics.scenarios import sample_initial_ensemble
from pusher.integrator import IntegrationState, integrate, record_times, uniform_steps
from pusher.monitors import StepMonitor
from pusher.trajectory import TrajectoryLog, evenly_spaced_ids
from utils.logging_config import RunLogger
from utils.metrics_collector import MetricsCollector
from .artifacts import OutputDirectory
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .config import RunConfig
from .recorder import LocalizationRecorder, RunDiagnostics

logger = logging.getLogger(__name__)

DIAGNOSTICS_CSV = "diagnostics.csv"
TRAJECTORY_CSV = "trajectory.csv"
LOCALIZATION_JSON = "localization.json"
CONSTANTS_CSV = "localization_constants.csv"
MAJORITY_JSON = "majority.json"
FINAL_CHECKPOINT = "checkpoint.npz"
METRICS_FILE = "metrics.prom"


def configure_threads(threads: int) -> int:
    """Apply a thread count to numba kernels; returns the count actually used"""
    usable = max(1, min(int(threads), int(numba.config.NUMBA_NUM_THREADS)))
    numba.set_num_threads(usable)
    return usable


def initial_surrogates(ensemble: Ensemble, n_r: int, n_c: int) -> MomentSurrogates:
    tracker = MomentTracker(n_r, n_c)
    tracker.observe(ensemble)
    return tracker.surrogates(ensemble.t)


class _Instruments:
    """Integrator hooks forwarded to the metrics collector and the run log"""

    def __init__(self, metrics: MetricsCollector, run_logger: RunLogger):
        self.metrics = metrics
        self.run_logger = run_logger

    def record_steps(self, count: int = 1):
        self.metrics.record_steps(count)

    def record_field_rebuild(self, mode: str, seconds: float):
        self.metrics.record_field_rebuild(mode, seconds)
        self.run_logger.field_rebuilt(mode, seconds)


@dataclass
class RunResult:
    directory: Path
    config_hash: str
    summary: Dict[str, Any] = field(default_factory=dict)


class SimulationRun:
    """
    One run writing into one fresh output directory

    Args:
        config: validated run config; output.directory must not hold files
        command: name recorded in the manifest (run or resume)
        metrics: collector for steps, field rebuilds and rows written
    """

    def __init__(self, config: RunConfig, command: str = "run", metrics: Optional[MetricsCollector] = None):
        self.config = config
        self.command = command
        self.metrics = metrics or MetricsCollector()
        self.run_logger = RunLogger(config.config_hash)
        self.output = OutputDirectory(config.output.directory)
        self.workers = config.runtime.threads

    def run(self) -> RunResult:
        """Sample the scenario and integrate from t = 0"""
        self.output.create()
        cfg = self.config
        return self._guarded(lambda: self._execute(sample_initial_ensemble(
            cfg.scenario.build(), cfg.particles.count, cfg.particles.total_mass, cfg.particles.seed
        )))

    def resume(self, checkpoint: Checkpoint) -> RunResult:
        """Continue a checkpointed run to its t_end"""
        self.output.create()
        return self._guarded(lambda: self._execute(checkpoint.state.ensemble, checkpoint))

    def _guarded(self, body) -> RunResult:
        try:
            return body()
        except RVPException as e:
            self.metrics.record_error(e.error_code)
            self.run_logger.run_failed(self.command, e.error_code, e.message)
            raise

    def _checkpoint(self, state: IntegrationState, diagnostics: RunDiagnostics, monitor: StepMonitor,
                    trajectory: Optional[TrajectoryLog]) -> Checkpoint:
        recorder = diagnostics.recorder
        return Checkpoint(
            config=self.config,
            state=state,
            engine=diagnostics.engine.state_dict(),
            monitor=monitor.state_dict(),
            trajectory=trajectory.state_dict() if trajectory is not None else None,
            localization=recorder.state_dict() if recorder is not None else None,
        )

    def _execute(self, ensemble: Ensemble, checkpoint: Optional[Checkpoint] = None) -> RunResult:
        cfg = self.config
        started = time.perf_counter()
        configure_threads(self.workers)
        self.metrics.set_particles(len(ensemble))
        self.run_logger.run_started(self.command, len(ensemble), cfg.integrator.t_end, str(self.output.path))

        params = cfg.diagnostics.functional_params()
        engine = DiagnosticsEngine(params)
        monitor = StepMonitor(cfg.diagnostics.monitor.monotone_band, cfg.diagnostics.monitor.speed_band)
        ids = evenly_spaced_ids(len(ensemble), cfg.trajectory.count)
        trajectory = TrajectoryLog(ids, cfg.trajectory.stride) if ids.size else None
        recorder = None
        if cfg.localization.enabled:
            recorder = LocalizationRecorder(
                cfg.localization, initial_surrogates(ensemble, params.n_r, params.n_c), workers=self.workers
            )

        t_end = cfg.integrator.t_end
        if checkpoint is None:
            t0, start_step = ensemble.t, 0
            n_steps = uniform_steps(t0, t_end, cfg.integrator.dt)
        else:
            t0, start_step, n_steps = checkpoint.state.t0, checkpoint.state.step, checkpoint.state.n_steps
            engine.load_state(checkpoint.engine)
            monitor.load_state(checkpoint.monitor)
            if checkpoint.trajectory is not None:
                trajectory = TrajectoryLog.from_state(checkpoint.trajectory)
            if recorder is not None and checkpoint.localization is not None:
                recorder.load_state(checkpoint.localization)
        diagnostics = RunDiagnostics(engine, recorder)

        def write_checkpoint(state: IntegrationState):
            path = self.output.file(f"checkpoints/step_{state.step:08d}.npz")
            save_checkpoint(path, self._checkpoint(state, diagnostics, monitor, trajectory))
            self.run_logger.checkpoint_written(str(path), state.step, state.ensemble.t)

        result = integrate(
            ensemble,
            cfg.integrator.integrator_config(workers=self.workers, progress=cfg.runtime.progress),
            t_end,
            schedule=record_times(t0, t_end, cfg.diagnostics.interval),
            diagnostics=diagnostics,
            trajectory=trajectory,
            monitor=monitor,
            checkpoint=write_checkpoint,
            checkpoint_every=cfg.checkpoint.every_steps,
            resume=checkpoint.state if checkpoint is not None else None,
            metrics=_Instruments(self.metrics, self.run_logger),
        )
        final = result.ensemble

        summary = self._write_artifacts(final, diagnostics, monitor, trajectory)
        final_state = IntegrationState(final, n_steps, n_steps, t0, t_end, None, np.zeros((0, 3)))
        save_checkpoint(self.output.file(FINAL_CHECKPOINT),
                        self._checkpoint(final_state, diagnostics, monitor, trajectory))

        seconds = time.perf_counter() - started
        steps_taken = n_steps - start_step
        summary.update({"steps": n_steps, "steps_this_invocation": steps_taken, "resumed_from_step": start_step})
        self.metrics.write_textfile(self.output.file(METRICS_FILE))
        self.output.write_manifest(self.command, cfg.to_dict(), cfg.config_hash, "completed",
                                   summary, self.metrics.get_metrics())
        self.run_logger.run_finished(self.command, seconds, steps_taken / seconds if seconds > 0 else None)
        return RunResult(self.output.path, cfg.config_hash, summary)

    def _write_artifacts(self, final: Ensemble, diagnostics: RunDiagnostics, monitor: StepMonitor,
                         trajectory: Optional[TrajectoryLog]) -> Dict[str, Any]:
        cfg = self.config
        engine = diagnostics.engine
        surrogates = engine.surrogates(final.t)

        engine.series.to_csv(self.output.file(DIAGNOSTICS_CSV))
        self._rows(DIAGNOSTICS_CSV, len(engine.series))
        summary: Dict[str, Any] = {
            "t_end": final.t,
            "particles": len(final),
            "records": len(engine.series),
            "monitor": monitor.to_dict(),
            "surrogates": surrogates.to_dict(),
        }

        if trajectory is not None:
            trajectory.to_csv(self.output.file(TRAJECTORY_CSV))
            self._rows(TRAJECTORY_CSV, len(trajectory) * trajectory.sample_ids.size)

        if diagnostics.recorder is not None:
            recorder = diagnostics.recorder
            report, characteristics = recorder.finish(trajectory, surrogates)
            self.output.write_json(LOCALIZATION_JSON, recorder.to_dict(report, characteristics))
            report.write_constants_csv(self.output.file(CONSTANTS_CSV))
            self._rows(LOCALIZATION_JSON, len(report.entries))
            summary["localization"] = {
                "passed": report.passed,
                "indices": len(report.entries),
                "sup_constant": report.sup_constant.constant,
                "pointwise_constant": report.pointwise_constant.constant,
            }

        threshold = cfg.trajectory.majority_threshold
        if threshold is not None and trajectory is not None:
            params = engine.params.majority_params(surrogates)
            majority = majority_report(trajectory, threshold, params)
            self.output.write_json(MAJORITY_JSON, majority.to_dict())
            summary["majority"] = {"tracked": majority.tracked, "majority": majority.majority}
        return summary

    def _rows(self, artifact: str, rows: int):
        self.metrics.record_rows(artifact, rows)
        self.run_logger.record_written(artifact, rows)


def run_simulation(config: RunConfig, metrics: Optional[MetricsCollector] = None) -> RunResult:
    return SimulationRun(config, "run", metrics).run()


def resume_simulation(checkpoint: Union[str, Path, Checkpoint], overrides: Optional[Dict[str, Any]] = None,
                      metrics: Optional[MetricsCollector] = None) -> RunResult:
    """
    Continue a checkpointed run into a new output directory

    Args:
        checkpoint: mid-run or final checkpoint, or its path
        overrides: unhashed sections to change (output directory, threads)
        metrics: collector for the resumed run

    Returns:
        RunResult of the resumed run
    """
    if not isinstance(checkpoint, Checkpoint):
        checkpoint = load_checkpoint(checkpoint)
    config = checkpoint.config
    if overrides:
        config = config.with_overrides(overrides)
        if config.config_hash != checkpoint.config.config_hash:
            raise ConfigurationError(",".join(sorted(overrides)),
                                     "only output, runtime and logging may change when resuming")
    checkpoint.config = config
    return SimulationRun(config, "resume", metrics).resume(checkpoint)
