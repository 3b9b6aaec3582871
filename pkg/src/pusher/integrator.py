"""
Relativistic leapfrog integrator

Kick-drift-kick on the momentum v, drifting with the velocity v / <v>:

    v_half = v_n + (dt/2) E(x_n)
    x_n+1  = x_n + dt * v_half / <v_half>
    v_n+1  = v_half + (dt/2) E(x_n+1)

The self-consistent field is rebuilt from x_n+1 every `field_refresh` steps and
held fixed in between. Every particle update reads only its own state and the
frozen field, so results do not depend on worker counts.
"""

import logging
import math
import time
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Sequence

import numpy as np
from tqdm import tqdm

from field_solvers.grid import GridSpec
from kinetics.exceptions import IntegrationBlowupError, ValidationError
from kinetics.kinematics import relativistic_velocity
from kinetics.particles import Ensemble
from .evaluators import FieldEvaluator, FieldMode, build_field
from .monitors import StepMonitor
from .trajectory import TrajectoryLog

logger = logging.getLogger(__name__)

DEFAULT_SOFTENING = 1e-3


@dataclass(frozen=True)
class IntegratorConfig:
    """
    Time step and field backend for a run

    profile_bins = 0 selects the exact shell field for the radial backend;
    analytic holds the parameters of the analytic field modes (charge,
    line_density, vector).
    """
    dt: float
    field_mode: FieldMode = FieldMode.RADIAL
    field_refresh: int = 1
    softening: float = DEFAULT_SOFTENING
    grid: Optional[GridSpec] = None
    profile_bins: int = 0
    r_max: float = 10.0
    workers: int = 1
    analytic: Dict[str, Any] = field(default_factory=dict)
    progress: bool = False

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValidationError("integrator.dt", "must be positive and finite", self.dt)
        if int(self.field_refresh) != self.field_refresh or self.field_refresh < 1:
            raise ValidationError("integrator.field_refresh", "must be an integer >= 1", self.field_refresh)
        if not (self.softening >= 0 and math.isfinite(self.softening)):
            raise ValidationError("integrator.softening", "must be finite and nonnegative", self.softening)
        if int(self.profile_bins) != self.profile_bins or self.profile_bins < 0:
            raise ValidationError("integrator.profile_bins", "must be a nonnegative integer", self.profile_bins)
        if not (self.r_max > 0 and math.isfinite(self.r_max)):
            raise ValidationError("integrator.r_max", "must be positive and finite", self.r_max)
        if int(self.workers) != self.workers or self.workers < 1:
            raise ValidationError("integrator.workers", "must be an integer >= 1", self.workers)
        object.__setattr__(self, "field_mode", FieldMode(self.field_mode))
        object.__setattr__(self, "field_refresh", int(self.field_refresh))
        object.__setattr__(self, "profile_bins", int(self.profile_bins))

    def with_dt(self, dt: float) -> "IntegratorConfig":
        return replace(self, dt=dt)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dt": self.dt,
            "field_mode": self.field_mode.value,
            "field_refresh": self.field_refresh,
            "softening": self.softening,
            "grid": self.grid.to_dict() if self.grid else None,
            "profile_bins": self.profile_bins,
            "r_max": self.r_max,
            "workers": self.workers,
            "analytic": dict(self.analytic),
            "progress": self.progress,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "IntegratorConfig":
        data = dict(data)
        if data.get("grid") is not None and not isinstance(data["grid"], GridSpec):
            data["grid"] = GridSpec.from_dict(data["grid"])
        return cls(**data)


def _first_bad_index(x: np.ndarray, v: np.ndarray) -> Optional[int]:
    bad = ~(np.all(np.isfinite(x), axis=1) & np.all(np.isfinite(v), axis=1))
    if np.any(bad):
        return int(np.flatnonzero(bad)[0])
    return None


def _half_kick(v: np.ndarray, e: np.ndarray, dt: float) -> np.ndarray:
    return v + (0.5 * dt) * e


def _drift(x: np.ndarray, v: np.ndarray, dt: float) -> np.ndarray:
    return x + dt * relativistic_velocity(v)


def push(ensemble: Ensemble, field: FieldEvaluator, dt: float,
         e_start: Optional[np.ndarray] = None) -> Ensemble:
    """
    One kick-drift-kick step in a field held fixed for the whole step

    Args:
        ensemble: state at time t
        field: frozen field evaluator
        dt: time step (> 0)
        e_start: field on the particles at time t, if already known

    Returns:
        Ensemble at t + dt with weights and initial data unchanged

    Raises:
        IntegrationBlowupError: a particle's state became non-finite
    """
    if not (dt > 0 and math.isfinite(dt)):
        raise ValidationError("dt", "must be positive and finite", dt)
    e = field.particle_field(ensemble.x) if e_start is None else e_start
    v_half = _half_kick(ensemble.v, e, dt)
    x_new = _drift(ensemble.x, v_half, dt)
    v_new = _half_kick(v_half, field.particle_field(x_new), dt)
    t_new = ensemble.t + dt
    bad = _first_bad_index(x_new, v_new)
    if bad is not None:
        raise IntegrationBlowupError(bad, t_new)
    return ensemble.with_state(x_new, v_new, t_new)


class LeapfrogStepper:
    """
    Stateful stepper that owns the field between rebuilds

    The field on the particles at the end of a step is cached and reused as
    the first half-kick of the next one.
    """

    def __init__(self, config: IntegratorConfig, ensemble: Ensemble,
                 steps_taken: int = 0,
                 field_source: Optional[np.ndarray] = None,
                 cached_field: Optional[np.ndarray] = None,
                 on_rebuild: Optional[Callable[[FieldEvaluator, float], None]] = None):
        self.config = config
        self.steps_taken = int(steps_taken)
        self.rebuilds = 0
        self._on_rebuild = on_rebuild

        source = ensemble if field_source is None else ensemble.with_state(field_source, ensemble.v, ensemble.t)
        self.field = self._build(source)
        if cached_field is None:
            cached_field = self.field.particle_field(ensemble.x)
        self._e = np.asarray(cached_field, dtype=np.float64)

    def _build(self, ensemble: Ensemble) -> FieldEvaluator:
        start = time.perf_counter()
        evaluator = build_field(ensemble, self.config)
        elapsed = time.perf_counter() - start
        self.rebuilds += 1
        if self._on_rebuild is not None:
            self._on_rebuild(evaluator, elapsed)
        return evaluator

    @property
    def current_field(self) -> np.ndarray:
        """Field on each particle at the current positions"""
        return self._e

    def step(self, ensemble: Ensemble, dt: float, t_new: Optional[float] = None) -> Ensemble:
        """
        Advance the ensemble by one step

        Args:
            ensemble: state the cached field belongs to
            dt: time step
            t_new: clock after the step (defaults to ensemble.t + dt)

        Returns:
            Ensemble after the step
        """
        t_new = ensemble.t + dt if t_new is None else t_new
        v_half = _half_kick(ensemble.v, self._e, dt)
        x_new = _drift(ensemble.x, v_half, dt)
        self.steps_taken += 1

        if self.field.mode.self_consistent and self.steps_taken % self.config.field_refresh == 0:
            self.field = self._build(ensemble.with_state(x_new, v_half, t_new))

        e_new = self.field.particle_field(x_new)
        v_new = _half_kick(v_half, e_new, dt)
        bad = _first_bad_index(x_new, v_new)
        if bad is not None:
            raise IntegrationBlowupError(bad, t_new)
        self._e = e_new
        return ensemble.with_state(x_new, v_new, t_new)


def uniform_steps(t0: float, t_end: float, dt: float) -> int:
    """Number of equal steps of size close to dt that land exactly on t_end"""
    if t_end <= t0:
        return 0
    return max(1, int(round((t_end - t0) / dt)))


def record_times(t0: float, t_end: float, interval: float) -> List[float]:
    """t0, t0 + interval, ... up to and including t_end"""
    if not (interval > 0 and math.isfinite(interval)):
        raise ValidationError("diagnostics.interval", "must be positive and finite", interval)
    count = int(math.floor((t_end - t0) / interval + 1e-9))
    times = [t0 + i * interval for i in range(count + 1)]
    if t_end - times[-1] > 1e-9 * max(1.0, abs(t_end)):
        times.append(t_end)
    return times


def _record_steps(schedule: Sequence[float], t0: float, t_end: float, n_steps: int) -> Dict[int, float]:
    """Map each scheduled time to the nearest step index"""
    slack = 1e-12 * max(1.0, abs(t0), abs(t_end))
    steps: Dict[int, float] = {}
    for s in schedule:
        if not (t0 - slack <= s <= t_end + slack):
            raise ValidationError("schedule", f"record time outside [{t0!r}, {t_end!r}]", s)
        if n_steps == 0:
            continue
        index = int(round((s - t0) / (t_end - t0) * n_steps))
        steps.setdefault(index, s)
    return steps


@dataclass
class IntegrationState:
    """Everything needed to continue an interrupted integration bit-exactly"""
    ensemble: Ensemble
    step: int
    n_steps: int
    t0: float
    t_end: float
    field_source: Optional[np.ndarray]
    cached_field: np.ndarray

    @property
    def dt(self) -> float:
        return (self.t_end - self.t0) / self.n_steps if self.n_steps else 0.0

    def time_at(self, step: int) -> float:
        if step >= self.n_steps:
            return self.t_end
        return self.t0 + step * self.dt


class IntegrationResult(NamedTuple):
    ensemble: Ensemble
    trajectory: Optional[TrajectoryLog]
    series: Any


def integrate(ensemble: Ensemble, config: IntegratorConfig, t_end: float,
              schedule: Sequence[float] = (),
              diagnostics: Any = None,
              trajectory: Optional[TrajectoryLog] = None,
              monitor: Optional[StepMonitor] = None,
              checkpoint: Optional[Callable[[IntegrationState], None]] = None,
              checkpoint_every: int = 0,
              resume: Optional[IntegrationState] = None,
              metrics: Any = None) -> IntegrationResult:
    """
    Integrate the ensemble from its clock to t_end

    The step is (t_end - t) / round((t_end - t) / dt) so the last step lands on
    t_end. Diagnostics are recorded at the step nearest to each scheduled time.

    Args:
        ensemble: initial state (ignored when resuming)
        config: integrator settings
        t_end: final time (>= ensemble.t)
        schedule: record times inside [t, t_end]
        diagnostics: engine with start/advance/record and a `series` attribute
        trajectory: log of a particle subset, observed every step
        monitor: per-step invariant checks
        checkpoint: called with the integration state every checkpoint_every steps
        checkpoint_every: steps between checkpoint calls (0 disables)
        resume: state saved by a checkpoint call
        metrics: collector with record_steps / record_field_rebuild

    Returns:
        IntegrationResult(ensemble, trajectory, series)
    """
    if resume is not None:
        ensemble = resume.ensemble
        t0, n_steps, start_step = resume.t0, resume.n_steps, resume.step
        if abs(resume.t_end - t_end) > 0:
            raise ValidationError("t_end", "does not match the checkpointed run", t_end)
    else:
        if not math.isfinite(t_end) or t_end < ensemble.t:
            raise ValidationError("t_end", "must not precede the ensemble clock", t_end)
        t0, start_step = ensemble.t, 0
        n_steps = uniform_steps(t0, t_end, config.dt)

    record_at = _record_steps(schedule, t0, t_end, n_steps)
    series = diagnostics.series if diagnostics is not None else None
    if n_steps == 0:
        logger.info("Empty integration: t_end equals the ensemble clock")
        return IntegrationResult(ensemble, trajectory, series)

    state = IntegrationState(ensemble, start_step, n_steps, t0, t_end, None, np.zeros((0, 3)))
    dt = state.dt

    def on_rebuild(evaluator: FieldEvaluator, seconds: float):
        if metrics is not None:
            metrics.record_field_rebuild(evaluator.mode.value, seconds)

    stepper = LeapfrogStepper(
        config, ensemble,
        steps_taken=start_step,
        field_source=resume.field_source if resume is not None else None,
        cached_field=resume.cached_field if resume is not None else None,
        on_rebuild=on_rebuild,
    )
    logger.info(
        f"Integrating {len(ensemble)} particles from t={t0:.6g} to t={t_end:.6g} "
        f"in {n_steps} steps of {dt:.6g} ({config.field_mode.value} field)"
    )

    if resume is None:
        if monitor is not None:
            monitor.start(ensemble)
        if trajectory is not None:
            trajectory.record(ensemble.t, ensemble, stepper.current_field)
        if diagnostics is not None:
            diagnostics.start(ensemble, stepper.field)
            if 0 in record_at:
                diagnostics.record(ensemble, stepper.field)

    with tqdm(total=n_steps, initial=start_step, disable=not config.progress,
              desc="integrate", unit="step") as bar:
        for step in range(start_step + 1, n_steps + 1):
            previous = ensemble
            ensemble = stepper.step(ensemble, dt, t_new=state.time_at(step))

            if monitor is not None:
                monitor.observe(previous, ensemble, dt)
            if trajectory is not None:
                trajectory.observe(step, n_steps, ensemble, stepper.current_field)
            if diagnostics is not None:
                diagnostics.advance(ensemble, dt)
                if step in record_at:
                    diagnostics.record(ensemble, stepper.field)
            if metrics is not None:
                metrics.record_steps(1)
            bar.update(1)

            if checkpoint is not None and checkpoint_every and step % checkpoint_every == 0 and step < n_steps:
                checkpoint(IntegrationState(
                    ensemble, step, n_steps, t0, t_end,
                    np.array(stepper.field.source_positions) if stepper.field.source_positions is not None else None,
                    np.array(stepper.current_field),
                ))

    logger.info(f"Integration finished at t={ensemble.t:.6g} after {stepper.rebuilds} field builds")
    return IntegrationResult(ensemble, trajectory, series)
