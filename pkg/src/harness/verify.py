"""
Acceptance suites

Each criterion runs at the scale given in the config's verify section and
yields a CriterionResult; the report is written as verify.json plus one JSON
per criterion under criteria/. Module errors (a grid too coarse for the
requested shells, a blown-up integration) propagate to the caller.
"""

import csv
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy.spatial.transform import Rotation

from field_solvers import (
    build_radial_profile,
    direct_sum_field,
    direct_sum_noise,
    grid_deposit,
    grid_poisson_solve,
    interpolate_field,
    radial_field,
)
from functionals import (
    BUMP_PROFILE,
    DiagnosticsEngine,
    FunctionalParams,
    MomentTracker,
    WeightParams,
    cutoff_phi,
    inverse_angular_momentum_moment,
    omega_weight,
    weight_positivity_check,
)
from freq_localization import (
    bin_statistics,
    check_resolvable,
    iter_localized_fields,
    kernel_envelope,
    momentum_bins,
    resolvable_band,
    shell_reconstruction_residual,
    top_momentum_shell,
    velocity_partition_residual,
    verify_localized_bounds,
)
from kinetics import Ensemble, Scenario, ScenarioKind, angular_momentum, rotate_planar, sample_initial_ensemble
from pusher import FieldMode, IntegratorConfig, StepMonitor, integrate, record_times, uniform_steps
from utils.logging_config import RunLogger, timing_decorator
from utils.metrics_collector import MetricsCollector
from .artifacts import OutputDirectory
from .config import Criterion, RunConfig
from .runner import DIAGNOSTICS_CSV, TRAJECTORY_CSV, SimulationRun, configure_threads, resume_simulation

logger = logging.getLogger(__name__)

REPORT_NAME = "verify.json"
SWEEP_NAME = "sweep.csv"
SWEEP_COLUMNS = ("level", "dt", "steps", "energy_drift", "angular_momentum_drift",
                 "monotone_violations", "drift_ratio", "observed_order")
BOUND_SLACK = 1e-12
EXTERIOR_TOLERANCE = 1e-10
EXTERIOR_FACTOR = 1.5


@dataclass
class CriterionResult:
    """Outcome of one acceptance criterion"""
    criterion: Criterion
    passed: bool
    seconds: float = 0.0
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "criterion": self.criterion.value,
            "passed": self.passed,
            "seconds": self.seconds,
            "details": self.details,
        }


@dataclass
class VerifyReport:
    config_hash: str
    results: List[CriterionResult] = field(default_factory=list)
    sweep: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def failures(self) -> List[str]:
        return [r.criterion.value for r in self.results if not r.passed]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "config_hash": self.config_hash,
            "passed": self.passed,
            "failures": self.failures,
            "criteria": {r.criterion.value: r.to_dict() for r in self.results},
            "sweep": self.sweep,
        }


def relative_drift(values: np.ndarray) -> float:
    """max |q(t) - q(0)| / |q(0)| over a recorded series"""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        return 0.0
    spread = float(np.max(np.abs(values - values[0])))
    return spread / abs(values[0]) if values[0] != 0 else spread


def observed_order(coarse: float, fine: float) -> float:
    """log2 of the drift ratio between a step and its half"""
    if coarse > 0 and fine > 0:
        return math.log2(coarse / fine)
    return math.nan


def random_queries(rng: np.random.Generator, count: int, r_min: float, r_max: float) -> np.ndarray:
    """Points with uniform directions and radii uniform in [r_min, r_max]"""
    direction = rng.normal(size=(count, 3))
    direction /= np.linalg.norm(direction, axis=1)[:, None]
    return direction * rng.uniform(r_min, r_max, size=count)[:, None]


def rotation_averaged_direct_field(ensemble: Ensemble, queries: np.ndarray, rotations: int,
                                   rng: np.random.Generator) -> np.ndarray:
    """
    Direct-sum field averaged over random rotations of the ensemble

    The field of the rotated cloud R.x at q is R E(R^T q), so only the query
    points are rotated.
    """
    rots = Rotation.random(rotations, rng)
    m = queries.shape[0]
    targets = np.concatenate([rots[i].apply(queries, inverse=True) for i in range(rotations)])
    fields = direct_sum_field(ensemble, targets)
    total = np.zeros_like(queries)
    for i in range(rotations):
        total += rots[i].apply(fields[i * m:(i + 1) * m])
    return total / rotations


def relative_errors(field: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """|field - reference| / |reference| per query (absolute where the reference vanishes)"""
    scale = np.linalg.norm(reference, axis=1)
    error = np.linalg.norm(field - reference, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(scale > 0, error / scale, error)


def max_relative_error(field: np.ndarray, reference: np.ndarray) -> float:
    relative = relative_errors(field, reference)
    return float(np.max(relative)) if relative.size else 0.0


def backend_agreement(field: np.ndarray, reference: np.ndarray, tolerance: float,
                      noise_floor: np.ndarray) -> Dict[str, Any]:
    """
    Per-query comparison of two field backends

    A query passes when its relative error is within the tolerance, or within
    its sampling noise floor where that floor is the larger of the two.

    Args:
        field: backend under test, shape (m, 3)
        reference: other backend at the same queries
        tolerance: relative tolerance
        noise_floor: relative sampling noise allowance per query, shape (m,)
    """
    errors = relative_errors(field, reference)
    allowed = np.maximum(tolerance, noise_floor)
    return {
        "passed": bool(np.all(errors <= allowed)),
        "max_error": float(np.max(errors)) if errors.size else 0.0,
        "tolerance": float(tolerance),
        "noise_limited_queries": int(np.count_nonzero(noise_floor > tolerance)),
        "failed_queries": int(np.count_nonzero(errors > allowed)),
    }


def planar_samples(rng: np.random.Generator, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Phase points with planar radii in [0.5, 2] and uniform planar angles"""
    r = rng.uniform(0.5, 2.0, size=(2, n))
    angle = rng.uniform(0.0, 2.0 * math.pi, size=(2, n))
    x = np.column_stack([r[0] * np.cos(angle[0]), r[0] * np.sin(angle[0]), rng.normal(size=n)])
    v = np.column_stack([r[1] * np.cos(angle[1]), r[1] * np.sin(angle[1]), rng.normal(size=n)])
    return x, v


class VerificationSuite:
    """
    Runs the selected criteria for one config

    Args:
        config: run config whose verify section sets every suite's scale
        output: created output directory for the report and suite runs
        metrics: collector for steps and field rebuilds
    """

    def __init__(self, config: RunConfig, output: OutputDirectory, metrics: Optional[MetricsCollector] = None):
        self.config = config
        self.suites = config.verify
        self.output = output
        self.metrics = metrics or MetricsCollector()
        self.run_logger = RunLogger(config.config_hash, name="rvp.verify")
        self.workers = config.runtime.threads
        self._conservation: Dict[float, Dict[str, Any]] = {}
        self.checks: Dict[Criterion, Callable[[], Tuple[bool, Dict[str, Any]]]] = {
            Criterion.BACKEND_AGREEMENT: self.check_backend_agreement,
            Criterion.POINTWISE_BOUND: self.check_pointwise_bound,
            Criterion.CONSERVATION_ORDER: self.check_conservation_order,
            Criterion.ELL_TRANSPORT: self.check_ell_transport,
            Criterion.MONOTONE_QUANTITY: self.check_monotone_quantity,
            Criterion.WEIGHT_MECHANICS: self.check_weight_mechanics,
            Criterion.CUTOFF_EXACTNESS: self.check_cutoff_exactness,
            Criterion.LOCALIZED_FIELDS: self.check_localized_fields,
            Criterion.SPACETIME_FUNCTIONAL: self.check_spacetime_functional,
            Criterion.DETERMINISM: self.check_determinism,
        }

    def _rng(self, offset: int) -> np.random.Generator:
        return np.random.default_rng([self.suites.seed, offset])

    def _sample(self, kind: ScenarioKind, n: int, offset: int) -> Ensemble:
        return sample_initial_ensemble(Scenario.create(kind), n, 1.0, self.suites.seed + offset)

    def _integrate(self, ensemble: Ensemble, integrator: IntegratorConfig, t_end: float,
                   params: Optional[FunctionalParams] = None) -> Tuple[DiagnosticsEngine, StepMonitor, Ensemble]:
        diagnostics = self.config.diagnostics
        engine = DiagnosticsEngine(params or diagnostics.functional_params())
        monitor = StepMonitor(diagnostics.monitor.monotone_band, diagnostics.monitor.speed_band)
        result = integrate(
            ensemble, integrator, t_end,
            schedule=record_times(ensemble.t, t_end, diagnostics.interval),
            diagnostics=engine, monitor=monitor, metrics=self.metrics,
        )
        return engine, monitor, result.ensemble

    def run(self, criteria: Optional[List[Criterion]] = None, sweep: bool = False) -> VerifyReport:
        configure_threads(self.workers)
        report = VerifyReport(self.config.config_hash)
        for criterion in criteria or self.suites.criteria:
            report.results.append(self.evaluate(Criterion(criterion)))
        if sweep:
            report.sweep = self.convergence_sweep()
            self._write_sweep(report.sweep)
        for result in report.results:
            self.output.write_json(f"criteria/{result.criterion.value}.json", result.to_dict())
        self.output.write_json(REPORT_NAME, report.to_dict())
        return report

    def evaluate(self, criterion: Criterion) -> CriterionResult:
        started = time.perf_counter()
        passed, details = self.checks[criterion]()
        seconds = time.perf_counter() - started
        self.run_logger.criterion_evaluated(criterion.value, passed, seconds)
        return CriterionResult(criterion, bool(passed), seconds, details)

    # ------------------------------------------------------------------
    # field backends

    @timing_decorator()
    def check_backend_agreement(self) -> Tuple[bool, Dict[str, Any]]:
        suite = self.suites.backend
        ensemble = self._sample(ScenarioKind.RADIAL_GAUSSIAN, suite.particles, 1)
        rng = self._rng(1)
        queries = random_queries(rng, suite.queries, suite.r_min, suite.r_max)

        support = float(np.max(np.linalg.norm(ensemble.x, axis=1)))
        profile = build_radial_profile(ensemble, suite.profile_bins, support)
        radial = radial_field(profile, queries)

        spec = suite.grid.spec()
        grid = grid_poisson_solve(grid_deposit(ensemble, spec, workers=self.workers), workers=self.workers)
        gridded = interpolate_field(grid, queries)

        direct = direct_sum_field(ensemble, queries)
        scale = np.linalg.norm(direct, axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            noise_floor = np.where(scale > 0, suite.noise_sigmas * direct_sum_noise(ensemble, queries) / scale, 0.0)

        pairs = {
            "radial_vs_direct": backend_agreement(radial, direct, suite.radial_tolerance, noise_floor),
            "grid_vs_direct": backend_agreement(gridded, direct, suite.grid_tolerance, noise_floor),
            "radial_vs_grid": backend_agreement(radial, gridded, suite.grid_tolerance, noise_floor),
        }
        averaged = rotation_averaged_direct_field(ensemble, queries, suite.rotations, rng)

        passed = all(pair["passed"] for pair in pairs.values())
        return passed, {
            "particles": suite.particles,
            "queries": suite.queries,
            "query_radii": [suite.r_min, suite.r_max],
            **pairs,
            "noise_sigmas": suite.noise_sigmas,
            "max_noise_floor": float(np.max(noise_floor)) if noise_floor.size else 0.0,
            "rotations": suite.rotations,
            "radial_vs_rotation_averaged_direct": max_relative_error(radial, averaged),
            "grid": spec.to_dict(),
            "out_of_box_count": grid.out_of_box_count,
        }

    @timing_decorator()
    def check_pointwise_bound(self) -> Tuple[bool, Dict[str, Any]]:
        suite = self.suites.backend
        ensemble = self._sample(ScenarioKind.RADIAL_GAUSSIAN, suite.particles, 1)
        rng = self._rng(1)
        queries = random_queries(rng, suite.queries, suite.r_min, suite.r_max)

        support = float(np.max(np.linalg.norm(ensemble.x, axis=1)))
        exterior = random_queries(rng, suite.queries, EXTERIOR_FACTOR * support, 2.0 * EXTERIOR_FACTOR * support)
        profile = build_radial_profile(ensemble, suite.profile_bins, support)
        mass = ensemble.total_mass

        def bound(points: np.ndarray) -> np.ndarray:
            return mass / (4.0 * math.pi * np.sum(points * points, axis=1))

        inside = np.linalg.norm(radial_field(profile, queries), axis=1)
        excess = float(np.max(inside - bound(queries)))
        outside = np.linalg.norm(radial_field(profile, exterior), axis=1)
        exterior_error = float(np.max(np.abs(outside - bound(exterior)) / bound(exterior)))

        passed = excess <= BOUND_SLACK and exterior_error <= EXTERIOR_TOLERANCE
        return passed, {
            "support_radius": support,
            "max_excess": excess,
            "slack": BOUND_SLACK,
            "exterior_relative_error": exterior_error,
            "exterior_tolerance": EXTERIOR_TOLERANCE,
        }

    # ------------------------------------------------------------------
    # pusher

    def _conservation_run(self, dt: float) -> Dict[str, Any]:
        """Radial run at one step size; cached so criteria and the sweep share runs"""
        if dt in self._conservation:
            return self._conservation[dt]
        suite = self.suites.conservation
        ensemble = self._sample(ScenarioKind.RADIAL_GAUSSIAN, suite.particles, 3)
        integrator = IntegratorConfig(dt=dt, field_mode=FieldMode.RADIAL, profile_bins=0, workers=self.workers)
        engine, monitor, _ = self._integrate(ensemble, integrator, suite.t_end)
        l0 = np.linalg.norm(angular_momentum(ensemble.x, ensemble.v), axis=1)
        run = {
            "dt": dt,
            "steps": uniform_steps(0.0, suite.t_end, dt),
            "energy_drift": relative_drift(engine.series.column("total_energy")),
            "angular_momentum_drift": monitor.max_angular_momentum_drift / max(1.0, float(np.max(l0))),
            "monotone_violations": monitor.monotone_violations,
            "max_monotone_decrease": monitor.max_monotone_decrease,
        }
        self._conservation[dt] = run
        logger.info(f"Conservation run dt={dt:g}: energy drift {run['energy_drift']:.3e}")
        return run

    @timing_decorator()
    def check_conservation_order(self) -> Tuple[bool, Dict[str, Any]]:
        suite = self.suites.conservation
        coarse = self._conservation_run(suite.dt)
        fine = self._conservation_run(0.5 * suite.dt)
        ratio = coarse["energy_drift"] / fine["energy_drift"] if fine["energy_drift"] > 0 else math.inf
        rounding = max(coarse["angular_momentum_drift"], fine["angular_momentum_drift"])
        passed = suite.order_min <= ratio <= suite.order_max and rounding <= suite.rounding_tolerance
        return passed, {
            "coarse": coarse,
            "fine": fine,
            "energy_drift_ratio": ratio,
            "ratio_range": [suite.order_min, suite.order_max],
            "observed_order": observed_order(coarse["energy_drift"], fine["energy_drift"]),
            "angular_momentum_drift": rounding,
            "rounding_tolerance": suite.rounding_tolerance,
        }

    @timing_decorator()
    def check_monotone_quantity(self) -> Tuple[bool, Dict[str, Any]]:
        suite = self.suites.conservation
        coarse = self._conservation_run(suite.dt)
        fine = self._conservation_run(0.5 * suite.dt)
        band = self.config.diagnostics.monitor.monotone_band

        def within_band(run: Dict[str, Any]) -> bool:
            return run["max_monotone_decrease"] <= band * run["dt"] ** 2

        passed = fine["monotone_violations"] == 0 and within_band(fine)
        return passed, {
            "band": band,
            "coarse_violations": coarse["monotone_violations"],
            "fine_violations": fine["monotone_violations"],
            "coarse_max_decrease": coarse["max_monotone_decrease"],
            "fine_max_decrease": fine["max_monotone_decrease"],
            "coarse_within_band": within_band(coarse),
            "fine_within_band": within_band(fine),
        }

    @timing_decorator()
    def check_ell_transport(self) -> Tuple[bool, Dict[str, Any]]:
        suite = self.suites.transport
        ensemble = self._sample(ScenarioKind.CYLINDRICAL_TORUS, suite.particles, 4)
        integrator = IntegratorConfig(dt=suite.dt, field_mode=FieldMode.PLANAR_RADIAL,
                                      analytic={"line_density": suite.line_density}, workers=self.workers)
        params = self.config.diagnostics.functional_params()
        _, monitor, final = self._integrate(ensemble, integrator, suite.t_end, params)

        j0 = inverse_angular_momentum_moment(ensemble, params.floor, params.inverse_power)
        j1 = inverse_angular_momentum_moment(final, params.floor, params.inverse_power)
        j_drift = abs(j1 - j0) / j0 if j0 > 0 else abs(j1 - j0)
        passed = monitor.max_relative_ell_drift <= suite.ell_tolerance and j_drift <= suite.j_tolerance
        return passed, {
            "max_relative_ell_drift": monitor.max_relative_ell_drift,
            "ell_tolerance": suite.ell_tolerance,
            "J_initial": j0,
            "J_final": j1,
            "J_relative_drift": j_drift,
            "J_tolerance": suite.j_tolerance,
        }

    # ------------------------------------------------------------------
    # functionals

    @timing_decorator()
    def check_weight_mechanics(self) -> Tuple[bool, Dict[str, Any]]:
        suite = self.suites.weights
        rng = self._rng(6)
        details: Dict[str, Any] = {}
        passed = True
        h = 1e-6
        for mu in (1, -1):
            params = WeightParams(mu=mu, Mt=suite.m_t, eps_star=suite.eps_star)
            x, v = planar_samples(rng, suite.samples)

            a, b = x[:, :2], v[:, :2]
            u = np.einsum("ij,ij->i", a, b) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
            s = mu * (u + 0.5)
            smooth = (np.abs(u) > 0.01) & (np.abs(s) > 1e-3) & (np.abs(s - 1.0) > 1e-3)
            xs, vs = x[smooth], v[smooth]
            _, gradient = omega_weight(xs, vs, params)
            worst = 0.0
            for d in range(2):
                step = np.zeros(3)
                step[d] = h
                plus, _ = omega_weight(xs + step, vs, params)
                minus, _ = omega_weight(xs - step, vs, params)
                difference = (plus - minus) / (2 * h)
                excess = np.abs(gradient[:, d] - difference) - suite.gradient_tolerance * np.abs(difference)
                worst = max(worst, float(np.max(excess)) if excess.size else 0.0)
            gradient_ok = worst <= 1e-8

            positivity = weight_positivity_check(x, v, params, tolerance=suite.positivity_tolerance)

            value, _ = omega_weight(x, v, params)
            rotation_error = 0.0
            for angle in rng.uniform(0.0, 2.0 * math.pi, size=3):
                rotated, _ = omega_weight(rotate_planar(x, angle), rotate_planar(v, angle), params)
                rotation_error = max(rotation_error, float(np.max(np.abs(rotated - value))))
            rotation_ok = rotation_error <= suite.rotation_tolerance

            passed = passed and gradient_ok and positivity.passed and rotation_ok
            details[f"mu={mu}"] = {
                "gradient_samples": int(smooth.sum()),
                "gradient_excess": worst,
                "positivity": positivity.to_dict(),
                "rotation_error": rotation_error,
                "rotation_tolerance": suite.rotation_tolerance,
            }
        return passed, details

    @timing_decorator()
    def check_cutoff_exactness(self) -> Tuple[bool, Dict[str, Any]]:
        suite = self.suites.cutoffs
        rng = self._rng(7)
        exact = {
            "phi(0.5)": cutoff_phi(0.5) == 0.125,
            "phi(1.5)": cutoff_phi(1.5) == 1.875,
            "phi(x>=2)": bool(np.all(cutoff_phi(np.array([2.0, 2.5, 10.0, 1e300])) == 2.0)),
            "phi(x<=0)": bool(np.all(cutoff_phi(np.array([0.0, -0.5, -1e300])) == 0.0)),
        }
        levels = rng.integers(-30, 31, size=suite.samples)
        points = rng.uniform(-4.0, 4.0, size=suite.samples) * np.ldexp(1.0, levels)
        scaled = np.array([cutoff_phi(p, int(l)) for p, l in zip(points, levels)])
        reference = cutoff_phi(np.ldexp(points, -levels))
        mismatches = int(np.count_nonzero(scaled != reference))
        passed = all(exact.values()) and mismatches == 0
        return passed, {"exact_values": exact, "scaling_samples": suite.samples, "scaling_mismatches": mismatches}

    @timing_decorator()
    def check_spacetime_functional(self) -> Tuple[bool, Dict[str, Any]]:
        suite = self.suites.spacetime
        ensemble = self._sample(ScenarioKind.CYLINDRICAL_TORUS, suite.particles, 9)
        integrator = IntegratorConfig(dt=suite.dt, field_mode=FieldMode.DIRECT,
                                      softening=self.config.integrator.softening, workers=self.workers)
        finals, monotone, finite = [], True, True
        for delta0 in suite.delta0:
            params = self.config.diagnostics.functional_params(delta0=delta0)
            engine, _, _ = self._integrate(ensemble, integrator, suite.t_end, params)
            a_cum = engine.series.column("A_cum")
            finite = finite and bool(np.all(np.isfinite(a_cum)))
            monotone = monotone and bool(np.all(np.diff(a_cum) >= 0))
            finals.append(float(a_cum[-1]))
        reference = max(abs(finals[0]), abs(finals[1]))
        spread = abs(finals[0] - finals[1]) / reference if reference > 0 else 0.0
        passed = finite and monotone and spread <= suite.tolerance
        return passed, {
            "delta0": list(suite.delta0),
            "A_cum": finals,
            "finite": finite,
            "nondecreasing": monotone,
            "relative_spread": spread,
            "tolerance": suite.tolerance,
        }

    # ------------------------------------------------------------------
    # frequency localization

    @timing_decorator()
    def check_localized_fields(self) -> Tuple[bool, Dict[str, Any]]:
        suite = self.suites.localization
        section = self.config.localization
        spec = section.grid.spec()
        band = resolvable_band(spec)
        k_min = band[0] if section.k_min is None else section.k_min
        k_max = band[1] if section.k_max is None else section.k_max
        check_resolvable(spec, k_min)
        check_resolvable(spec, k_max)
        ks = list(range(k_min, k_max + 1))

        ensemble = sample_initial_ensemble(self.config.scenario.build(), suite.particles, 1.0, self.suites.seed + 8)
        speed = np.linalg.norm(ensemble.v, axis=1)
        j2_max = section.j2_max if section.j2_max is not None else top_momentum_shell(float(speed.max()))
        partition = velocity_partition_residual(ensemble, spec, j2_max, workers=self.workers)
        reconstruction = shell_reconstruction_residual(grid_deposit(ensemble, spec, workers=self.workers),
                                                       (k_min, k_max), workers=self.workers)

        params = self.config.diagnostics.functional_params()
        tracker = MomentTracker(params.n_r, params.n_c)
        tracker.observe(ensemble)
        bins = list(momentum_bins(j2_max))
        stats = {b: bin_statistics(ensemble, *b) for b in bins}
        bounds = verify_localized_bounds(
            iter_localized_fields(ensemble, spec, bins, ks, workers=self.workers),
            stats, tracker.surrogates(0.0), section.constant, section.pointwise_constant, section.sample_radii,
        )

        envelopes = [kernel_envelope(spec, k, workers=self.workers) for k in ks]
        measured = [e.decay_exponent for e in envelopes if math.isfinite(e.decay_exponent)]
        decay_ok = bool(measured) and min(measured) >= suite.kernel_decay_min

        passed = (partition <= suite.partition_tolerance and reconstruction <= suite.reconstruction_tolerance
                  and bounds.passed and decay_ok)
        return passed, {
            "grid": spec.to_dict(),
            "band": [k_min, k_max],
            "j2_max": j2_max,
            "partition_residual": partition,
            "partition_tolerance": suite.partition_tolerance,
            "reconstruction_residual": reconstruction,
            "reconstruction_tolerance": suite.reconstruction_tolerance,
            "bounds_passed": bounds.passed,
            "sup_constant": bounds.sup_constant.to_dict(),
            "pointwise_constant": bounds.pointwise_constant.to_dict(),
            "failures": [i.to_dict() for i in bounds.failures],
            "kernels": [e.to_dict() for e in envelopes],
            "kernel_decay_min": suite.kernel_decay_min,
            "measured_decay_min": min(measured) if measured else None,
            "kernel_decay_passed": decay_ok,
            "bump_profile": BUMP_PROFILE.value,
        }

    # ------------------------------------------------------------------
    # harness

    def _determinism_config(self, name: str, threads: int, every_steps: int = 0) -> RunConfig:
        suite = self.suites.determinism
        return self.config.with_overrides({
            "particles": {"count": suite.particles},
            "integrator": {"dt": suite.dt, "t_end": suite.t_end},
            "localization": {"enabled": False},
            "checkpoint": {"every_steps": every_steps},
            "output": {"directory": str(self.output.path / "determinism" / name)},
            "runtime": {"threads": threads, "progress": False},
        })

    @timing_decorator()
    def check_determinism(self) -> Tuple[bool, Dict[str, Any]]:
        suite = self.suites.determinism
        first, second = suite.threads
        n_steps = uniform_steps(0.0, suite.t_end, suite.dt)
        every = max(1, n_steps // 2)

        runs = {
            "repeat_a": self._determinism_config("repeat_a", first),
            "repeat_b": self._determinism_config("repeat_b", first),
            "threads": self._determinism_config("threads", second),
            "checkpointed": self._determinism_config("checkpointed", first, every_steps=every),
        }
        directories = {name: SimulationRun(cfg, "run", self.metrics).run().directory for name, cfg in runs.items()}

        mid = sorted((directories["checkpointed"] / "checkpoints").glob("step_*.npz"))
        details: Dict[str, Any] = {"steps": n_steps, "checkpoint_every": every, "checkpoints": len(mid)}
        if mid:
            resumed = resume_simulation(mid[0], {"output": {"directory": str(self.output.path / "determinism" / "resumed")}},
                                        metrics=self.metrics)
            directories["resumed"] = resumed.directory

        def same(name: str, artifact: str) -> bool:
            return (directories[name] / artifact).read_bytes() == (directories["repeat_a"] / artifact).read_bytes()

        comparisons = {}
        for name in directories:
            if name == "repeat_a":
                continue
            for artifact in (DIAGNOSTICS_CSV, TRAJECTORY_CSV):
                if (directories["repeat_a"] / artifact).is_file():
                    comparisons[f"{name}/{artifact}"] = same(name, artifact)
        details["identical"] = comparisons
        passed = bool(mid) and "resumed" in directories and all(comparisons.values())
        return passed, details

    # ------------------------------------------------------------------
    # dt-halving sweep

    def convergence_sweep(self) -> List[Dict[str, Any]]:
        """Conservation runs at dt, dt/2, ... with the drift ratio and observed order per level"""
        suite = self.suites.conservation
        rows: List[Dict[str, Any]] = []
        for level in range(self.suites.sweep.levels):
            run = self._conservation_run(suite.dt / 2 ** level)
            row = {
                "level": level,
                "dt": run["dt"],
                "steps": run["steps"],
                "energy_drift": run["energy_drift"],
                "angular_momentum_drift": run["angular_momentum_drift"],
                "monotone_violations": run["monotone_violations"],
                "drift_ratio": math.nan,
                "observed_order": math.nan,
            }
            if rows:
                previous = rows[-1]["energy_drift"]
                row["drift_ratio"] = previous / run["energy_drift"] if run["energy_drift"] > 0 else math.inf
                row["observed_order"] = observed_order(previous, run["energy_drift"])
            rows.append(row)
            logger.info(f"Sweep level {level}: dt={run['dt']:g} order {row['observed_order']:.3f}")
        return rows

    def _write_sweep(self, rows: List[Dict[str, Any]]) -> Path:
        path = self.output.file(SWEEP_NAME)
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(SWEEP_COLUMNS)
            for row in rows:
                writer.writerow([row[c] if isinstance(row[c], int) else f"{row[c]:.17g}" for c in SWEEP_COLUMNS])
        return path


def verify(config: RunConfig, sweep: bool = False, criteria: Optional[List[Criterion]] = None,
           metrics: Optional[MetricsCollector] = None) -> VerifyReport:
    """
    Run the acceptance suites into config.output.directory

    Args:
        config: run config; its verify section sets the scale of every suite
        sweep: also emit the dt-halving convergence table
        criteria: subset to run (default: verify.criteria)
        metrics: collector shared by the suite runs

    Returns:
        VerifyReport; the manifest status is verification-failed when any
        criterion fails
    """
    metrics = metrics or MetricsCollector()
    output = OutputDirectory(config.output.directory).create()
    suite = VerificationSuite(config, output, metrics)
    started = time.perf_counter()
    report = suite.run(criteria, sweep)

    status = "completed" if report.passed else "verification-failed"
    summary = {
        "passed": report.passed,
        "failures": report.failures,
        "criteria": {r.criterion.value: r.passed for r in report.results},
        "sweep_levels": len(report.sweep),
    }
    metrics.write_textfile(output.file("metrics.prom"))
    output.write_manifest("verify", config.to_dict(), config.config_hash, status, summary, metrics.get_metrics())
    suite.run_logger.run_finished("verify", time.perf_counter() - started)
    return report
