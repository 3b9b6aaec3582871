"""
Run configuration

A run config is a YAML document with one mapping per section. Sections are
validated by pydantic models that reject unknown keys; every failure is
reported as a ConfigParseError naming the dotted key and its line.
"""

import logging
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError as PydanticValidationError, model_validator
from typing_extensions import Annotated

from field_solvers.grid import GridSpec
from functionals.engine import FunctionalParams
from kinetics.exceptions import ConfigParseError, RVPException
from kinetics.scenarios import Scenario, ScenarioKind
from pusher.evaluators import FieldMode
from pusher.integrator import DEFAULT_SOFTENING, IntegratorConfig
from utils.config_loader import config_hash, deep_merge, load_config, prepare_config

logger = logging.getLogger(__name__)

PositiveFloat = Annotated[float, Field(gt=0, allow_inf_nan=False)]
NonNegativeFloat = Annotated[float, Field(ge=0, allow_inf_nan=False)]
PositiveInt = Annotated[int, Field(ge=1)]
NonNegativeInt = Annotated[int, Field(ge=0)]

# sections that change where and how a run reports, not what it computes
UNHASHED_SECTIONS = {"output", "runtime", "logging"}


class Criterion(str, Enum):
    """Acceptance criteria run by `verify`"""
    BACKEND_AGREEMENT = "backend_agreement"
    POINTWISE_BOUND = "pointwise_bound"
    CONSERVATION_ORDER = "conservation_order"
    ELL_TRANSPORT = "ell_transport"
    MONOTONE_QUANTITY = "monotone_quantity"
    WEIGHT_MECHANICS = "weight_mechanics"
    CUTOFF_EXACTNESS = "cutoff_exactness"
    LOCALIZED_FIELDS = "localized_fields"
    SPACETIME_FUNCTIONAL = "spacetime_functional"
    DETERMINISM = "determinism"


class Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GridSection(Section):
    n: Annotated[int, Field(ge=4)] = 64
    half_width: PositiveFloat = 4.0

    def spec(self) -> GridSpec:
        return GridSpec.centered(self.n, self.half_width)


class ScenarioSection(Section):
    kind: ScenarioKind = ScenarioKind.RADIAL_GAUSSIAN
    parameters: Dict[str, float] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _known_parameters(self) -> "ScenarioSection":
        try:
            self.build()
        except RVPException as e:
            raise ValueError(e.message)
        return self

    def build(self) -> Scenario:
        return Scenario.create(self.kind, **self.parameters)


class ParticlesSection(Section):
    count: PositiveInt
    seed: NonNegativeInt = 0
    total_mass: PositiveFloat = 1.0


class AnalyticSection(Section):
    """Parameters of the analytic field modes"""
    charge: float = 1.0
    line_density: float = 1.0
    vector: Tuple[float, float, float] = (0.0, 0.0, 0.0)


class IntegratorSection(Section):
    dt: PositiveFloat
    t_end: PositiveFloat
    field_mode: FieldMode = FieldMode.RADIAL
    field_refresh: PositiveInt = 1
    softening: NonNegativeFloat = DEFAULT_SOFTENING
    profile_bins: NonNegativeInt = 0
    r_max: PositiveFloat = 10.0
    grid: Optional[GridSection] = None
    analytic: AnalyticSection = Field(default_factory=AnalyticSection)

    @model_validator(mode="after")
    def _grid_for_grid_mode(self) -> "IntegratorSection":
        if self.field_mode is FieldMode.GRID and self.grid is None:
            raise ValueError("field_mode 'grid' needs an integrator.grid section")
        return self

    def integrator_config(self, workers: int = 1, progress: bool = False, dt: Optional[float] = None) -> IntegratorConfig:
        return IntegratorConfig(
            dt=self.dt if dt is None else dt,
            field_mode=self.field_mode,
            field_refresh=self.field_refresh,
            softening=self.softening,
            grid=self.grid.spec() if self.grid is not None else None,
            profile_bins=self.profile_bins,
            r_max=self.r_max,
            workers=workers,
            analytic=self.analytic.model_dump(),
            progress=progress,
        )


class MonitorSection(Section):
    monotone_band: NonNegativeFloat = 1.0
    speed_band: NonNegativeFloat = 1.0


class DiagnosticsSection(Section):
    interval: PositiveFloat = 0.01
    moment_orders: List[NonNegativeFloat] = Field(default_factory=lambda: [0.0, 1.0, 2.0], min_length=1)
    eps_star: Annotated[float, Field(ge=0, lt=0.5)] = 0.01
    delta0: NonNegativeFloat = 1e-3
    floor: PositiveFloat = 0.1
    inverse_power: PositiveFloat = 13.0
    n_r: Annotated[int, Field(ge=2)] = 10
    n_c: Annotated[int, Field(ge=2)] = 20
    delta: Annotated[float, Field(gt=0, lt=0.01)] = 1e-3
    monitor: MonitorSection = Field(default_factory=MonitorSection)

    @model_validator(mode="after")
    def _distinct_orders(self) -> "DiagnosticsSection":
        if len(set(self.moment_orders)) != len(self.moment_orders):
            raise ValueError("moment_orders must be distinct")
        return self

    def functional_params(self, delta0: Optional[float] = None) -> FunctionalParams:
        return FunctionalParams(
            moment_orders=tuple(self.moment_orders),
            eps_star=self.eps_star,
            delta0=self.delta0 if delta0 is None else delta0,
            floor=self.floor,
            inverse_power=self.inverse_power,
            n_r=self.n_r,
            n_c=self.n_c,
            delta=self.delta,
        )


class TrajectorySection(Section):
    count: NonNegativeInt = 16
    stride: PositiveInt = 1
    majority_threshold: Optional[PositiveFloat] = None


class LocalizationSection(Section):
    """Localized fields taken at every diagnostics record"""
    enabled: bool = False
    grid: GridSection = Field(default_factory=GridSection)
    k_min: Optional[int] = None
    k_max: Optional[int] = None
    j2_max: Optional[NonNegativeInt] = None
    constant: Optional[PositiveFloat] = None
    pointwise_constant: Optional[PositiveFloat] = None
    sample_radii: List[PositiveFloat] = Field(default_factory=lambda: [0.5, 1.0, 2.0], min_length=1)
    characteristic_indices: List[Tuple[int, NonNegativeInt, NonNegativeInt]] = Field(default_factory=list)
    max_gap: Optional[PositiveFloat] = None

    @model_validator(mode="after")
    def _ordered_range(self) -> "LocalizationSection":
        if self.k_min is not None and self.k_max is not None and self.k_min > self.k_max:
            raise ValueError("k_min must not exceed k_max")
        return self


class CheckpointSection(Section):
    every_steps: NonNegativeInt = 0


class OutputSection(Section):
    directory: str = "runs/default"


class RuntimeSection(Section):
    threads: PositiveInt = 1
    progress: bool = False


class LoggingSection(Section):
    level: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"] = "INFO"
    format: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    file: Optional[str] = None
    structured: bool = False
    max_file_size: PositiveInt = 10 * 1024 * 1024
    backup_count: NonNegativeInt = 5
    module_levels: Dict[str, str] = Field(default_factory=dict)


class BackendSuite(Section):
    particles: PositiveInt = 100_000
    queries: PositiveInt = 100
    r_min: PositiveFloat = 0.1
    r_max: PositiveFloat = 3.0
    rotations: PositiveInt = 16
    # pairwise gates widen to noise_sigmas sampling standard errors where those exceed the tolerance
    noise_sigmas: NonNegativeFloat = 3.0
    profile_bins: PositiveInt = 2000
    grid: GridSection = Field(default_factory=lambda: GridSection(n=128, half_width=4.0))
    radial_tolerance: PositiveFloat = 1e-2
    grid_tolerance: PositiveFloat = 2e-2


class ConservationSuite(Section):
    particles: PositiveInt = 10_000
    t_end: PositiveFloat = 1.0
    dt: PositiveFloat = 2e-3
    order_min: PositiveFloat = 3.5
    order_max: PositiveFloat = 4.5
    rounding_tolerance: PositiveFloat = 1e-12


class TransportSuite(Section):
    particles: PositiveInt = 2000
    t_end: PositiveFloat = 1.0
    dt: PositiveFloat = 1e-3
    line_density: PositiveFloat = 1.0
    ell_tolerance: PositiveFloat = 1e-6
    j_tolerance: PositiveFloat = 1e-4


class WeightSuite(Section):
    samples: PositiveInt = 100_000
    m_t: NonNegativeInt = 1
    eps_star: Annotated[float, Field(gt=0, lt=0.5)] = 0.01
    gradient_tolerance: PositiveFloat = 1e-6
    positivity_tolerance: PositiveFloat = 1e-10
    rotation_tolerance: PositiveFloat = 1e-12


class CutoffSuite(Section):
    samples: PositiveInt = 10_000


class LocalizationSuite(Section):
    particles: PositiveInt = 20_000
    partition_tolerance: PositiveFloat = 1e-10
    reconstruction_tolerance: PositiveFloat = 1e-6
    kernel_decay_min: PositiveFloat = 6.0


class SpacetimeSuite(Section):
    particles: PositiveInt = 2000
    t_end: PositiveFloat = 1.0
    dt: PositiveFloat = 1e-2
    delta0: Tuple[PositiveFloat, PositiveFloat] = (1e-3, 1e-4)
    tolerance: PositiveFloat = 0.05


class DeterminismSuite(Section):
    particles: PositiveInt = 500
    t_end: PositiveFloat = 0.05
    dt: PositiveFloat = 1e-2
    threads: Tuple[PositiveInt, PositiveInt] = (1, 2)


class SweepSection(Section):
    levels: Annotated[int, Field(ge=2)] = 3


class VerifySection(Section):
    criteria: List[Criterion] = Field(default_factory=lambda: list(Criterion))
    seed: NonNegativeInt = 2024
    backend: BackendSuite = Field(default_factory=BackendSuite)
    conservation: ConservationSuite = Field(default_factory=ConservationSuite)
    transport: TransportSuite = Field(default_factory=TransportSuite)
    weights: WeightSuite = Field(default_factory=WeightSuite)
    cutoffs: CutoffSuite = Field(default_factory=CutoffSuite)
    localization: LocalizationSuite = Field(default_factory=LocalizationSuite)
    spacetime: SpacetimeSuite = Field(default_factory=SpacetimeSuite)
    determinism: DeterminismSuite = Field(default_factory=DeterminismSuite)
    sweep: SweepSection = Field(default_factory=SweepSection)


class RunConfig(Section):
    """Validated run configuration"""
    scenario: ScenarioSection = Field(default_factory=ScenarioSection)
    particles: ParticlesSection
    integrator: IntegratorSection
    diagnostics: DiagnosticsSection = Field(default_factory=DiagnosticsSection)
    trajectory: TrajectorySection = Field(default_factory=TrajectorySection)
    localization: LocalizationSection = Field(default_factory=LocalizationSection)
    checkpoint: CheckpointSection = Field(default_factory=CheckpointSection)
    output: OutputSection = Field(default_factory=OutputSection)
    runtime: RuntimeSection = Field(default_factory=RuntimeSection)
    logging: LoggingSection = Field(default_factory=LoggingSection)
    verify: VerifySection = Field(default_factory=VerifySection)

    @property
    def config_hash(self) -> str:
        """sha256 of the canonical content; output, runtime and logging excluded"""
        return config_hash(self.hashed_content())

    def hashed_content(self) -> Dict[str, Any]:
        return self.model_dump(mode="json", exclude=UNHASHED_SECTIONS)

    def to_dict(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")

    def with_overrides(self, overrides: Dict[str, Any]) -> "RunConfig":
        """Copy with a nested mapping of overrides merged in and revalidated"""
        return RunConfig.model_validate(deep_merge(self.to_dict(), overrides))


def _dotted(loc: Tuple[Any, ...]) -> str:
    return ".".join(str(part) for part in loc) or "<document>"


def _line_of(key: str, lines: Dict[str, int]) -> Optional[int]:
    """Line of the key, or of its closest written ancestor"""
    parts = key.split(".")
    while parts:
        line = lines.get(".".join(parts))
        if line is not None:
            return line
        parts.pop()
    return None


def _parse_error(error: PydanticValidationError, lines: Dict[str, int]) -> ConfigParseError:
    first = error.errors()[0]
    key = _dotted(tuple(first["loc"]))
    message = first["msg"]
    if first["type"] == "extra_forbidden":
        message = "unknown key"
    return ConfigParseError(key, message, _line_of(key, lines))


def _validate(data: Dict[str, Any], lines: Dict[str, int], source: str) -> RunConfig:
    try:
        config = RunConfig.model_validate(data)
    except PydanticValidationError as e:
        raise _parse_error(e, lines) from None
    logger.debug(f"Validated {source}: hash {config.config_hash[:12]}")
    return config


def parse_config(text: str, overrides: Optional[Dict[str, Any]] = None,
                 source: str = "<config>") -> RunConfig:
    """
    Parse and validate a YAML run config

    Args:
        text: YAML document
        overrides: nested mapping merged over the document before validation
        source: name used in log messages

    Returns:
        RunConfig with documented defaults filled

    Raises:
        ConfigParseError: malformed YAML, unknown key, type mismatch or value
            out of range; carries the dotted key and line number
    """
    data, lines = prepare_config(text, overrides, source)
    return _validate(data, lines, source)


def load_run_config(path: Union[str, Path], overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """parse_config on a file"""
    data, lines = load_config(path, overrides)
    return _validate(data, lines, str(path))
