"""
Checks of localized fields against their bounds and reconstructions

The sup norm of E_{k;j1,j2} is compared with

    min( 2^(-k + 2 j1 + j2) f_max,  2^(2k - j2) energy,  2^(2k - n_c j2) M~_c )

where f_max and energy are the largest distribution value and the energy
sum(w <v>) of the bin, and M~_c is the enlarged moment of order n_c. At
off-axis points the field is compared with

    1 + min( 2^(j1 + eps M_t) / |x_planar|^(1/2),  2^(k - j2 + eps M_t) / |x_planar| )

Both comparisons use one constant per family: frozen from the config, or
fitted as the largest observed ratio.
"""

import csv
import json
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from kinetics.exceptions import ValidationError
from kinetics.particles import Ensemble
from field_solvers.grid import FieldGrid, GridSpec, grid_deposit
from functionals.surrogates import MomentSurrogates
from .fields import BinStats, LocalizedField, band_limited_field, localized_fields, velocity_bin
from .shells import DyadicIndex, IndexClass, classify_index, momentum_bins

logger = logging.getLogger(__name__)

RATIO_TOLERANCE = 1e-12
DEFAULT_SAMPLE_RADII = (0.5, 1.0, 2.0)
SAMPLE_ANGLES = (0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi)

BOUND_FIELDS = ("k", "j1", "j2", "sup_norm", "bound_value", "ratio", "pass")
CONSTANT_COLUMNS = ("family", "constant", "fitted", "max_ratio", "indices", "passed")
ENTRY_STATE_COLUMNS = (
    "t", "k", "j1", "j2", "mass", "sup_norm", "log2_volume", "log2_energy", "log2_moment",
    "bound_value", "ratio", "pointwise_ratio", "core",
)


def _log2(value: float) -> float:
    return math.log2(value) if value > 0 else -math.inf


def bound_terms(index: DyadicIndex, stats: BinStats, n_c: int, log2_tilde_c: float) -> Tuple[float, float, float]:
    """
    log2 of the three bound terms

    A bin without mass has every term at -inf. A bin with mass but no recorded
    distribution values (f_max = 0) drops the first term (+inf).
    """
    if not stats.mass > 0:
        return (-math.inf, -math.inf, -math.inf)
    k, j1, j2 = index.k, index.j1, index.j2
    volume = -k + 2 * j1 + j2 + _log2(stats.f_max) if stats.f_max > 0 else math.inf
    energy = 2 * k - j2 + _log2(stats.energy)
    moment = 2 * k - n_c * j2 + log2_tilde_c
    return (float(volume), float(energy), float(moment))


def pointwise_bound(index: DyadicIndex, radius: Any, m_t: int, epsilon: float) -> np.ndarray:
    """1 + min(2^(j1 + eps M_t) |x_planar|^-1/2, 2^(k - j2 + eps M_t) |x_planar|^-1)"""
    radius = np.asarray(radius, dtype=np.float64)
    em = epsilon * m_t
    near = 2.0 ** (index.j1 + em) / np.sqrt(radius)
    far = 2.0 ** (index.k - index.j2 + em) / radius
    return 1.0 + np.minimum(near, far)


def off_axis_points(radii: Sequence[float] = DEFAULT_SAMPLE_RADII) -> Tuple[np.ndarray, np.ndarray]:
    """Sample points at z = 0 on circles of the given planar radii"""
    points, radius = [], []
    for r in radii:
        if not r > 0:
            raise ValidationError("sample_radii", "planar radii must be positive", r)
        for angle in SAMPLE_ANGLES:
            points.append((r * math.cos(angle), r * math.sin(angle), 0.0))
            radius.append(r)
    return np.asarray(points, dtype=np.float64), np.asarray(radius, dtype=np.float64)


@dataclass
class BoundEntry:
    """One index of the bound report"""
    index: DyadicIndex
    index_class: IndexClass
    t: float
    mass: float
    sup_norm: float
    log2_terms: Tuple[float, float, float]
    bound_value: float
    ratio: float
    pointwise_ratio: float
    passed: bool = True

    def to_dict(self) -> Dict[str, Any]:
        return {
            **self.index.to_dict(),
            "sup_norm": self.sup_norm,
            "bound_value": _finite_or_none(self.bound_value),
            "ratio": _finite_or_none(self.ratio),
            "pass": self.passed,
            "class": self.index_class.value,
            "t": self.t,
            "mass": self.mass,
            "log2_terms": [_finite_or_none(x) for x in self.log2_terms],
            "pointwise_ratio": self.pointwise_ratio,
        }


def _finite_or_none(value: float) -> Optional[float]:
    return float(value) if math.isfinite(value) else None


@dataclass
class ConstantFit:
    """One constant family: frozen or fitted, and how the indices fared"""
    family: str
    constant: float
    fitted: bool
    max_ratio: float
    indices: int
    passed: bool

    def to_dict(self) -> Dict[str, Any]:
        data = {name: getattr(self, name) for name in CONSTANT_COLUMNS}
        data["max_ratio"] = _finite_or_none(self.max_ratio)
        return data


@dataclass
class BoundReport:
    entries: List[BoundEntry]
    sup_constant: ConstantFit
    pointwise_constant: ConstantFit
    slopes: List[Dict[str, Any]] = field(default_factory=list)
    m_t: int = 1
    epsilon: float = 0.5

    @property
    def passed(self) -> bool:
        return all(entry.passed for entry in self.entries)

    @property
    def failures(self) -> List[DyadicIndex]:
        return [entry.index for entry in self.entries if not entry.passed]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "m_t": self.m_t,
            "epsilon": self.epsilon,
            "constants": [self.sup_constant.to_dict(), self.pointwise_constant.to_dict()],
            "slopes": self.slopes,
            "indices": [entry.to_dict() for entry in self.entries],
        }

    def write_json(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n")
        logger.debug(f"Wrote bound report for {len(self.entries)} indices to {path}")
        return path

    def write_constants_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(CONSTANT_COLUMNS)
            for fit in (self.sup_constant, self.pointwise_constant):
                writer.writerow([
                    fit.family, f"{fit.constant:.17g}", int(fit.fitted),
                    f"{fit.max_ratio:.17g}", fit.indices, int(fit.passed),
                ])
        return path


class LocalizedBoundVerifier:
    """
    Accumulates bound checks one localized field at a time

    Only the per-index numbers are kept, so fields can be streamed from
    iter_localized_fields.
    """

    def __init__(self, stats: Mapping[Tuple[int, int], BinStats], surrogates: MomentSurrogates,
                 constant: Optional[float] = None, pointwise_constant: Optional[float] = None,
                 sample_radii: Sequence[float] = DEFAULT_SAMPLE_RADII):
        for name, value in (("constant", constant), ("pointwise_constant", pointwise_constant)):
            if value is not None and not value > 0:
                raise ValidationError(name, "frozen constants must be positive", value)
        self.stats = dict(stats)
        self.surrogates = surrogates
        self.constant = constant
        self.pointwise_constant = pointwise_constant
        self.points, self.radius = off_axis_points(sample_radii)
        self.entries: List[BoundEntry] = []

    def update(self, stats: Mapping[Tuple[int, int], BinStats], surrogates: MomentSurrogates):
        """Bin statistics and surrogates for the fields added from now on"""
        self.stats = dict(stats)
        self.surrogates = surrogates

    def add(self, localized: LocalizedField) -> BoundEntry:
        index = localized.index
        stats = self.stats.get(index.bin)
        if stats is None:
            raise ValidationError("stats", "no bin statistics for this index", index.to_dict())
        m_t, eps = self.surrogates.m_t, self.surrogates.epsilon

        terms = bound_terms(index, stats, self.surrogates.n_c, self.surrogates.log2_tilde_c)
        log2_bound = min(terms)
        bound_value = 2.0 ** log2_bound if math.isfinite(log2_bound) else (0.0 if log2_bound < 0 else math.inf)
        sup = float(localized.sup_norm)
        if sup == 0.0:
            ratio = 0.0
        elif bound_value == 0.0:
            ratio = math.inf
        else:
            ratio = sup / bound_value

        values = np.linalg.norm(localized.at(self.points), axis=-1)
        pointwise = float(np.max(values / pointwise_bound(index, self.radius, m_t, eps)))

        entry = BoundEntry(
            index=index,
            index_class=classify_index(index, m_t, eps),
            t=float(localized.t),
            mass=stats.mass,
            sup_norm=sup,
            log2_terms=terms,
            bound_value=bound_value,
            ratio=ratio,
            pointwise_ratio=pointwise,
        )
        self.entries.append(entry)
        return entry

    def _fit(self, family: str, ratios: List[float], frozen: Optional[float]) -> ConstantFit:
        finite = [r for r in ratios if math.isfinite(r)]
        max_ratio = max(ratios) if ratios else 0.0
        if frozen is None:
            constant = max(finite) if finite else 0.0
            fitted = True
        else:
            constant, fitted = float(frozen), False
        limit = constant * (1.0 + RATIO_TOLERANCE)
        return ConstantFit(
            family=family,
            constant=float(constant),
            fitted=fitted,
            max_ratio=float(max_ratio) if math.isfinite(max_ratio) else math.inf,
            indices=len(ratios),
            passed=all(r <= limit for r in ratios),
        )

    def _slopes(self) -> List[Dict[str, Any]]:
        """Least-squares slope in k of log2 sup norm and of log2 bound, per bin"""
        by_bin: Dict[Tuple[int, int], List[BoundEntry]] = defaultdict(list)
        for entry in self.entries:
            by_bin[entry.index.bin].append(entry)
        slopes = []
        for (j1, j2), entries in sorted(by_bin.items()):
            usable = [e for e in entries if e.sup_norm > 0 and 0 < e.bound_value < math.inf]
            ks = sorted({e.index.k for e in usable})
            if len(ks) < 2:
                continue
            k = np.asarray([e.index.k for e in usable], dtype=np.float64)
            measured = np.polyfit(k, np.log2([e.sup_norm for e in usable]), 1)[0]
            bound = np.polyfit(k, np.log2([e.bound_value for e in usable]), 1)[0]
            slopes.append({"j1": j1, "j2": j2, "ks": ks,
                           "measured_slope": float(measured), "bound_slope": float(bound)})
        return slopes

    def state_dict(self) -> Dict[str, np.ndarray]:
        """Accumulated entries as one float table, for checkpoints"""
        rows = [
            [e.t, e.index.k, e.index.j1, e.index.j2, e.mass, e.sup_norm, *e.log2_terms,
             e.bound_value, e.ratio, e.pointwise_ratio, float(e.index_class is IndexClass.CORE)]
            for e in self.entries
        ]
        table = np.asarray(rows, dtype=np.float64).reshape(-1, len(ENTRY_STATE_COLUMNS))
        return {"entries": table}

    def load_state(self, state: Dict[str, Any]):
        table = np.asarray(state["entries"], dtype=np.float64).reshape(-1, len(ENTRY_STATE_COLUMNS))
        self.entries = [
            BoundEntry(
                index=DyadicIndex(int(row[1]), int(row[2]), int(row[3])),
                index_class=IndexClass.CORE if row[12] else IndexClass.COMPLEMENT,
                t=float(row[0]),
                mass=float(row[4]),
                sup_norm=float(row[5]),
                log2_terms=(float(row[6]), float(row[7]), float(row[8])),
                bound_value=float(row[9]),
                ratio=float(row[10]),
                pointwise_ratio=float(row[11]),
            )
            for row in table
        ]

    def report(self) -> BoundReport:
        sup_fit = self._fit("sup_norm", [e.ratio for e in self.entries], self.constant)
        point_fit = self._fit("pointwise", [e.pointwise_ratio for e in self.entries], self.pointwise_constant)
        sup_limit = sup_fit.constant * (1.0 + RATIO_TOLERANCE)
        point_limit = point_fit.constant * (1.0 + RATIO_TOLERANCE)
        for entry in self.entries:
            entry.passed = entry.ratio <= sup_limit and entry.pointwise_ratio <= point_limit
        report = BoundReport(
            entries=sorted(self.entries, key=lambda e: (e.t, e.index)),
            sup_constant=sup_fit,
            pointwise_constant=point_fit,
            slopes=self._slopes(),
            m_t=self.surrogates.m_t,
            epsilon=self.surrogates.epsilon,
        )
        level = logging.INFO if report.passed else logging.WARNING
        logger.log(level, f"Localized bounds: {len(self.entries)} indices, "
                          f"sup constant {sup_fit.constant:.4g}, pointwise constant {point_fit.constant:.4g}, "
                          f"{len(report.failures)} failures")
        return report


def verify_localized_bounds(fields: Iterable[LocalizedField], stats: Mapping[Tuple[int, int], BinStats],
                            surrogates: MomentSurrogates, constant: Optional[float] = None,
                            pointwise_constant: Optional[float] = None,
                            sample_radii: Sequence[float] = DEFAULT_SAMPLE_RADII) -> BoundReport:
    """
    Compare every localized field with its sup-norm and pointwise bounds

    Args:
        fields: localized fields on one grid (a generator is fine)
        stats: BinStats per (j1, j2)
        surrogates: moment surrogates supplying M~_c, n_c, M_t and eps
        constant: frozen sup-norm constant; fitted when None
        pointwise_constant: frozen pointwise constant; fitted when None
        sample_radii: planar radii of the off-axis sample points

    Returns:
        BoundReport with pass/fail per index
    """
    verifier = LocalizedBoundVerifier(stats, surrogates, constant, pointwise_constant, sample_radii)
    spec: Optional[GridSpec] = None
    for localized in fields:
        if spec is None:
            spec = localized.grid.spec
        elif localized.grid.spec != spec:
            raise ValidationError("fields", "localized fields must share one grid", localized.index.to_dict())
        verifier.add(localized)
    return verifier.report()


def velocity_partition_residual(ensemble: Ensemble, spec: GridSpec, j2_max: int, workers: int = 1) -> float:
    """max |sum over bins of the binned deposits - full deposit| / max |full deposit|"""
    full = grid_deposit(ensemble, spec, workers=workers).rho
    total = np.zeros_like(full)
    for j1, j2 in momentum_bins(j2_max):
        total += velocity_bin(ensemble, spec, j1, j2, workers=workers).rho
    scale = float(np.max(np.abs(full)))
    if scale == 0.0:
        return float(np.max(np.abs(total)))
    return float(np.max(np.abs(total - full))) / scale


def shell_reconstruction_residual(density: FieldGrid, band: Tuple[int, int], workers: int = 1) -> float:
    """Relative L2 distance between sum_k E_k over the band and the band-limited field"""
    k_min, k_max = band
    shells = localized_fields(density, list(range(k_min, k_max + 1)), workers=workers)
    summed = np.sum([s.grid.e_field for s in shells], axis=0)
    reference = band_limited_field(density, band, workers=workers).e_field
    norm = float(np.linalg.norm(reference))
    if norm == 0.0:
        return float(np.linalg.norm(summed))
    return float(np.linalg.norm(summed - reference)) / norm
