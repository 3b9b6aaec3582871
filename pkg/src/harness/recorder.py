"""
Diagnostics wiring for a run

RunDiagnostics is what the integrator sees: the functionals engine, plus the
localized-field recorder when localization is enabled. Localized fields are
taken at every diagnostics record.
"""

import logging
from collections import defaultdict
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from field_solvers.grid import FieldGrid
from functionals.engine import DiagnosticsEngine
from functionals.surrogates import MomentSurrogates
from kinetics.exceptions import ConfigurationError
from kinetics.particles import Ensemble
from freq_localization import (
    BoundReport,
    CharacteristicReport,
    DyadicIndex,
    LocalizedBoundVerifier,
    LocalizedField,
    bin_statistics,
    check_resolvable,
    integrated_field_along_characteristic,
    iter_localized_fields,
    momentum_bins,
    resolvable_band,
    top_momentum_shell,
)
from pusher.trajectory import TrajectoryLog
from .config import LocalizationSection

logger = logging.getLogger(__name__)


class LocalizationRecorder:
    """
    Localized fields of every (k, j1, j2) at each record

    Bound checks are folded into a LocalizedBoundVerifier as the fields
    stream past; only the fields of `characteristic_indices` are kept, for the
    integrals along logged characteristics at the end of the run.

    Args:
        section: localization section of the run config
        surrogates: moment surrogates at the start of the run
        workers: threads for deposits and FFTs
    """

    def __init__(self, section: LocalizationSection, surrogates: MomentSurrogates, workers: int = 1):
        self.section = section
        self.spec = section.grid.spec()
        self.workers = workers

        band = resolvable_band(self.spec)
        self.k_min = band[0] if section.k_min is None else section.k_min
        self.k_max = band[1] if section.k_max is None else section.k_max
        check_resolvable(self.spec, self.k_min)
        check_resolvable(self.spec, self.k_max)
        self.ks = list(range(self.k_min, self.k_max + 1))

        self.wanted = [DyadicIndex(*triple) for triple in section.characteristic_indices]
        for index in self.wanted:
            check_resolvable(self.spec, index.k)

        self.verifier = LocalizedBoundVerifier(
            {}, surrogates, section.constant, section.pointwise_constant, section.sample_radii
        )
        self.snapshots: Dict[DyadicIndex, List[LocalizedField]] = defaultdict(list)
        self.records = 0

    def _bins(self, ensemble: Ensemble) -> List[Tuple[int, int]]:
        if self.section.j2_max is not None:
            j2_max = self.section.j2_max
        else:
            speed = np.linalg.norm(ensemble.v, axis=1)
            j2_max = top_momentum_shell(float(speed.max()) if speed.size else 0.0)
        bins = list(momentum_bins(j2_max))
        for index in self.wanted:
            if index.bin not in bins:
                bins.append(index.bin)
        return bins

    def record(self, ensemble: Ensemble, surrogates: MomentSurrogates):
        """Fold the localized fields of the current state into the report"""
        bins = self._bins(ensemble)
        stats = {b: bin_statistics(ensemble, *b) for b in bins}
        self.verifier.update(stats, surrogates)
        wanted = set(self.wanted)
        for localized in iter_localized_fields(ensemble, self.spec, bins, self.ks, t=ensemble.t,
                                               workers=self.workers):
            self.verifier.add(localized)
            if localized.index in wanted:
                self.snapshots[localized.index].append(localized)
        for index in self.wanted:
            if index.k not in self.ks:
                self.snapshots[index].extend(
                    f for f in iter_localized_fields(ensemble, self.spec, [index.bin], [index.k],
                                                     t=ensemble.t, workers=self.workers)
                )
        self.records += 1
        logger.debug(f"Localized {len(bins)} bins x {len(self.ks)} shells at t={ensemble.t:.6g}")

    def finish(self, trajectory: Optional[TrajectoryLog], surrogates: MomentSurrogates
               ) -> Tuple[BoundReport, List[CharacteristicReport]]:
        """Bound report over every record, and the characteristic integrals"""
        report = self.verifier.report()
        characteristics = []
        if self.wanted:
            if trajectory is None or len(trajectory) == 0:
                raise ConfigurationError("trajectory.count",
                                         "characteristic integrals need logged particles")
            for index in self.wanted:
                characteristics.append(integrated_field_along_characteristic(
                    trajectory, self.snapshots[index], index, surrogates.m_t, surrogates.epsilon,
                    max_gap=self.section.max_gap,
                ))
        return report, characteristics

    def to_dict(self, report: BoundReport, characteristics: List[CharacteristicReport]) -> Dict[str, Any]:
        return {
            **report.to_dict(),
            "grid": self.spec.to_dict(),
            "band": [self.k_min, self.k_max],
            "records": self.records,
            "characteristics": [c.to_dict() for c in characteristics],
        }

    def state_dict(self) -> Dict[str, Any]:
        """Verifier entries and kept snapshots, for checkpoints"""
        state: Dict[str, Any] = {"records": self.records, "verifier": self.verifier.state_dict()}
        for i, index in enumerate(self.wanted):
            kept = self.snapshots.get(index, [])
            state[f"snapshots_{i}"] = {
                "t": np.asarray([f.t for f in kept], dtype=np.float64),
                "sup_norm": np.asarray([f.sup_norm for f in kept], dtype=np.float64),
                "e_field": np.asarray([f.grid.e_field for f in kept], dtype=np.float64).reshape(
                    (len(kept),) + self.spec.dims + (3,)),
            }
        return state

    def load_state(self, state: Dict[str, Any]):
        self.records = int(state["records"])
        self.verifier.load_state(state["verifier"])
        self.snapshots = defaultdict(list)
        zeros = np.zeros(self.spec.dims)
        for i, index in enumerate(self.wanted):
            kept = state[f"snapshots_{i}"]
            for t, sup, e_field in zip(np.asarray(kept["t"]), np.asarray(kept["sup_norm"]),
                                       np.asarray(kept["e_field"])):
                grid = FieldGrid(spec=self.spec, rho=zeros, e_field=np.array(e_field))
                self.snapshots[index].append(LocalizedField(index=index, grid=grid, sup_norm=float(sup), t=float(t)))


class RunDiagnostics:
    """Functionals engine with an optional localization recorder riding along"""

    def __init__(self, engine: DiagnosticsEngine, recorder: Optional[LocalizationRecorder] = None):
        self.engine = engine
        self.recorder = recorder

    @property
    def series(self):
        return self.engine.series

    def start(self, ensemble: Ensemble, field: Any = None):
        self.engine.start(ensemble, field)

    def advance(self, ensemble: Ensemble, dt: float):
        self.engine.advance(ensemble, dt)

    def record(self, ensemble: Ensemble, field: Any = None):
        record = self.engine.record(ensemble, field)
        if self.recorder is not None:
            self.recorder.record(ensemble, self.engine.surrogates(ensemble.t))
        return record
