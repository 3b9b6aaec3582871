"""
Diagnostics records and the CSV time series
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Sequence, Union

import numpy as np

from kinetics.exceptions import ValidationError

logger = logging.getLogger(__name__)

LEADING_COLUMNS = ("t", "mass", "kinetic_energy", "field_energy", "total_energy")
TRAILING_COLUMNS = ("A_cum", "J", "max_speed", "min_planar_radius", "beta", "kinetic_energy_abs_v")


def moment_column(n: float) -> str:
    return f"moment_{n:g}"


def series_columns(moment_orders: Sequence[float]) -> List[str]:
    """CSV header for the configured moment orders"""
    return list(LEADING_COLUMNS) + [moment_column(n) for n in moment_orders] + list(TRAILING_COLUMNS)


@dataclass
class DiagnosticsRecord:
    """Every tracked functional at one recorded time"""
    t: float
    mass: float
    kinetic_energy: float
    field_energy: float
    total_energy: float
    moments: Dict[float, float]
    A_cum: float
    J: float
    max_speed: float
    min_planar_radius: float
    beta: float
    kinetic_energy_abs_v: float
    extras: Dict[str, Any] = field(default_factory=dict, compare=False)

    def row(self) -> List[float]:
        values = [getattr(self, name) for name in LEADING_COLUMNS]
        values += [self.moments[n] for n in self.moments]
        values += [getattr(self, name) for name in TRAILING_COLUMNS]
        return [float(x) for x in values]

    def to_dict(self) -> Dict[str, Any]:
        result = {name: getattr(self, name) for name in LEADING_COLUMNS}
        result.update({moment_column(n): value for n, value in self.moments.items()})
        result.update({name: getattr(self, name) for name in TRAILING_COLUMNS})
        return result


class DiagnosticsSeries:
    """Ordered DiagnosticsRecords sharing one set of moment orders"""

    def __init__(self, moment_orders: Sequence[float]):
        self.moment_orders = tuple(float(n) for n in moment_orders)
        self.records: List[DiagnosticsRecord] = []

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, index: int) -> DiagnosticsRecord:
        return self.records[index]

    @property
    def columns(self) -> List[str]:
        return series_columns(self.moment_orders)

    def append(self, record: DiagnosticsRecord):
        if tuple(record.moments) != self.moment_orders:
            raise ValidationError("record.moments", "moment orders differ from the series", tuple(record.moments))
        if self.records and not record.t > self.records[-1].t:
            raise ValidationError("record.t", "record times must be strictly increasing", record.t)
        self.records.append(record)

    def table(self) -> np.ndarray:
        if not self.records:
            return np.zeros((0, len(self.columns)))
        return np.array([r.row() for r in self.records], dtype=np.float64)

    def column(self, name: str) -> np.ndarray:
        try:
            index = self.columns.index(name)
        except ValueError:
            raise ValidationError("column", "unknown diagnostics column", name)
        return self.table()[:, index] if self.records else np.zeros(0)

    def to_csv(self, path: Union[str, Path]) -> Path:
        """Header plus one row per record, 17 significant digits"""
        path = Path(path)
        np.savetxt(path, self.table(), fmt="%.17g", delimiter=",",
                   header=",".join(self.columns), comments="")
        logger.debug(f"Wrote {len(self.records)} diagnostics records to {path}")
        return path

    def state_dict(self) -> Dict[str, np.ndarray]:
        return {"moment_orders": np.asarray(self.moment_orders), "table": self.table()}

    @classmethod
    def from_state(cls, state: Dict[str, Any]) -> "DiagnosticsSeries":
        orders = [float(n) for n in np.asarray(state["moment_orders"]).ravel()]
        series = cls(orders)
        table = np.asarray(state["table"], dtype=np.float64).reshape(-1, len(series.columns))
        k = len(orders)
        lead, trail = len(LEADING_COLUMNS), len(TRAILING_COLUMNS)
        for row in table:
            values = dict(zip(LEADING_COLUMNS, row[:lead]))
            values.update(zip(TRAILING_COLUMNS, row[lead + k: lead + k + trail]))
            series.records.append(DiagnosticsRecord(
                moments={n: float(m) for n, m in zip(orders, row[lead: lead + k])},
                **{name: float(value) for name, value in values.items()},
            ))
        return series
