"""
Grid snapshot export

A snapshot is a pair of files: <stem>.bin holding one array as little-endian
float64 in C order, and <stem>.json holding the header (dims, spacing, origin,
field name, components).
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Tuple, Union

import numpy as np

from kinetics.exceptions import ValidationError
from .grid import FieldGrid, GridSpec, grid_snapshot_fields

logger = logging.getLogger(__name__)

SNAPSHOT_DTYPE = "<f8"


def write_grid_snapshot(grid: FieldGrid, stem: Union[str, Path], field: str = "rho",
                        t: float = None) -> Tuple[Path, Path]:
    """
    Write one gridded array and its header

    Args:
        grid: source grid
        stem: output path without suffix
        field: "rho", "potential" or "e_field"
        t: optional simulation time recorded in the header

    Returns:
        (binary path, header path)
    """
    if field not in grid_snapshot_fields(grid):
        raise ValidationError("field", f"grid has no '{field}' array", field)
    array = np.ascontiguousarray(getattr(grid, field), dtype=SNAPSHOT_DTYPE)

    stem = Path(stem)
    stem.parent.mkdir(parents=True, exist_ok=True)
    bin_path = stem.with_suffix(".bin")
    header_path = stem.with_suffix(".json")

    header: Dict[str, Any] = {
        **grid.spec.to_dict(),
        "field": field,
        "components": 3 if field == "e_field" else 1,
        "dtype": SNAPSHOT_DTYPE,
        "order": "C",
    }
    if t is not None:
        header["t"] = float(t)

    bin_path.write_bytes(array.tobytes(order="C"))
    header_path.write_text(json.dumps(header, indent=2, sort_keys=True) + "\n")
    logger.debug(f"Wrote {field} snapshot to {bin_path}")
    return bin_path, header_path


def read_grid_snapshot(stem: Union[str, Path]) -> Tuple[Dict[str, Any], np.ndarray]:
    """Read a snapshot back as (header, array)"""
    stem = Path(stem)
    header = json.loads(stem.with_suffix(".json").read_text())
    spec = GridSpec.from_dict(header)
    shape = spec.dims + ((3,) if header["components"] == 3 else ())
    array = np.frombuffer(stem.with_suffix(".bin").read_bytes(), dtype=header["dtype"])
    if array.size != int(np.prod(shape)):
        raise ValidationError("snapshot", "binary size does not match header dims", array.size)
    return header, array.reshape(shape)
