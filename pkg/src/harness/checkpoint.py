"""
Checkpoints

A checkpoint is one .npz archive holding the ensemble, the integrator's
position in the run, the running state of every diagnostic, the sampling RNG
state and the config it belongs to. Nested state dicts are flattened to
dotted array names; None values are left out.
"""

import dataclasses
import json
import logging
import os
import zipfile
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np

from kinetics.exceptions import CheckpointError
from kinetics.particles import Ensemble
from pusher.integrator import IntegrationState
from utils.config_loader import canonical_json
from .config import RunConfig

logger = logging.getLogger(__name__)

CHECKPOINT_SCHEMA_VERSION = 1
SEPARATOR = "."


@dataclass
class Checkpoint:
    """Everything a resumed run needs"""
    config: RunConfig
    state: IntegrationState
    engine: Dict[str, Any]
    monitor: Dict[str, Any]
    trajectory: Optional[Dict[str, Any]] = None
    localization: Optional[Dict[str, Any]] = None

    @property
    def rng_state(self) -> Dict[str, Any]:
        return self.state.ensemble.metadata.get("rng_state", {})


def _flatten(prefix: str, value: Any, out: Dict[str, np.ndarray]):
    if value is None:
        return
    if isinstance(value, dict):
        for key, item in value.items():
            _flatten(f"{prefix}{SEPARATOR}{key}" if prefix else str(key), item, out)
    else:
        out[prefix] = np.asarray(value)


def _unflatten(arrays: Dict[str, np.ndarray], prefix: str) -> Optional[Dict[str, Any]]:
    start = prefix + SEPARATOR
    nested: Dict[str, Any] = {}
    for name, array in arrays.items():
        if not name.startswith(start):
            continue
        node = nested
        parts = name[len(start):].split(SEPARATOR)
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = array
    return nested or None


def _text(value: Any) -> np.ndarray:
    return np.asarray(value, dtype=np.str_)


def save_checkpoint(path: Union[str, Path], checkpoint: Checkpoint) -> Path:
    """
    Write a checkpoint atomically

    Args:
        path: target .npz file
        checkpoint: state to save

    Returns:
        The written path
    """
    path = Path(path)
    state = checkpoint.state
    ensemble = state.ensemble
    metadata = {k: v for k, v in ensemble.metadata.items() if k != "rng_state"}

    arrays: Dict[str, np.ndarray] = {
        "schema_version": np.asarray(CHECKPOINT_SCHEMA_VERSION),
        "config_json": _text(canonical_json(checkpoint.config.to_dict())),
        "config_hash": _text(checkpoint.config.config_hash),
        "rng_state_json": _text(json.dumps(checkpoint.rng_state, sort_keys=True)),
        "metadata_json": _text(json.dumps(metadata, sort_keys=True, default=str)),
    }
    _flatten("ensemble", {
        **ensemble.to_arrays(),
        "t": ensemble.t,
        "seed": -1 if ensemble.seed is None else ensemble.seed,
    }, arrays)
    _flatten("integration", {
        "step": state.step,
        "n_steps": state.n_steps,
        "t0": state.t0,
        "t_end": state.t_end,
        "field_source": state.field_source,
        "cached_field": state.cached_field,
    }, arrays)
    _flatten("engine", checkpoint.engine, arrays)
    _flatten("monitor", checkpoint.monitor, arrays)
    _flatten("trajectory", checkpoint.trajectory, arrays)
    _flatten("localization", checkpoint.localization, arrays)

    path.parent.mkdir(parents=True, exist_ok=True)
    partial = path.with_name(path.name + ".partial")
    with open(partial, "wb") as handle:
        np.savez(handle, **arrays)
    os.replace(partial, path)
    logger.info(f"Checkpoint at step {state.step}/{state.n_steps} written to {path}")
    return path


def load_checkpoint(path: Union[str, Path]) -> Checkpoint:
    """
    Read a checkpoint and check it against its embedded config

    Raises:
        CheckpointError: missing or unreadable file, schema mismatch, or a
            config hash that does not match the embedded config
    """
    path = Path(path)
    if not path.is_file():
        raise CheckpointError(str(path), "file not found")
    try:
        with np.load(path, allow_pickle=False) as archive:
            arrays = {name: archive[name] for name in archive.files}
    except (OSError, ValueError, zipfile.BadZipFile) as e:
        raise CheckpointError(str(path), f"unreadable archive: {e}")

    try:
        version = int(arrays["schema_version"])
        if version != CHECKPOINT_SCHEMA_VERSION:
            raise CheckpointError(str(path), f"schema version {version}, expected {CHECKPOINT_SCHEMA_VERSION}")
        config = RunConfig.model_validate(json.loads(str(arrays["config_json"])))
        if config.config_hash != str(arrays["config_hash"]):
            raise CheckpointError(str(path), "config hash does not match the embedded config")

        ens = _unflatten(arrays, "ensemble")
        seed = int(ens["seed"])
        metadata = json.loads(str(arrays["metadata_json"]))
        metadata["rng_state"] = json.loads(str(arrays["rng_state_json"]))
        ensemble = Ensemble.from_arrays(ens, t=float(ens["t"]), seed=None if seed < 0 else seed)
        ensemble = dataclasses.replace(ensemble, metadata=metadata)

        integ = _unflatten(arrays, "integration")
        state = IntegrationState(
            ensemble=ensemble,
            step=int(integ["step"]),
            n_steps=int(integ["n_steps"]),
            t0=float(integ["t0"]),
            t_end=float(integ["t_end"]),
            field_source=np.array(integ["field_source"]) if "field_source" in integ else None,
            cached_field=np.array(integ["cached_field"]),
        )
        checkpoint = Checkpoint(
            config=config,
            state=state,
            engine=_unflatten(arrays, "engine"),
            monitor=_unflatten(arrays, "monitor") or {},
            trajectory=_unflatten(arrays, "trajectory"),
            localization=_unflatten(arrays, "localization"),
        )
    except CheckpointError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise CheckpointError(str(path), f"incomplete or inconsistent contents: {e}")

    if checkpoint.engine is None:
        raise CheckpointError(str(path), "no diagnostics state")
    logger.info(f"Loaded checkpoint {path} at step {state.step}/{state.n_steps}")
    return checkpoint
