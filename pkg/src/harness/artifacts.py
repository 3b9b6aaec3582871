"""
Run output directories and the manifest

One run owns one directory and never writes into a directory that already
holds files. Every artifact except manifest.json, metrics.prom and error.json
is a deterministic function of the config.
"""

import datetime
import hashlib
import json
import logging
import math
import platform
from importlib import metadata
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from kinetics.exceptions import OutputExistsError, RVPException

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
MANIFEST_NAME = "manifest.json"
ERROR_NAME = "error.json"
TRACKED_PACKAGES = ("numpy", "scipy", "numba", "pydantic", "PyYAML", "structlog", "click", "prometheus_client")


def package_versions() -> Dict[str, Optional[str]]:
    """Installed versions of the numerical and ambient stack"""
    versions: Dict[str, Optional[str]] = {"python": platform.python_version()}
    for name in TRACKED_PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = None
    return versions


def file_digest(path: Union[str, Path]) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def finite_json(value: Any) -> Any:
    """Nested data with numpy scalars unwrapped and non-finite floats as None"""
    if isinstance(value, dict):
        return {str(k): finite_json(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [finite_json(v) for v in value]
    if isinstance(value, np.ndarray):
        return finite_json(value.tolist())
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def write_json(path: Union[str, Path], data: Any) -> Path:
    """Sorted, indented JSON; non-finite floats are written as null"""
    path = Path(path)
    path.write_text(json.dumps(finite_json(data), indent=2, sort_keys=True, allow_nan=False) + "\n")
    return path


class OutputDirectory:
    """
    Directory holding the artifacts of one run

    Args:
        path: directory to create; it may exist only if empty
    """

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)
        self.artifacts: List[str] = []
        self.started_at = datetime.datetime.now(datetime.timezone.utc)

    def create(self) -> "OutputDirectory":
        if self.path.exists() and (not self.path.is_dir() or any(self.path.iterdir())):
            raise OutputExistsError(str(self.path))
        self.path.mkdir(parents=True, exist_ok=True)
        logger.info(f"Writing artifacts to {self.path}")
        return self

    def file(self, name: str) -> Path:
        """Path of an artifact, registered for the manifest"""
        if name not in self.artifacts:
            self.artifacts.append(name)
        target = self.path / name
        target.parent.mkdir(parents=True, exist_ok=True)
        return target

    def write_json(self, name: str, data: Any) -> Path:
        return write_json(self.file(name), data)

    def write_manifest(self, command: str, config: Dict[str, Any], config_hash: str,
                       status: str, summary: Optional[Dict[str, Any]] = None,
                       metrics: Optional[Dict[str, Any]] = None) -> Path:
        """
        manifest.json with the config hash, versions, wall time and artifact digests

        Args:
            command: run, resume or verify
            config: validated config as a JSON-ready mapping
            config_hash: RunConfig.config_hash
            status: completed, failed or verification-failed
            summary: command-specific results
            metrics: MetricsCollector.get_metrics()
        """
        finished = datetime.datetime.now(datetime.timezone.utc)
        digests = {
            name: file_digest(self.path / name)
            for name in sorted(self.artifacts)
            if name != MANIFEST_NAME and (self.path / name).is_file()
        }
        manifest = {
            "schema_version": SCHEMA_VERSION,
            "command": command,
            "status": status,
            "config_hash": config_hash,
            "config": config,
            "versions": package_versions(),
            "started_at": self.started_at.isoformat(),
            "finished_at": finished.isoformat(),
            "wall_seconds": (finished - self.started_at).total_seconds(),
            "artifacts": digests,
            "summary": summary or {},
            "metrics": metrics or {},
        }
        path = write_json(self.path / MANIFEST_NAME, manifest)
        logger.info(f"Manifest written to {path}")
        return path


def write_error(directory: Optional[Union[str, Path]], error: RVPException) -> Optional[Path]:
    """error.json in the run directory when the run created it; None otherwise"""
    if directory is None or isinstance(error, OutputExistsError):
        return None
    directory = Path(directory)
    if not directory.is_dir():
        return None
    path = directory / ERROR_NAME
    path.write_text(json.dumps(error.to_dict(), indent=2, sort_keys=True, default=str) + "\n")
    return path
