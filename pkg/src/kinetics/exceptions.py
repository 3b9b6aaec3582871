"""
Exception classes for the relativistic Vlasov-Poisson simulator
"""

from typing import Any, Dict, Optional, Sequence


class RVPException(Exception):
    """Base exception for all simulator errors"""

    def __init__(self, message: str, error_code: str = None, details: dict = None):
        super().__init__(message)
        self.message = message
        self.error_code = error_code or "RVP_ERROR"
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        """Machine-readable form, written as error.json by the CLI"""
        return {
            "error": type(self).__name__,
            "error_code": self.error_code,
            "message": self.message,
            "details": self.details,
        }


class ValidationError(RVPException):
    """Raised when an argument is outside its documented domain"""

    def __init__(self, field: str, reason: str, value: Any = None):
        super().__init__(
            f"Invalid value for '{field}': {reason}",
            error_code="VALIDATION_FAILED",
            details={"field": field, "reason": reason, "value": _jsonable(value)}
        )
        self.field = field


class ConfigurationError(RVPException):
    """Raised when a configuration names something that does not exist"""

    def __init__(self, key: str, reason: str):
        super().__init__(
            f"Configuration error at '{key}': {reason}",
            error_code="CONFIGURATION_INVALID",
            details={"key": key, "reason": reason}
        )
        self.key = key


class ConfigParseError(RVPException):
    """Raised when a run config cannot be parsed or validated"""

    def __init__(self, key: str, reason: str, line: Optional[int] = None):
        location = f" (line {line})" if line is not None else ""
        super().__init__(
            f"Config error at '{key}'{location}: {reason}",
            error_code="CONFIG_PARSE_FAILED",
            details={"key": key, "reason": reason, "line": line}
        )
        self.key = key
        self.line = line


class IntegrationBlowupError(RVPException):
    """Raised when a particle state becomes non-finite during a push"""

    def __init__(self, particle_index: int, t: float):
        super().__init__(
            f"Non-finite state for particle {particle_index} at t={t!r}",
            error_code="INTEGRATION_BLOWUP",
            details={"particle_index": int(particle_index), "t": float(t)}
        )
        self.particle_index = int(particle_index)


class UndefinedQuantityError(RVPException):
    """Raised when a diagnostic quantity is undefined at the given state"""

    def __init__(self, quantity: str, reason: str):
        super().__init__(
            f"Quantity '{quantity}' is undefined: {reason}",
            error_code="UNDEFINED_QUANTITY",
            details={"quantity": quantity, "reason": reason}
        )


class ResolutionError(RVPException):
    """Raised when a frequency shell is not resolvable on the grid"""

    def __init__(self, k: int, valid_range: Sequence[int]):
        k_min, k_max = int(valid_range[0]), int(valid_range[1])
        super().__init__(
            f"Frequency shell k={k} is not resolvable; valid k range is [{k_min}, {k_max}]",
            error_code="RESOLUTION_UNSUPPORTED",
            details={"k": int(k), "k_min": k_min, "k_max": k_max}
        )
        self.valid_range = (k_min, k_max)


class CoverageError(RVPException):
    """Raised when field snapshots do not cover a trajectory's time range"""

    def __init__(self, reason: str, t_range: Sequence[float], snapshot_range: Sequence[float]):
        super().__init__(
            f"Field snapshots do not cover the trajectory: {reason}",
            error_code="SNAPSHOT_COVERAGE",
            details={
                "reason": reason,
                "trajectory_range": [float(t) for t in t_range],
                "snapshot_range": [float(t) for t in snapshot_range],
            }
        )


class SolverResourceError(RVPException):
    """Raised when a field solve cannot allocate its working arrays"""

    def __init__(self, shape: Sequence[int], reason: str):
        super().__init__(
            f"Field solver cannot allocate grid {tuple(shape)}: {reason}",
            error_code="SOLVER_RESOURCE",
            details={"shape": [int(n) for n in shape], "reason": reason}
        )


class CheckpointError(RVPException):
    """Raised when a checkpoint cannot be read or does not match its run"""

    def __init__(self, path: str, reason: str):
        super().__init__(
            f"Checkpoint '{path}' is invalid: {reason}",
            error_code="CHECKPOINT_INVALID",
            details={"path": str(path), "reason": reason}
        )


class OutputExistsError(RVPException):
    """Raised when a run would overwrite an existing output directory"""

    def __init__(self, path: str):
        super().__init__(
            f"Output directory '{path}' already exists and is not empty",
            error_code="OUTPUT_EXISTS",
            details={"path": str(path)}
        )


def _jsonable(value: Any) -> Any:
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    return repr(value)
