"""
Logging setup for runs

stdlib logging carries module diagnostics (`logging.getLogger(__name__)`);
structlog renders the run events of RunLogger, as console key=value pairs or
as one JSON object per line when `structured` is set.
"""

import functools
import logging
import logging.handlers
import sys
import time
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import structlog

DEFAULT_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

# noisy third-party loggers, overridable through module_levels
QUIET_MODULES = {"numba": "WARNING", "numba.core": "WARNING"}

_EVENT_PROCESSORS = (
    structlog.stdlib.filter_by_level,
    structlog.stdlib.add_logger_name,
    structlog.stdlib.add_log_level,
    structlog.processors.TimeStamper(fmt="iso"),
    structlog.processors.format_exc_info,
)


def setup_logging(config: Dict[str, Any]):
    """
    Configure stdlib handlers and the structlog event pipeline

    Args:
        config: the `logging` section of a run config (level, format, file,
            structured, max_file_size, backup_count, module_levels)
    """
    level = getattr(logging, str(config.get("level", "INFO")).upper())
    fmt = config.get("format", DEFAULT_FORMAT)

    # force: repeated CLI invocations in one process reconfigure cleanly
    logging.basicConfig(level=level, handlers=_handlers(config, logging.Formatter(fmt)), force=True)

    renderer = (structlog.processors.JSONRenderer(sort_keys=True) if config.get("structured", False)
                else structlog.dev.ConsoleRenderer(colors=False))
    structlog.configure(
        processors=[*_EVENT_PROCESSORS, renderer],
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=False,
    )

    for module, module_level in {**QUIET_MODULES, **config.get("module_levels", {})}.items():
        logging.getLogger(module).setLevel(getattr(logging, module_level.upper()))

    logging.getLogger(__name__).debug(f"Logging configured at {logging.getLevelName(level)}")


def _handlers(config: Dict[str, Any], formatter: logging.Formatter) -> List[logging.Handler]:
    # stderr only; stdout is left to the CLI summary
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]

    log_file = config.get("file")
    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.handlers.RotatingFileHandler(
            log_file,
            maxBytes=config.get("max_file_size", 10 * 1024 * 1024),
            backupCount=config.get("backup_count", 5),
        ))

    for handler in handlers:
        handler.setFormatter(formatter)
    return handlers


def get_logger(name: str) -> structlog.BoundLogger:
    """Structured logger for `name` (typically __name__)"""
    return structlog.get_logger(name)


class RunLogger:
    """
    Structured events of one run

    Every event carries the first twelve hex digits of the run's config hash
    so logs from several runs can be told apart.
    """

    def __init__(self, config_hash: str, name: str = "rvp.run"):
        self.logger = get_logger(name).bind(config_hash=config_hash[:12])

    def run_started(self, command: str, particles: int, t_end: float, output: str):
        self.logger.info("run_started", command=command, particles=particles, t_end=t_end, output=output)

    def field_rebuilt(self, mode: str, seconds: float):
        self.logger.debug("field_rebuilt", mode=mode, duration_ms=seconds * 1000.0)

    def record_written(self, artifact: str, rows: int):
        self.logger.info("record_written", artifact=artifact, rows=rows)

    def checkpoint_written(self, path: str, step: int, t: float):
        self.logger.info("checkpoint_written", path=path, step=step, t=t)

    def criterion_evaluated(self, criterion: str, passed: bool, seconds: float):
        level = self.logger.info if passed else self.logger.warning
        level("criterion_evaluated", criterion=criterion, passed=passed, duration_ms=seconds * 1000.0)

    def run_finished(self, command: str, seconds: float, steps_per_second: Optional[float] = None):
        self.logger.info("run_finished", command=command, duration_ms=seconds * 1000.0,
                         steps_per_second=steps_per_second)

    def run_failed(self, command: str, error_code: str, message: str):
        self.logger.error("run_failed", command=command, error_code=error_code, message=message)


def timing_decorator(logger_name: Optional[str] = None) -> Callable:
    """
    Emit a `function_timing` event for every call of the decorated function

    Successful calls log at DEBUG; a raising call logs at ERROR with the
    error text and the exception propagates unchanged.

    Args:
        logger_name: structured logger to use (defaults to the function's module)
    """

    def decorator(func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            logger = get_logger(logger_name or func.__module__)
            started = time.perf_counter()
            try:
                result = func(*args, **kwargs)
            except Exception as e:
                logger.error("function_timing", function=func.__name__, success=False, error=str(e),
                             duration_ms=(time.perf_counter() - started) * 1000.0)
                raise
            logger.debug("function_timing", function=func.__name__, success=True,
                         duration_ms=(time.perf_counter() - started) * 1000.0)
            return result

        return wrapper

    return decorator
