"""
Metrics collection and monitoring utilities
"""

import datetime
import logging
from collections import defaultdict, deque
from pathlib import Path
from typing import Any, Dict, Optional, Union

# Prometheus metrics (optional import)
try:
    from prometheus_client import CollectorRegistry, Counter, Gauge, Histogram, write_to_textfile
    PROMETHEUS_AVAILABLE = True
except ImportError:
    PROMETHEUS_AVAILABLE = False
    CollectorRegistry = Counter = Gauge = Histogram = write_to_textfile = None

logger = logging.getLogger(__name__)


class MetricsCollector:
    """
    Run metrics: integration steps, field rebuilds, records and errors

    Values are kept in memory and, when prometheus_client is installed,
    mirrored into a private registry that can be written as a textfile.
    Nothing here feeds the deterministic artifacts.
    """

    def __init__(self, enable_prometheus: bool = True):
        self.enable_prometheus = enable_prometheus and PROMETHEUS_AVAILABLE
        self.start_time = datetime.datetime.now()

        self.counters = defaultdict(int)
        self.gauges = defaultdict(float)
        self.histograms = defaultdict(lambda: deque(maxlen=1000))

        self.registry: Optional[Any] = None
        if self.enable_prometheus:
            self._setup_prometheus_metrics()

        logger.debug(f"Metrics collector initialized (Prometheus: {self.enable_prometheus})")

    def _setup_prometheus_metrics(self):
        self.registry = CollectorRegistry()

        self.prom_steps_total = Counter(
            'rvp_integration_steps_total',
            'Integrator steps taken',
            registry=self.registry
        )
        self.prom_field_rebuilds_total = Counter(
            'rvp_field_rebuilds_total',
            'Field evaluator builds',
            ['mode'],
            registry=self.registry
        )
        self.prom_field_rebuild_seconds = Histogram(
            'rvp_field_rebuild_seconds',
            'Time spent building field evaluators',
            ['mode'],
            registry=self.registry
        )
        self.prom_particles = Gauge(
            'rvp_particles',
            'Particles in the ensemble',
            registry=self.registry
        )
        self.prom_records_total = Counter(
            'rvp_records_total',
            'Rows written to artifacts',
            ['artifact'],
            registry=self.registry
        )
        self.prom_errors_total = Counter(
            'rvp_errors_total',
            'Errors by error code',
            ['error_code'],
            registry=self.registry
        )

    def record_steps(self, count: int = 1):
        self.counters['steps'] += count
        if self.enable_prometheus:
            self.prom_steps_total.inc(count)

    def record_field_rebuild(self, mode: str, seconds: float):
        self.counters[f'field_rebuilds_{mode}'] += 1
        self.histograms['field_rebuild_seconds'].append(seconds)
        if self.enable_prometheus:
            self.prom_field_rebuilds_total.labels(mode=mode).inc()
            self.prom_field_rebuild_seconds.labels(mode=mode).observe(seconds)

    def set_particles(self, count: int):
        self.gauges['particles'] = count
        if self.enable_prometheus:
            self.prom_particles.set(count)

    def record_rows(self, artifact: str, rows: int):
        self.counters[f'rows_{artifact}'] += rows
        if self.enable_prometheus:
            self.prom_records_total.labels(artifact=artifact).inc(rows)

    def record_error(self, error_code: str):
        self.counters[f'error_{error_code}'] += 1
        if self.enable_prometheus:
            self.prom_errors_total.labels(error_code=error_code).inc()

    def get_metrics(self) -> Dict[str, Any]:
        """Summary for the run manifest"""
        rebuild_times = list(self.histograms['field_rebuild_seconds'])
        return {
            'steps': self.counters.get('steps', 0),
            'field_rebuilds': sum(v for k, v in self.counters.items() if k.startswith('field_rebuilds_')),
            'field_rebuild_seconds_total': sum(rebuild_times),
            'particles': self.gauges.get('particles', 0),
            'errors': sum(v for k, v in self.counters.items() if k.startswith('error_')),
            'uptime_seconds': (datetime.datetime.now() - self.start_time).total_seconds(),
        }

    def write_textfile(self, path: Union[str, Path]) -> Optional[Path]:
        """Write the registry in the Prometheus textfile format"""
        if not self.enable_prometheus:
            logger.warning("Prometheus not available, metrics textfile not written")
            return None
        path = Path(path)
        write_to_textfile(str(path), self.registry)
        return path
