"""Prometheus metrics for simulation runs."""

import time
from functools import wraps
from pathlib import Path
from typing import Any, Callable, Optional

try:
    from prometheus_client import REGISTRY, Counter, Histogram, Info, generate_latest
    PROMETHEUS_AVAILABLE = True
except ImportError:
    PROMETHEUS_AVAILABLE = False

from oqt_sim import __version__
from oqt_sim.utils.structured_logging import get_logger

logger = get_logger(__name__)


# Prometheus metrics (only created if prometheus_client is available)
if PROMETHEUS_AVAILABLE:
    INTEGRATOR_STEPS = Counter(
        'oqt_sim_integrator_steps_total',
        'Total integrator steps taken',
        ['kind']
    )

    TRAJECTORIES_COMPLETED = Counter(
        'oqt_sim_trajectories_completed_total',
        'Total stochastic trajectories integrated'
    )

    CHECKS = Counter(
        'oqt_sim_checks_total',
        'Invariant checks evaluated',
        ['check', 'status']
    )

    RUN_DURATION = Histogram(
        'oqt_sim_run_duration_seconds',
        'Experiment run duration in seconds',
        ['experiment'],
        buckets=(0.1, 1, 5, 10, 30, 60, 300, 600, 1800)
    )

    APP_INFO = Info('oqt_sim', 'Simulator information')
else:
    # Dummy metrics for when prometheus is not available
    class DummyMetric:
        def inc(self, *args, **kwargs): pass
        def observe(self, *args, **kwargs): pass
        def set(self, *args, **kwargs): pass
        def labels(self, *args, **kwargs): return self
        def info(self, *args, **kwargs): pass

    INTEGRATOR_STEPS = DummyMetric()
    TRAJECTORIES_COMPLETED = DummyMetric()
    CHECKS = DummyMetric()
    RUN_DURATION = DummyMetric()
    APP_INFO = DummyMetric()


class MetricsCollector:
    """Collect metrics and write them next to the run artifacts."""

    def __init__(self):
        self.start_time = time.time()

    def record_check(self, name: str, passed: bool) -> None:
        CHECKS.labels(check=name, status="pass" if passed else "fail").inc()

    def get_prometheus_metrics(self) -> str:
        """Registry contents in text exposition format."""
        if not PROMETHEUS_AVAILABLE:
            return "# Prometheus client not installed\n"
        return generate_latest(REGISTRY).decode('utf-8')

    def write(self, path: Path) -> Path:
        """Write the exposition text to ``path``."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.get_prometheus_metrics(), encoding="utf-8")
        logger.debug(f"Metrics written to {path}")
        return path


# Global metrics collector
_metrics_collector: Optional[MetricsCollector] = None


def get_metrics_collector() -> MetricsCollector:
    """Get or create global metrics collector."""
    global _metrics_collector
    if _metrics_collector is None:
        _metrics_collector = MetricsCollector()

        APP_INFO.info({
            'version': __version__,
            'name': 'oqt-sim'
        })

    return _metrics_collector


def track_run_duration(experiment: str):
    """Decorator to time an experiment run."""
    def decorator(func: Callable[..., Any]) -> Callable[..., Any]:
        @wraps(func)
        def wrapper(*args, **kwargs):
            start = time.time()
            try:
                return func(*args, **kwargs)
            finally:
                RUN_DURATION.labels(experiment=experiment).observe(time.time() - start)
        return wrapper
    return decorator
