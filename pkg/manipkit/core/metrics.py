"""Prometheus metrics for pipeline and rollout monitoring"""
import time
from functools import wraps
from typing import Callable

from prometheus_client import CollectorRegistry, Counter, Histogram, generate_latest

registry = CollectorRegistry()

proposals_total = Counter(
    'proposals_total',
    'Total affordance proposals by fallback path',
    ['fallback'],
    registry=registry
)

proposal_failures_total = Counter(
    'proposal_failures_total',
    'Total proposals that found no valid flat normal',
    registry=registry
)

gate_decisions_total = Counter(
    'gate_decisions_total',
    'Total mask quality gate decisions',
    ['verdict'],
    registry=registry
)

renders_total = Counter(
    'renders_total',
    'Total scene renders',
    registry=registry
)

rollouts_total = Counter(
    'rollouts_total',
    'Total policy rollouts by outcome',
    ['policy', 'outcome'],
    registry=registry
)

rollout_duration = Histogram(
    'rollout_duration_seconds',
    'Policy rollout duration in seconds',
    ['policy'],
    registry=registry
)


def track_rollout(policy: str) -> Callable:
    """Decorator recording outcome and duration of a rollout returning a PolicyTrace"""
    def decorator(func: Callable) -> Callable:
        @wraps(func)
        def wrapper(*args, **kwargs):
            start_time = time.perf_counter()
            try:
                trace = func(*args, **kwargs)
            except Exception:
                rollouts_total.labels(policy=policy, outcome='error').inc()
                rollout_duration.labels(policy=policy).observe(time.perf_counter() - start_time)
                raise
            outcome = 'success' if trace.success else 'failure'
            rollouts_total.labels(policy=policy, outcome=outcome).inc()
            rollout_duration.labels(policy=policy).observe(time.perf_counter() - start_time)
            return trace
        return wrapper
    return decorator


def get_metrics_text() -> str:
    """Generate Prometheus metrics in text format"""
    return generate_latest(registry).decode('utf-8')
