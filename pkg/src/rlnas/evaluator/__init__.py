"""Asynchronous reward estimation with per-agent caching."""

from .backends import EvaluatorError, LocalEvaluator, SimulatedEvaluator
from .benchmarks import (ConstantDuration, NetBenchmark, Outcome, SyntheticBenchmark,
                         UniformDuration, duration_model_from_dict)
from .cluster import ClusterModel, ListScheduler, Schedule, interval_utilization, run_simulated
from .tasks import AgentCache, EvalResult, EvalTask

__all__ = [
    "EvaluatorError", "LocalEvaluator", "SimulatedEvaluator", "ConstantDuration", "NetBenchmark",
    "Outcome", "SyntheticBenchmark", "UniformDuration", "duration_model_from_dict",
    "ClusterModel", "ListScheduler", "Schedule", "interval_utilization", "run_simulated",
    "AgentCache", "EvalResult", "EvalTask",
]
