"""Multi-agent search: configuration, parameter server and the event loop."""

from .config import BACKENDS, STRATEGIES, ConfigError, PPOConfig, SearchConfig
from .convergence import ConvergenceMonitor, convergence_monitor
from .log import EVENT_TYPES, SearchLog, as_events
from .ps import ParameterServer, VersionMismatch
from .search import resolve_benchmark, resolve_dataset, resolve_space, run_search

__all__ = [
    "BACKENDS", "STRATEGIES", "ConfigError", "PPOConfig", "SearchConfig", "ConvergenceMonitor",
    "convergence_monitor", "EVENT_TYPES", "SearchLog", "as_events", "ParameterServer",
    "VersionMismatch", "resolve_benchmark", "resolve_dataset", "resolve_space", "run_search",
]
