"""Evaluation tasks, results and the per-agent cache."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from ..netbench.train import FidelityBudget

STATUSES = ("ok", "timeout", "failed")


@dataclass(frozen=True)
class EvalTask:
    task_id: int
    agent_id: int
    encoding: tuple
    budget: FidelityBudget = field(default_factory=FidelityBudget)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "encoding", tuple(int(e) for e in self.encoding))


@dataclass(frozen=True)
class EvalResult:
    """Outcome of one task.

    ``duration`` is the training time of the underlying evaluation (copied
    from the original on a cache hit). ``worker``/``start``/``end`` describe
    the busy interval; cache hits occupy no worker, so ``worker`` is None and
    ``start == end``.
    """

    task_id: int
    agent_id: int
    encoding: tuple
    status: str
    reward: float
    duration: float
    params: int = 0
    from_cache: bool = False
    worker: int | None = None
    start: float = 0.0
    end: float = 0.0

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")
        if not math.isfinite(self.reward):
            raise ValueError("reward must be finite")

    @property
    def busy_time(self):
        return 0.0 if self.worker is None else self.end - self.start

    def as_cached(self, task, t):
        return replace(self, task_id=task.task_id, agent_id=task.agent_id, from_cache=True,
                       worker=None, start=t, end=t)


class AgentCache:
    """encoding -> EvalResult, one map per agent, never shared."""

    def __init__(self):
        self._maps = {}

    def get(self, agent_id, encoding):
        return self._maps.get(agent_id, {}).get(tuple(encoding))

    def put(self, result):
        self._maps.setdefault(result.agent_id, {})[tuple(result.encoding)] = result

    def size(self, agent_id=None):
        if agent_id is None:
            return sum(len(m) for m in self._maps.values())
        return len(self._maps.get(agent_id, {}))

    def __contains__(self, key):
        agent_id, encoding = key
        return self.get(agent_id, encoding) is not None
