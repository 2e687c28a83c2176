"""Reward sources an evaluator can be bound to, and task duration models."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..netbench.landscape import SyntheticLandscape
from ..netbench.program import CompileError, compile_graph
from ..netbench.train import CostModel, train_and_score
from ..seeding import derive_uniform
from ..space.search_space import decode


@dataclass(frozen=True)
class Outcome:
    status: str
    reward: float
    duration: float
    params: int = 0


@dataclass(frozen=True)
class ConstantDuration:
    value: float = 1.0

    def __call__(self, encoding, seed=0):
        return self.value


@dataclass(frozen=True)
class UniformDuration:
    """Duration drawn uniformly from [lo, hi], keyed by (seed, encoding)."""

    lo: float = 1.0
    hi: float = 10.0
    seed: int = 0

    def __call__(self, encoding, seed=0):
        u = derive_uniform("duration", self.seed, tuple(int(e) for e in encoding))
        return self.lo + (self.hi - self.lo) * u


def duration_model_from_dict(d):
    d = dict(d or {"kind": "uniform"})
    kind = d.pop("kind", "uniform")
    if kind == "uniform":
        return UniformDuration(**d)
    if kind == "constant":
        return ConstantDuration(**d)
    raise ValueError(f"unknown duration model {kind!r}")


@dataclass(frozen=True)
class SyntheticBenchmark:
    """Landscape reward with a modelled training duration.

    A duration longer than the budget's timeout turns into a timeout
    outcome (reward -1) that lasted exactly the timeout.
    """

    landscape: SyntheticLandscape
    duration_model: object = UniformDuration()

    def evaluate(self, encoding, budget, seed=0):
        d = float(self.duration_model(encoding, seed))
        if d > budget.timeout:
            return Outcome("timeout", -1.0, float(budget.timeout))
        return Outcome("ok", self.landscape.reward(encoding), d)


@dataclass(frozen=True)
class NetBenchmark:
    """Decode, compile and train on a tabular dataset.

    With a ``cost_model`` the reported duration is the deterministic
    FLOP-based estimate; otherwise it is measured wall time.
    """

    space: object
    dataset: object
    cost_model: CostModel | None = None

    def evaluate(self, encoding, budget, seed=0):
        graph = decode(self.space, encoding)
        try:
            program = compile_graph(graph, self.dataset.input_dims, self.dataset.task)
        except CompileError:
            return Outcome("failed", -1.0, 1e-3)
        out = train_and_score(program, self.dataset, budget, seed, self.cost_model)
        duration = max(out.duration, 1e-6)
        if math.isfinite(budget.timeout):
            duration = min(duration, budget.timeout)
        return Outcome(out.status, float(out.reward), duration, out.params)
