"""Search configuration, loadable from JSON."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from ..netbench.train import FidelityBudget

STRATEGIES = ("a3c", "a2c", "random")
BACKENDS = ("simulated", "local")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PPOConfig:
    clip: float = 0.2
    epochs: int = 4
    lr: float = 0.001
    value_coef: float = 0.5
    entropy_coef: float = 0.01
    hidden: int = 32
    embed: int = 16
    init_scale: float = 0.1
    separate_critic: bool = False
    # "first": gradient of the first PPO pass; "delta": scaled local change after all passes
    packet_mode: str = "first"
    window: int = 4

    def __post_init__(self):
        if self.packet_mode not in ("first", "delta"):
            raise ConfigError(f"packet_mode must be 'first' or 'delta', got {self.packet_mode!r}")
        if self.epochs < 1 or self.window < 1 or self.hidden < 1 or self.embed < 1:
            raise ConfigError("epochs, window, hidden and embed must be positive")
        if not (self.clip > 0 and self.lr > 0):
            raise ConfigError("clip and lr must be positive")


@dataclass(frozen=True)
class SearchConfig:
    strategy: str = "a3c"
    num_agents: int = 1
    workers_per_agent: int = 1
    wall_clock_budget: float = math.inf
    max_evaluations: int | None = None
    fidelity: FidelityBudget = field(default_factory=FidelityBudget)
    ppo: PPOConfig = field(default_factory=PPOConfig)
    seed: int = 0
    backend: str = "simulated"
    # simulated cluster stanza: workers (default N*M), dispatch_latency, duration_model
    cluster: dict = field(default_factory=dict)
    # builtin name, {"builtin", "unit_scale"}, {"path"} or {"arities"}
    space: object = "combo_small"
    # {"kind": "synthetic", ...} or {"kind": "netbench", "dataset": {...}, "cost_model": {...}}
    benchmark: dict = field(default_factory=lambda: {"kind": "synthetic"})
    convergence_rounds: int = 3
    agent_step_seconds: float = 1.0
    checkpoint_every: int = 0

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        if self.backend not in BACKENDS:
            raise ConfigError(f"backend must be one of {BACKENDS}, got {self.backend!r}")
        if self.num_agents < 1 or self.workers_per_agent < 1:
            raise ConfigError("num_agents and workers_per_agent must be at least 1")
        if not self.wall_clock_budget > 0:
            raise ConfigError("wall_clock_budget must be positive")
        if math.isinf(self.wall_clock_budget) and self.max_evaluations is None \
                and self.convergence_rounds < 1:
            raise ConfigError("search has no stopping rule")
        if self.max_evaluations is not None and self.max_evaluations < self.workers_per_agent:
            raise ConfigError("max_evaluations is smaller than one batch")
        if self.agent_step_seconds < 0:
            raise ConfigError("agent_step_seconds must be non-negative")

    @property
    def total_workers(self):
        return int(self.cluster.get("workers") or self.num_agents * self.workers_per_agent)

    def with_overrides(self, **kw):
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw) if kw else self

    def to_dict(self):
        d = asdict(self)
        d["fidelity"] = self.fidelity.to_dict()
        d["wall_clock_budget"] = None if math.isinf(self.wall_clock_budget) else self.wall_clock_budget
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            if "fidelity" in d:
                d["fidelity"] = FidelityBudget.from_dict(d["fidelity"])
            if "ppo" in d:
                d["ppo"] = PPOConfig(**d["ppo"])
            if d.get("wall_clock_budget") is None:
                d["wall_clock_budget"] = math.inf
            return cls(**d)
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path):
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(data)
