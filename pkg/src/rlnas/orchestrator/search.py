"""The multi-agent search loop.

One event loop drives every agent. Under the simulated backend time jumps
from event to event (agent ready, evaluation finished), so a run is a pure
function of its config. Under the local backend the loop polls a process
pool and time is the wall clock.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..controller.checkpoint import save_policy
from ..controller.policy import Trajectory, init_policy, sample_batch
from ..controller.ppo import ppo_gradient
from ..evaluator.backends import LocalEvaluator, SimulatedEvaluator
from ..evaluator.benchmarks import NetBenchmark, SyntheticBenchmark, duration_model_from_dict
from ..evaluator.cluster import ClusterModel
from ..evaluator.tasks import EvalTask
from ..netbench.data import generate_dataset, load_dataset
from ..netbench.landscape import SyntheticLandscape
from ..netbench.train import CostModel
from ..seeding import derive_seed
from ..space.builtins import builtin_space, grid_space
from ..space.search_space import build_space, sample_random
from ..space.spec import load_spec
from .config import ConfigError
from .convergence import ConvergenceMonitor
from .log import SearchLog
from .ps import ParameterServer


def resolve_dataset(bench):
    ds = bench.get("dataset") or {"preset": "combo-mini"}
    if "manifest" in ds:
        return load_dataset(ds["manifest"])
    return generate_dataset(ds.get("preset", "combo-mini"), seed=ds.get("seed", 0),
                            rows=ds.get("rows"), dims=ds.get("dims"))


def resolve_space(config, input_dims=None):
    sp = config.space
    if isinstance(sp, str):
        sp = {"builtin": sp}
    try:
        if "arities" in sp:
            spec = grid_space(sp["arities"])
        elif "path" in sp:
            spec = load_spec(sp["path"])
            if input_dims:
                spec = spec.with_input_dims(input_dims)
        else:
            spec = builtin_space(sp["builtin"], input_dims, sp.get("unit_scale", 1.0))
        return build_space(spec)
    except (KeyError, ValueError, OSError) as exc:
        raise ConfigError(f"cannot build search space from {config.space!r}: {exc}") from exc


def resolve_benchmark(config):
    """(search space, benchmark) for a config."""
    bench = dict(config.benchmark)
    kind = bench.get("kind", "synthetic")
    if kind == "synthetic":
        space = resolve_space(config)
        landscape = SyntheticLandscape.generate(
            space.arities, seed=bench.get("seed", config.seed),
            num_interactions=bench.get("num_interactions", 0),
            interaction_scale=bench.get("interaction_scale", 0.5))
        dm = duration_model_from_dict(config.cluster.get("duration_model"))
        return space, SyntheticBenchmark(landscape, dm)
    if kind == "netbench":
        dataset = resolve_dataset(bench)
        space = resolve_space(config, dataset.input_dims)
        cm = bench.get("cost_model", {})
        cost = None if cm is None else CostModel(**cm)
        return space, NetBenchmark(space, dataset, cost)
    raise ConfigError(f"unknown benchmark kind {kind!r}")


@dataclass
class _Agent:
    id: int
    rng: np.random.Generator
    policy: object = None
    version: int = 0
    phase: str = "ready"  # ready | waiting | barrier | retired
    ready_at: float = 0.0
    batch: int = 0
    trajectories: list = field(default_factory=list)
    pending: dict = field(default_factory=dict)  # task id -> trajectory index
    cached: list = field(default_factory=list)


class _Search:
    def __init__(self, config, log, run_dir):
        self.cfg = config
        self.log = log
        self.run_dir = Path(run_dir) if run_dir else None
        self.space, self.benchmark = resolve_benchmark(config)
        if config.backend == "simulated":
            cl = dict(config.cluster)
            cl["workers"] = config.total_workers
            cl.pop("duration_model", None)
            self.evaluator = SimulatedEvaluator(self.benchmark, ClusterModel.from_dict(cl))
        else:
            self.evaluator = LocalEvaluator(self.benchmark, config.total_workers)
        ppo = config.ppo
        self.learning = config.strategy != "random"
        self.ps = None
        if self.learning:
            policy = init_policy(self.space, derive_seed(config.seed, "policy"), ppo.hidden,
                                 ppo.embed, ppo.init_scale, ppo.separate_critic)
            self.ps = ParameterServer(policy, lr=ppo.lr, window=ppo.window)
        self.agents = [_Agent(i, np.random.default_rng(derive_seed(config.seed, "agent", i)),
                              self.ps.policy if self.ps else None)
                       for i in range(config.num_agents)]
        self.monitor = ConvergenceMonitor(range(config.num_agents), config.convergence_rounds)
        self.barrier = {}
        self.next_task = 0
        self.submitted = 0
        self.now = 0.0

    # -- agent actions -------------------------------------------------
    def _sample(self, agent):
        M = self.cfg.workers_per_agent
        if self.learning:
            return sample_batch(agent.policy, self.space, M, agent.rng)
        seed = int(agent.rng.integers(2 ** 63))
        encs = sample_random(self.space, seed, n=M)
        T = self.space.num_slots
        return [Trajectory(tuple(e), np.zeros(T), np.zeros(T)) for e in encs]

    def _submit(self, agent):
        M = self.cfg.workers_per_agent
        limit = self.cfg.max_evaluations
        if limit is not None and self.submitted + M > limit:
            self._retire(agent)
            return
        agent.trajectories = self._sample(agent)
        agent.pending, agent.cached = {}, []
        tasks = []
        for idx, traj in enumerate(agent.trajectories):
            tid = self.next_task
            self.next_task += 1
            seed = derive_seed(self.cfg.seed, "eval", agent.id, traj.encoding)
            tasks.append(EvalTask(tid, agent.id, traj.encoding, self.cfg.fidelity, seed))
            agent.pending[tid] = idx
            self.log.emit("EvalSubmitted", self.now, agent=agent.id, task=tid, batch=agent.batch,
                          encoding=list(traj.encoding))
        self.submitted += M
        agent.phase = "waiting"
        self.evaluator.add_eval_batch(tasks)

    def _retire(self, agent):
        agent.phase = "retired"
        self.monitor.retire(agent.id)
        self.barrier.pop(agent.id, None)
        self._maybe_release_barrier()

    def _harvest(self):
        results = self.evaluator.get_finished_evals()
        for r in results:
            agent = self.agents[r.agent_id]
            idx = agent.pending.pop(r.task_id)
            agent.trajectories[idx].reward = r.reward
            agent.cached.append(r.from_cache)
            self.log.emit("EvalFinished", r.end, agent=r.agent_id, task=r.task_id, batch=agent.batch,
                          encoding=list(r.encoding), status=r.status, reward=r.reward,
                          duration=r.duration, params=r.params, from_cache=r.from_cache,
                          worker=r.worker)
            if not r.from_cache:
                self.log.emit("WorkerBusyInterval", r.end, worker=r.worker, start=r.start,
                              end=r.end, task=r.task_id)
        return bool(results)

    def _finish_batch(self, agent):
        self.monitor.observe(agent.id, all(agent.cached))
        agent.batch += 1
        resume = self.now + (self.cfg.agent_step_seconds if self.cfg.backend == "simulated" else 0.0)
        if not self.learning:
            agent.phase, agent.ready_at = "ready", resume
            return
        p = self.cfg.ppo
        packet = ppo_gradient(agent.policy, agent.trajectories, p.clip, p.epochs, p.packet_mode, p.lr,
                              p.value_coef, p.entropy_coef, agent_id=agent.id, version=agent.version)
        if self.cfg.strategy == "a3c":
            policy, staleness = self.ps.step_async(packet)
            self.log.emit("GradientApplied", self.now, agent=agent.id, version=self.ps.version,
                          packet_version=packet.version, staleness=staleness)
            agent.policy, agent.version = policy, self.ps.version
            agent.phase, agent.ready_at = "ready", resume
            self._maybe_checkpoint()
        else:
            self.barrier[agent.id] = packet
            agent.phase = "barrier"
            agent.ready_at = resume
            self._maybe_release_barrier()

    def _maybe_release_barrier(self):
        if self.cfg.strategy != "a2c" or not self.barrier:
            return
        active = [a for a in self.agents if a.phase != "retired"]
        if any(a.phase != "barrier" for a in active):
            return
        packets = [self.barrier[a.id] for a in active]
        policy = self.ps.step_sync(packets)
        for a, pk in zip(active, packets):
            self.log.emit("GradientApplied", self.now, agent=a.id, version=self.ps.version,
                          packet_version=pk.version, staleness=self.ps.version - 1 - pk.version)
            a.policy, a.version = policy, self.ps.version
            a.phase = "ready"
            a.ready_at = max(a.ready_at, self.now + (self.cfg.agent_step_seconds
                                                     if self.cfg.backend == "simulated" else 0.0))
        self.barrier.clear()
        self._maybe_checkpoint()

    def _maybe_checkpoint(self):
        every = self.cfg.checkpoint_every
        if self.run_dir is None or every <= 0 or self.ps.version % every:
            return
        path = self.run_dir / "checkpoints" / f"policy_{self.ps.version:06d}.bin"
        path.parent.mkdir(parents=True, exist_ok=True)
        save_policy(self.ps.policy, path)
        self.log.emit("Checkpoint", self.now, version=self.ps.version, path=str(path))

    # -- loop ------------------------------------------------------------
    def _react(self):
        """Process everything that can happen at the current instant."""
        changed = True
        while changed:
            changed = self._harvest()
            for agent in self.agents:
                if agent.phase == "waiting" and not agent.pending:
                    self._finish_batch(agent)
                    changed = True
            if self.monitor.should_stop():
                return "converged"
            for agent in self.agents:
                if agent.phase == "ready" and agent.ready_at <= self.now:
                    self._submit(agent)
                    changed = True
        if all(a.phase == "retired" for a in self.agents) and self.evaluator.pending == 0:
            return "max_evaluations"
        return None

    def _next_time(self):
        times = [a.ready_at for a in self.agents if a.phase == "ready"]
        nxt = self.evaluator.next_completion()
        if nxt is not None:
            times.append(nxt)
        return min(times) if times else None

    def run(self):
        budget = self.cfg.wall_clock_budget
        self.log.emit("SearchStarted", 0.0, config=self.cfg.to_dict(), space_size=str(self.space.size),
                      slots=list(self.space.arities))
        reason = "error"
        try:
            while True:
                reason = self._react()
                if reason:
                    break
                if self.cfg.backend == "simulated":
                    t = self._next_time()
                    if t is None:
                        raise RuntimeError("search stalled with no pending events")
                    if t >= budget:
                        self.now = budget
                        reason = "wall_clock"
                        break
                    self.evaluator.advance_to(t)
                    self.now = t
                else:
                    self.now = self.evaluator.now
                    if self.now >= budget:
                        reason = "wall_clock"
                        break
                    ready = [a.ready_at for a in self.agents if a.phase == "ready"]
                    wait = min([budget - self.now] + [max(0.0, r - self.now) for r in ready] + [0.5])
                    self.evaluator.wait(wait)
                    self.now = self.evaluator.now
        finally:
            for w, s, e, tid in self.evaluator.running_intervals(self.now):
                self.log.emit("WorkerBusyInterval", self.now, worker=w, start=s, end=e, task=tid,
                              truncated=True)
            self.log.emit("SearchEnded", self.now, reason=reason,
                          evaluations=self.submitted,
                          version=self.ps.version if self.ps else 0)
            self.log.flush()
            self.evaluator.close()
        return self.log


def run_search(config, log=None, run_dir=None):
    """Run a search and return its SearchLog.

    With ``run_dir`` the log is streamed to ``run_dir/log.jsonl`` and policy
    checkpoints land in ``run_dir/checkpoints``.
    """
    if log is None:
        log = SearchLog(Path(run_dir) / "log.jsonl" if run_dir else None)
    search = _Search(config, log, run_dir)
    try:
        search.run()
    finally:
        if run_dir:
            log.close()
    search.log.final_policy = search.ps.policy if search.ps else None
    return log
