import json
from collections import Counter, defaultdict

import numpy as np
import pytest

from rlnas.analytics import trajectory_points
from rlnas.controller import AdamState, GradientPacket, adam_update, init_policy, load_policy
from rlnas.netbench import FidelityBudget, SyntheticLandscape
from rlnas.orchestrator import (ConfigError, ConvergenceMonitor, ParameterServer, PPOConfig,
                                SearchConfig, SearchLog, VersionMismatch, convergence_monitor,
                                run_search)


def synth(**kw):
    base = dict(strategy="a3c", num_agents=2, workers_per_agent=2, space={"arities": [4, 4, 4]},
                benchmark={"kind": "synthetic", "seed": 1}, max_evaluations=64)
    base.update(kw)
    return SearchConfig(**base)


def packet(grad, agent=0, version=0):
    return GradientPacket(np.asarray(grad, float), agent, version, 1)


@pytest.fixture
def policy():
    return init_policy((3, 2), 0, hidden=4, embed=2)


def test_sync_cancellation_leaves_params(policy):
    ps = ParameterServer(policy, lr=0.01)
    warm = np.linspace(-1, 1, policy.size)
    ps.step_sync([packet(warm, 0), packet(warm, 1)])
    before, m = ps.policy.theta.copy(), ps.adam.m.copy()
    g = np.random.default_rng(0).normal(size=policy.size)
    ps.step_sync([packet(g, 0, 1), packet(-g, 1, 1)])
    np.testing.assert_array_equal(ps.policy.theta, before)
    np.testing.assert_allclose(ps.adam.m, 0.9 * m)


def test_sync_single_agent_is_plain_adam(policy):
    g = np.random.default_rng(1).normal(size=policy.size)
    ps = ParameterServer(policy, lr=0.01)
    ps.step_sync([packet(g)])
    state = AdamState.zeros(policy.size, lr=0.01)
    np.testing.assert_array_equal(ps.policy.theta, adam_update(policy.theta, state, g))


def test_identical_packets_conserve_the_single_agent_trajectory(policy):
    rng = np.random.default_rng(2)
    one, three = ParameterServer(policy, lr=0.01), ParameterServer(policy, lr=0.01)
    for v in range(5):
        g = rng.normal(size=policy.size)
        one.step_sync([packet(g, 0, v)])
        three.step_sync([packet(g, a, v) for a in range(3)])
        np.testing.assert_array_equal(one.policy.theta, three.policy.theta)
    np.testing.assert_array_equal(one.adam.v, three.adam.v)


def test_sync_rejects_mixed_versions(policy):
    ps = ParameterServer(policy)
    g = np.ones(policy.size)
    with pytest.raises(VersionMismatch):
        ps.step_sync([packet(g, 0, 0), packet(g, 1, 1)])


def test_async_window_one_applies_each_packet_alone(policy):
    rng = np.random.default_rng(3)
    ps = ParameterServer(policy, lr=0.01, window=1)
    ref, state = policy.theta.copy(), AdamState.zeros(policy.size, lr=0.01)
    for v in range(4):
        g = rng.normal(size=policy.size)
        ps.step_async(packet(g, 0, v))
        ref = adam_update(ref, state, g)
    np.testing.assert_array_equal(ps.policy.theta, ref)


def test_async_first_packet_is_its_own_mean(policy):
    g = np.random.default_rng(4).normal(size=policy.size)
    ps = ParameterServer(policy, lr=0.01, window=4)
    ps.step_async(packet(g))
    np.testing.assert_array_equal(ps.policy.theta,
                                  adam_update(policy.theta, AdamState.zeros(policy.size, lr=0.01), g))


def test_async_window_averages_recent_packets(policy):
    rng = np.random.default_rng(5)
    gs = [rng.normal(size=policy.size) for _ in range(6)]
    ps = ParameterServer(policy, lr=0.01, window=4)
    ref, state = policy.theta.copy(), AdamState.zeros(policy.size, lr=0.01)
    for k, g in enumerate(gs):
        ps.step_async(packet(g, 0, k))
        ref = adam_update(ref, state, np.mean(gs[max(0, k - 3):k + 1], axis=0))
    np.testing.assert_allclose(ps.policy.theta, ref, rtol=0, atol=1e-15)
    assert len(ps.buffer) == 4


def test_async_staleness(policy):
    ps = ParameterServer(policy)
    g = np.ones(policy.size)
    for v in range(3):
        ps.step_async(packet(g, 1, v))
    _, staleness = ps.step_async(packet(g, 0, 0))
    assert staleness == 3


def test_monitor_counts_consecutive_cached_rounds():
    m = ConvergenceMonitor([0, 1], rounds=2)
    for _ in range(2):
        m.observe(0, True)
        m.observe(1, True)
    assert m.should_stop()
    m.observe(1, False)
    assert not m.should_stop()


def test_log_replay_convergence():
    def fin(batch, cached):
        return {"type": "EvalFinished", "agent": 0, "batch": batch, "from_cache": cached, "t": batch}
    events = [fin(0, False)] + [fin(b, True) for b in (1, 2, 3)]
    assert convergence_monitor(events, 3)
    assert not convergence_monitor(events + [fin(4, False)], 3)


def test_random_strategy_never_learns():
    log = run_search(synth(strategy="random"))
    assert log.of_type("GradientApplied") == []
    assert log.events[-1]["reason"] == "max_evaluations"


def test_tiny_space_converges_and_stops():
    cfg = synth(num_agents=1, workers_per_agent=1, space={"arities": [3, 2]}, max_evaluations=None,
                wall_clock_budget=1e6)
    log = run_search(cfg)
    end = log.events[-1]
    assert end["type"] == "SearchEnded" and end["reason"] == "converged"
    assert end["t"] < 1e6
    assert convergence_monitor(log.events, 3)


def test_random_search_on_huge_space_does_not_converge():
    log = run_search(synth(strategy="random", space="combo_small", max_evaluations=200))
    assert log.events[-1]["reason"] == "max_evaluations"


def test_identical_configs_give_identical_logs():
    cfg = synth(cluster={"duration_model": {"kind": "uniform", "lo": 1, "hi": 5}})
    assert run_search(cfg).events == run_search(cfg).events


def test_log_is_consistent():
    log = run_search(synth(num_agents=3))
    submitted = Counter(e["task"] for e in log.of_type("EvalSubmitted"))
    finished = Counter(e["task"] for e in log.of_type("EvalFinished"))
    assert submitted == finished and max(finished.values()) == 1
    per_agent = defaultdict(list)
    for e in log.events:
        if "agent" in e:
            per_agent[(e["type"], e["agent"])].append(e["t"])
    for times in per_agent.values():
        assert times == sorted(times)


def test_a2c_barrier_and_equal_versions():
    log = run_search(synth(strategy="a2c", num_agents=3, max_evaluations=None, wall_clock_budget=150.0,
                           cluster={"duration_model": {"kind": "uniform"}}))
    applied = log.of_type("GradientApplied")
    bursts = defaultdict(list)
    for e in applied:
        bursts[e["version"]].append(e)
    for v, burst in bursts.items():
        assert sorted(e["agent"] for e in burst) == [0, 1, 2]
        assert len({e["t"] for e in burst}) == 1
    # an agent only submits after the burst that served every agent the same version
    first_submit = defaultdict(dict)
    for e in log.of_type("EvalSubmitted"):
        first_submit[e["batch"]].setdefault(e["agent"], e["t"])
    for batch, starts in first_submit.items():
        assert len(set(starts.values())) == 1


def test_a3c_agents_do_not_wait_for_each_other():
    cfg = synth(num_agents=3, cluster={"duration_model": {"kind": "uniform", "lo": 1, "hi": 10}},
                agent_step_seconds=0.5)
    log = run_search(cfg)
    for agent in range(3):
        applied = [e["t"] for e in log.of_type("GradientApplied") if e["agent"] == agent]
        submits = sorted({(e["batch"], e["t"]) for e in log.of_type("EvalSubmitted")
                          if e["agent"] == agent})
        last_finish = {}
        for e in log.of_type("EvalFinished"):
            if e["agent"] == agent:
                last_finish[e["batch"]] = max(last_finish.get(e["batch"], 0), e["t"])
        for (batch, t) in submits[1:]:
            # next batch starts exactly one step after this agent's own batch completed
            assert t == pytest.approx(last_finish[batch - 1] + 0.5)
        assert len(applied) == len(last_finish)
    starts = {(e["agent"], e["batch"]): e["t"] for e in log.of_type("EvalSubmitted")}
    assert len({t for (a, b), t in starts.items() if b == 3}) > 1


def test_a3c_reaches_the_optimum_on_a_tiny_landscape():
    hits = 0
    for seed in range(5):
        cfg = synth(num_agents=2, workers_per_agent=4, space={"arities": [3, 3, 3]}, seed=seed,
                    benchmark={"kind": "synthetic", "seed": seed}, max_evaluations=160,
                    ppo=PPOConfig(lr=0.01))
        log = run_search(cfg)
        best = [p.best for p in trajectory_points(log)]
        assert best == sorted(best)
        optimum = SyntheticLandscape.generate((3, 3, 3), seed).optimum()[1]
        hits += best[-1] == pytest.approx(optimum)
    assert hits >= 4


def test_timeouts_enter_the_batch():
    cfg = synth(fidelity=FidelityBudget(timeout=5.0),
                cluster={"duration_model": {"kind": "uniform", "lo": 1, "hi": 10}})
    log = run_search(cfg)
    timeouts = [e for e in log.of_type("EvalFinished") if e["status"] == "timeout"]
    assert timeouts and all(e["reward"] == -1.0 for e in timeouts)
    assert log.of_type("GradientApplied")


def test_wall_clock_budget_truncates_busy_intervals():
    cfg = synth(max_evaluations=None, wall_clock_budget=7.0,
                cluster={"duration_model": {"kind": "constant", "value": 3.0}})
    log = run_search(cfg)
    assert log.events[-1]["reason"] == "wall_clock" and log.events[-1]["t"] == 7.0
    assert all(e["end"] <= 7.0 for e in log.of_type("WorkerBusyInterval"))
    assert any(e.get("truncated") for e in log.of_type("WorkerBusyInterval"))


def test_run_dir_streams_log_and_checkpoints(tmp_path):
    cfg = synth(checkpoint_every=4)
    log = run_search(cfg, run_dir=tmp_path)
    on_disk = SearchLog.read(tmp_path / "log.jsonl")
    assert on_disk.events == json.loads(json.dumps(log.events))
    ckpts = sorted((tmp_path / "checkpoints").iterdir())
    assert ckpts and load_policy(ckpts[-1]).arities == (4, 4, 4)
    assert len(log.of_type("Checkpoint")) == len(ckpts)


def test_corrupt_log_lines_are_reported(tmp_path):
    path = tmp_path / "log.jsonl"
    path.write_text('{"v":1,"type":"SearchStarted","t":0}\nnot json\n{"v":1,"type":"SearchEnded","t":1,"reason":"x"}\n')
    errors = []
    log = SearchLog.read(path, errors)
    assert len(log) == 2 and errors[0][0] == 2


def test_config_from_json_and_validation(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"strategy": "a2c", "num_agents": 3, "fidelity": {"epochs": 2, "timeout": None},
                                "ppo": {"clip": 0.3}, "wall_clock_budget": None, "max_evaluations": 30}))
    cfg = SearchConfig.load(path)
    assert cfg.strategy == "a2c" and cfg.fidelity.epochs == 2 and cfg.ppo.clip == 0.3
    assert SearchConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg
    for bad in ({"strategy": "ppo"}, {"num_agents": 0}, {"wall_clock_budget": -1}, {"colour": 1},
                {"ppo": {"packet_mode": "sum"}}):
        with pytest.raises(ConfigError):
            SearchConfig.from_dict(bad)


def test_local_backend_runs(tmp_path):
    cfg = synth(backend="local", max_evaluations=16)
    log = run_search(cfg)
    assert log.events[-1]["reason"] == "max_evaluations"
    assert len(log.of_type("EvalFinished")) == 16
