import math

import pytest
from hypothesis import given, strategies as st

from rlnas.evaluator import (AgentCache, ClusterModel, ConstantDuration, EvalResult, EvalTask,
                             EvaluatorError, LocalEvaluator, SimulatedEvaluator, SyntheticBenchmark,
                             UniformDuration, interval_utilization, run_simulated)
from rlnas.netbench import FidelityBudget, SyntheticLandscape


class TableDurations:
    def __init__(self, table):
        self.table = table

    def __call__(self, encoding, seed=0):
        return self.table[tuple(encoding)]


def make_sim(workers=2, durations=None, latency=0.0):
    ls = SyntheticLandscape.generate((4, 4), seed=0)
    dm = durations or ConstantDuration(1.0)
    return SimulatedEvaluator(SyntheticBenchmark(ls, dm), ClusterModel(workers, latency))


def test_hand_scheduled_oracle():
    sched = run_simulated(ClusterModel(2), [(0, 1), (0, 1), (0, 1)])
    assert sched.makespan == 2
    assert interval_utilization(sched.intervals, 2, 0, 2) == pytest.approx(0.75)
    assert [t.worker for t in sched.tasks] == [0, 1, 0]


def test_single_task_fills_single_worker():
    sched = run_simulated(ClusterModel(1), [(0, 3.5)])
    assert interval_utilization(sched.intervals, 1, 0, 3.5) == 1.0


def test_timeout_holds_worker_for_exactly_the_timeout():
    sched = run_simulated(ClusterModel(1), [(0, 10.0, 4.0), (0, 1.0, 4.0)])
    assert sched.tasks[0].status == "timeout"
    assert sched.tasks[0].end - sched.tasks[0].start == 4.0
    assert sched.tasks[1].start == 4.0


def test_dispatch_latency_delays_start():
    sched = run_simulated(ClusterModel(1, dispatch_latency=0.5), [(1.0, 1.0)])
    assert sched.tasks[0].start == 1.5


@given(st.integers(1, 4),
       st.lists(st.tuples(st.floats(0, 20), st.floats(0.01, 10), st.floats(0.5, 12)), max_size=30))
def test_conservation_and_no_overlap(workers, items):
    items = sorted(items, key=lambda x: x[0])
    sched = run_simulated(ClusterModel(workers), items)
    busy = sum(e - s for _, s, e, _ in sched.intervals)
    assert busy == pytest.approx(sum(min(d, t) for _, d, t in items))
    for w in range(workers):
        ivs = sorted((s, e) for ww, s, e, _ in sched.intervals if ww == w)
        for (s1, e1), (s2, e2) in zip(ivs, ivs[1:]):
            assert e1 <= s2 + 1e-12
    for task, (ready, _, _) in zip(sched.tasks, items):
        assert task.start >= ready


def test_empty_batch_is_acknowledged():
    ev = make_sim()
    assert ev.add_eval_batch([]) == []
    assert ev.get_finished_evals() == [] and ev.busy_intervals == []


def test_nothing_pending_returns_empty():
    assert make_sim().get_finished_evals() == []


def test_same_agent_resubmission_hits_cache():
    ev = make_sim()
    ev.add_eval_batch([EvalTask(0, 0, (1, 2))])
    first = ev.await_evals()[0]
    ev.add_eval_batch([EvalTask(1, 0, (1, 2))])
    again = ev.get_finished_evals()
    assert len(again) == 1 and again[0].from_cache and again[0].reward == first.reward
    assert again[0].busy_time == 0.0 and len(ev.busy_intervals) == 1


def test_other_agent_is_evaluated_afresh():
    ev = make_sim()
    ev.add_eval_batch([EvalTask(0, 0, (1, 2))])
    ev.await_evals()
    ev.add_eval_batch([EvalTask(1, 1, (1, 2))])
    assert ev.get_finished_evals() == []
    res = ev.await_evals()
    assert not res[0].from_cache and len(ev.busy_intervals) == 2


def test_duplicates_within_a_batch_share_one_evaluation():
    ev = make_sim(workers=4)
    ev.add_eval_batch([EvalTask(0, 0, (3, 3)), EvalTask(1, 0, (3, 3))])
    res = ev.await_evals()
    assert [r.from_cache for r in res] == [False, True]
    assert len(ev.busy_intervals) == 1


def test_completion_order_and_exactly_once():
    table = {(0, 0): 3.0, (0, 1): 1.0, (0, 2): 2.0}
    ev = make_sim(workers=3, durations=TableDurations(table))
    ev.add_eval_batch([EvalTask(i, 0, enc) for i, enc in enumerate(table)])
    ev.advance_to(2.5)
    got = ev.get_finished_evals()
    assert [r.encoding for r in got] == [(0, 1), (0, 2)]
    assert ev.get_finished_evals() == []
    ev.advance_to(10)
    assert [r.task_id for r in ev.get_finished_evals()] == [0]
    assert ev.get_finished_evals() == []


def test_duplicate_live_task_id_is_an_error():
    ev = make_sim()
    ev.add_eval_batch([EvalTask(0, 0, (0, 0))])
    with pytest.raises(EvaluatorError):
        ev.add_eval_batch([EvalTask(0, 1, (1, 1))])


def test_timeouts_are_cached():
    ls = SyntheticLandscape.generate((2,), seed=0)
    ev = SimulatedEvaluator(SyntheticBenchmark(ls, ConstantDuration(9.0)), ClusterModel(1))
    budget = FidelityBudget(timeout=2.0)
    ev.add_eval_batch([EvalTask(0, 0, (1,), budget)])
    r = ev.await_evals()[0]
    assert r.status == "timeout" and r.reward == -1.0 and r.end - r.start == 2.0
    ev.add_eval_batch([EvalTask(1, 0, (1,), budget)])
    assert ev.get_finished_evals()[0].from_cache


def test_clock_never_moves_backwards():
    ev = make_sim()
    ev.advance_to(3)
    with pytest.raises(ValueError):
        ev.advance_to(1)


def test_uniform_durations_are_deterministic_and_bounded():
    dm = UniformDuration(1, 10, seed=3)
    values = [dm((i, j)) for i in range(5) for j in range(5)]
    assert all(1 <= v <= 10 for v in values)
    assert values == [dm((i, j)) for i in range(5) for j in range(5)]
    assert len(set(values)) == 25


def test_cache_is_per_agent():
    c = AgentCache()
    c.put(EvalResult(0, 0, (1,), "ok", 0.5, 1.0))
    assert (0, (1,)) in c and (1, (1,)) not in c
    assert c.size() == 1 and c.size(1) == 0


def test_result_validation():
    with pytest.raises(ValueError):
        EvalResult(0, 0, (1,), "ok", math.nan, 1.0)
    with pytest.raises(ValueError):
        EvalResult(0, 0, (1,), "lost", 0.0, 1.0)


def test_local_pool_backend_has_the_same_semantics():
    ls = SyntheticLandscape.generate((3, 3), seed=0)
    ev = LocalEvaluator(SyntheticBenchmark(ls, ConstantDuration(1.0)), workers=2)
    try:
        ev.add_eval_batch([EvalTask(0, 0, (1, 1)), EvalTask(1, 1, (1, 1))])
        fresh = sorted(ev.await_evals(), key=lambda r: r.task_id)
        assert [r.from_cache for r in fresh] == [False, False]
        assert fresh[0].reward == pytest.approx(ls.reward((1, 1)))
        ev.add_eval_batch([EvalTask(2, 0, (1, 1))])
        cached = ev.await_evals([2])
        assert cached[0].from_cache and cached[0].reward == fresh[0].reward
        assert ev.get_finished_evals() == []
    finally:
        ev.close()
