import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rlnas.analytics import (PRESET_BASELINES, BaselineRecord, post_train, quantile_bands,
                             ratio_row, stats, top_k, trajectory, trajectory_points, utilization,
                             utilization_at)
from rlnas.analytics.report import write_run_artifacts
from rlnas.analytics.output import csv_text, svg_lines
from rlnas.netbench import generate_dataset
from rlnas.orchestrator import SearchConfig, SearchLog, run_search
from rlnas.space import build_space, builtin_space


def fin(t, reward, enc=(0,), agent=0, status="ok", cached=False):
    return {"type": "EvalFinished", "t": t, "reward": reward, "encoding": list(enc), "agent": agent,
            "status": status, "from_cache": cached, "task": int(t * 1000)}


def started(workers=2, space="combo_small"):
    return {"type": "SearchStarted", "t": 0.0,
            "config": {"num_agents": 1, "workers_per_agent": workers, "space": space,
                       "benchmark": {"kind": "synthetic"}}}


def busy(worker, start, end):
    return {"type": "WorkerBusyInterval", "t": end, "worker": worker, "start": start, "end": end}


def ended(t):
    return {"type": "SearchEnded", "t": t, "reason": "wall_clock"}


def test_running_best_example():
    log = [fin(1, 0.1), fin(2, 0.3), fin(3, 0.2)]
    assert [p.best for p in trajectory_points(log)] == [0.1, 0.3, 0.3]
    bins = trajectory(log, bin_seconds=2.0)
    assert [b.best for b in bins] == [0.1, 0.3]
    assert [b.count for b in bins] == [1, 2]
    assert bins[1].max == 0.3 and bins[1].mean == pytest.approx(0.25)


def test_empty_log_gives_empty_series():
    assert trajectory([]) == []
    assert trajectory([started(), ended(10.0)]) == []


def test_cached_results_are_part_of_the_trajectory():
    log = [fin(1, 0.2), fin(2, 0.5, cached=True)]
    assert trajectory_points(log)[-1].best == 0.5


def test_leading_empty_bins_have_no_best():
    bins = trajectory([fin(5, 0.4), ended(6)], bin_seconds=2.0)
    assert math.isnan(bins[0].best) and bins[-1].best == 0.4


def test_utilization_examples():
    log = [started(workers=2), busy(0, 0, 10), busy(1, 0, 10), busy(0, 20, 30), ended(30)]
    series = [b.utilization for b in utilization(log, bin_seconds=10.0)]
    assert series == [1.0, 0.0, 0.5]
    assert utilization_at(log, [5, 15, 25]) == [1.0, 0.0, 0.5]


def test_hand_scheduled_utilization():
    # 2 workers, 3 unit tasks: makespan 2, busy 3 of 4 worker-seconds
    log = [started(workers=2), busy(0, 0, 1), busy(1, 0, 1), busy(0, 1, 2), ended(2)]
    assert utilization(log, bin_seconds=2.0)[0].utilization == 0.75


@given(st.lists(st.tuples(st.integers(0, 3), st.floats(0, 50), st.floats(0, 20)), max_size=30),
       st.floats(0.5, 30))
def test_utilization_is_bounded(raw, bin_seconds):
    # non-overlapping intervals per worker, as produced by any scheduler
    clock = [0.0] * 4
    events = [started(workers=4)]
    for w, gap, dur in raw:
        s = clock[w] + gap
        clock[w] = s + dur
        events.append(busy(w, s, s + dur))
    events.append(ended(max(clock) + 1))
    for b in utilization(events, bin_seconds=bin_seconds):
        assert 0.0 <= b.utilization <= 1.0


def test_identical_replications_give_coincident_bands():
    log = [started(), fin(1, 0.1), fin(5, 0.7), ended(10)]
    bands = quantile_bands([log] * 10, bin_seconds=2.0)
    for b in bands:
        assert len(set(b.quantiles.values())) == 1


def test_median_interpolates():
    a = [started(), fin(1, 0.0), ended(2)]
    b = [started(), fin(1, 1.0), ended(2)]
    (band,) = quantile_bands([a, b], bin_seconds=2.0)
    assert band.quantiles[0.5] == 0.5


def test_bands_need_two_replications_of_one_benchmark():
    with pytest.raises(ValueError):
        quantile_bands([[started(), fin(1, 0.1)]])
    with pytest.raises(ValueError):
        quantile_bands([[started(space="a"), fin(1, 0.1)], [started(space="b"), fin(1, 0.2)]])


@given(st.lists(st.lists(st.tuples(st.floats(0, 100), st.floats(-1, 1)), min_size=1, max_size=15),
                min_size=2, max_size=6))
def test_bands_are_ordered(runs):
    logs = [[started()] + [fin(t, r) for t, r in sorted(run)] for run in runs]
    for b in quantile_bands(logs, bin_seconds=10.0, horizon=100.0):
        q = b.quantiles
        assert q[0.1] <= q[0.5] <= q[0.9]


def test_top_k_dedup_and_ties():
    log = [fin(1, 0.4, (1, 1)), fin(2, 0.6, (1, 1)), fin(3, 0.6, (0, 2)), fin(4, 0.6, (0, 1)),
           fin(5, 0.9, (2, 2), status="timeout")]
    top = top_k(log, 10)
    assert [e.encoding for e in top] == [(1, 1), (0, 2), (0, 1)]
    assert top[0].reward == 0.6 and top[0].time == 2
    assert len(top_k(log, 2)) == 2


def test_top_k_breaks_time_ties_lexicographically():
    log = [fin(1, 0.5, (2, 0)), fin(1, 0.5, (1, 3))]
    assert [e.encoding for e in top_k(log)] == [(1, 3), (2, 0)]


@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3), st.floats(0, 1), st.integers(0, 9)),
                min_size=1, max_size=40), st.integers(1, 20))
def test_top_k_order_property(rows, k):
    log = [fin(t, r, (a, b)) for a, b, r, t in rows]
    top = top_k(log, k)
    assert len(top) <= k and len({e.encoding for e in top}) == len(top)
    keys = [(-e.reward, e.time, e.encoding) for e in top]
    assert keys == sorted(keys) and len(set(keys)) == len(keys)


def test_ratio_examples():
    combo = PRESET_BASELINES["combo"]
    assert ratio_row(0, 0.9, 1_883_301, 1.0, combo).param_ratio == pytest.approx(7.31, abs=5e-3)
    uno = PRESET_BASELINES["uno"]
    assert ratio_row(0, 0.6, 1000, 63.53, uno).time_ratio == pytest.approx(2.596, abs=5e-4)
    same = ratio_row(3, combo.accuracy, combo.params, combo.train_time, combo)
    assert (same.accuracy_ratio, same.param_ratio, same.time_ratio) == (1.0, 1.0, 1.0)


def test_baseline_record_round_trip(tmp_path):
    rec = BaselineRecord("x", 10, 2.5, 0.8)
    rec.save(tmp_path / "b.json")
    assert BaselineRecord.load(tmp_path / "b.json") == rec
    with pytest.raises(ValueError):
        BaselineRecord("bad", 0, 1.0, 1.0)


def test_stats_counts():
    log = [started(), fin(1, 0.1, (0,)), fin(2, 0.1, (0,), cached=True), fin(3, -1, (1,), agent=1,
                                                                             status="timeout"),
           {"type": "GradientApplied", "t": 3, "agent": 0}, ended(4)]
    s = stats(log)
    assert s["evaluations"] == 3 and s["cache_hits"] == 1 and s["unique_architectures"] == 2
    assert s["status_counts"] == {"ok": 2, "timeout": 1}
    assert s["gradient_updates"] == 1 and s["end_reason"] == "wall_clock"


def test_artifacts_are_byte_identical(tmp_path):
    cfg = SearchConfig(space={"arities": [4, 4]}, num_agents=2, workers_per_agent=2,
                       max_evaluations=40, cluster={"duration_model": {"kind": "uniform"}})
    run_search(cfg, run_dir=tmp_path / "run")
    log = SearchLog.read(tmp_path / "run" / "log.jsonl")
    outputs = []
    for name in ("a", "b"):
        write_run_artifacts(log, tmp_path / name, bin_seconds=5.0)
        outputs.append({p.name: p.read_bytes() for p in sorted((tmp_path / name).iterdir())})
    assert outputs[0] == outputs[1]
    assert {"trajectory.csv", "utilization.csv", "topk.json", "stats.json"} <= set(outputs[0])


def test_csv_and_svg_writers():
    assert csv_text(["a", "b"], [[1, 0.5], [2, float("nan")]]) == "a,b\n1,0.5\n2,nan\n"
    svg = svg_lines({"best": [(0, 0.1), (1, 0.4)]}, title="t")
    assert svg.startswith("<svg") and "polyline" in svg
    assert "polyline" not in svg_lines({"empty": []})


def test_post_train_records_failures_and_continues():
    data = generate_dataset("combo-mini", seed=0, rows=200)
    space = build_space(builtin_space("combo_small", data.input_dims, unit_scale=0.05))
    good = (0,) * len(space.arities)
    bad = (99,) * len(space.arities)
    report = post_train(space, [good, bad, good], data, PRESET_BASELINES["combo"], epochs=2)
    assert [m["status"] for m in report.metrics] == ["ok", "failed", "ok"]
    assert [r.arch_id for r in report.rows] == [0, 2]
    assert all(r.param_ratio > 0 and r.time_ratio > 0 for r in report.rows)
