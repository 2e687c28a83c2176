"""Pure functions from search logs to reward, utilization and summary series."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from ..orchestrator.log import as_events


@dataclass(frozen=True)
class TrajectoryPoint:
    time: float
    reward: float
    best: float
    agent: int


@dataclass(frozen=True)
class TrajectoryBin:
    start: float
    end: float
    count: int
    max: float
    mean: float
    best: float


def _finished(events):
    evs = [e for e in events if e["type"] == "EvalFinished"]
    return sorted(evs, key=lambda e: e["t"])  # stable: log order breaks ties


def _end_time(events):
    ends = [e["t"] for e in events if e["type"] == "SearchEnded"]
    if ends:
        return ends[-1]
    return max((e["t"] for e in events), default=0.0)


def _workers(events, workers):
    if workers:
        return int(workers)
    cfg = next((e.get("config", {}) for e in events if e["type"] == "SearchStarted"), {})
    w = (cfg.get("cluster") or {}).get("workers")
    if w:
        return int(w)
    if cfg:
        return int(cfg.get("num_agents", 1)) * int(cfg.get("workers_per_agent", 1))
    ids = {e["worker"] for e in events if e["type"] == "WorkerBusyInterval"}
    return max(len(ids), 1)


def trajectory_points(log):
    """Every finished evaluation (cache hits included) with the running best."""
    best = -math.inf
    out = []
    for e in _finished(as_events(log)):
        best = max(best, e["reward"])
        out.append(TrajectoryPoint(e["t"], e["reward"], best, e["agent"]))
    return out


def _bin_edges(horizon, bin_seconds):
    n = max(1, math.ceil(horizon / bin_seconds)) if horizon > 0 else 1
    return [i * bin_seconds for i in range(n + 1)]


def trajectory(log, bin_seconds=60.0, horizon=None):
    """Per-bin max/mean reward and the global best-so-far at each bin's end.

    Bins without evaluations report nan for max/mean and carry the best
    forward (nan until the first evaluation). An empty log gives an empty
    series.
    """
    events = as_events(log)
    points = trajectory_points(events)
    if not points:
        return []
    horizon = horizon if horizon is not None else max(_end_time(events), points[-1].time)
    edges = _bin_edges(horizon, bin_seconds)
    out, best, i = [], -math.inf, 0
    for lo, hi in zip(edges, edges[1:]):
        last = hi == edges[-1]
        chunk = []
        while i < len(points) and (points[i].time < hi or last):
            chunk.append(points[i].reward)
            i += 1
        if chunk:
            best = max(best, max(chunk))
        out.append(TrajectoryBin(lo, hi, len(chunk),
                                 max(chunk) if chunk else math.nan,
                                 float(np.mean(chunk)) if chunk else math.nan,
                                 best if best > -math.inf else math.nan))
    return out


def busy_intervals(log):
    return [(e["worker"], e["start"], e["end"]) for e in as_events(log)
            if e["type"] == "WorkerBusyInterval"]


@dataclass(frozen=True)
class UtilizationBin:
    start: float
    end: float
    utilization: float


def utilization(log, bin_seconds=60.0, workers=None, horizon=None):
    """Busy worker-seconds per bin divided by bin length times worker count."""
    events = as_events(log)
    n = _workers(events, workers)
    intervals = busy_intervals(events)
    horizon = horizon if horizon is not None else _end_time(events)
    if horizon <= 0:
        return []
    edges = _bin_edges(horizon, bin_seconds)
    starts = np.array([iv[1] for iv in intervals])
    ends = np.array([iv[2] for iv in intervals])
    out = []
    for lo, hi in zip(edges, edges[1:]):
        busy = np.clip(np.minimum(ends, hi) - np.maximum(starts, lo), 0.0, None).sum() if intervals else 0.0
        out.append(UtilizationBin(lo, hi, float(min(1.0, busy / ((hi - lo) * n)))))
    return out


def utilization_at(log, times, workers=None):
    """Fraction of workers busy at each instant (interval [start, end) semantics)."""
    events = as_events(log)
    n = _workers(events, workers)
    intervals = busy_intervals(events)
    return [sum(1 for _, s, e in intervals if s <= t < e) / n for t in times]


def mean_utilization(log, workers=None, horizon=None):
    events = as_events(log)
    horizon = horizon if horizon is not None else _end_time(events)
    if horizon <= 0:
        return 0.0
    n = _workers(events, workers)
    busy = sum(max(0.0, min(e, horizon) - max(s, 0.0)) for _, s, e in busy_intervals(events))
    return busy / (horizon * n)


@dataclass(frozen=True)
class BandPoint:
    time: float
    quantiles: dict  # q -> value
    replications: int


def _best_at(points, times):
    ts = np.array([p.time for p in points])
    bs = np.array([p.best for p in points])
    idx = np.searchsorted(ts, times, side="right") - 1
    return np.where(idx >= 0, bs[np.maximum(idx, 0)] if len(bs) else np.nan, np.nan)


def _benchmark_key(events):
    """Space plus benchmark identity; a synthetic landscape seed defaults to the run seed."""
    cfg = next((e.get("config", {}) for e in events if e["type"] == "SearchStarted"), {})
    bench = dict(cfg.get("benchmark") or {})
    if bench.get("kind", "synthetic") == "synthetic":
        bench.setdefault("seed", cfg.get("seed", 0))
    return repr(cfg.get("space")), repr(sorted(bench.items()))


def quantile_bands(logs, quantiles=(0.1, 0.5, 0.9), bin_seconds=60.0, horizon=None):
    """Empirical quantiles (linear interpolation) of best-so-far across replications.

    Evaluated at the end of each time bin. Replications without any
    evaluation yet are left out of that bin.
    """
    logs = [as_events(log) for log in logs]
    if len(logs) < 2:
        raise ValueError("quantile bands need at least two replications")
    keys = {_benchmark_key(ev) for ev in logs}
    if len(keys) > 1:
        raise ValueError("replication logs come from different benchmarks")
    if horizon is None:
        horizon = max(_end_time(ev) for ev in logs)
    edges = np.array(_bin_edges(horizon, bin_seconds)[1:])
    curves = np.array([_best_at(trajectory_points(ev), edges) for ev in logs], dtype=float)
    out = []
    for j, t in enumerate(edges):
        col = curves[:, j]
        col = col[np.isfinite(col)]
        if len(col) == 0:
            continue
        qs = np.quantile(col, quantiles, method="linear")
        out.append(BandPoint(float(t), {float(q): float(v) for q, v in zip(quantiles, qs)}, len(col)))
    return out


@dataclass(frozen=True)
class TopEntry:
    encoding: tuple
    reward: float
    time: float
    agent: int


def top_k(log, k=50):
    """k best unique encodings by estimated reward.

    Duplicates keep their maximum reward (and the earliest time it was
    reached); ties go to the earlier time, then the lexicographically
    smaller encoding.
    """
    best = {}
    for e in _finished(as_events(log)):
        if e["status"] != "ok":
            continue
        enc = tuple(e["encoding"])
        cur = best.get(enc)
        if cur is None or e["reward"] > cur.reward:
            best[enc] = TopEntry(enc, e["reward"], e["t"], e["agent"])
    ranked = sorted(best.values(), key=lambda x: (-x.reward, x.time, x.encoding))
    return ranked[:k]


def stats(log):
    events = as_events(log)
    fin = _finished(events)
    ended = [e for e in events if e["type"] == "SearchEnded"]
    per_agent = {}
    for e in fin:
        per_agent.setdefault(e["agent"], set()).add(tuple(e["encoding"]))
    return {
        "evaluations": len(fin),
        "fresh_evaluations": sum(1 for e in fin if not e["from_cache"]),
        "cache_hits": sum(1 for e in fin if e["from_cache"]),
        "unique_architectures": len({tuple(e["encoding"]) for e in fin}),
        "unique_per_agent": {str(a): len(s) for a, s in sorted(per_agent.items())},
        "status_counts": dict(sorted(Counter(e["status"] for e in fin).items())),
        "best_reward": max((e["reward"] for e in fin), default=None),
        "gradient_updates": sum(1 for e in events if e["type"] == "GradientApplied"),
        "end_reason": ended[-1]["reason"] if ended else None,
        "end_time": _end_time(events),
        "mean_utilization": mean_utilization(events) if events else 0.0,
    }
