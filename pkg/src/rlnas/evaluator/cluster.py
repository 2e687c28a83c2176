"""List-scheduling model of a pool of identical workers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .benchmarks import duration_model_from_dict


@dataclass(frozen=True)
class ClusterModel:
    workers: int
    dispatch_latency: float = 0.0
    duration_model: object = None

    def __post_init__(self):
        if self.workers < 1:
            raise ValueError("a cluster needs at least one worker")
        if self.dispatch_latency < 0:
            raise ValueError("dispatch latency must be non-negative")

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        dm = d.pop("duration_model", None)
        return cls(int(d.pop("workers")), float(d.pop("dispatch_latency", 0.0)),
                   duration_model_from_dict(dm) if dm is not None else None)


class ListScheduler:
    """Greedy FIFO dispatch onto the earliest available worker.

    A task submitted at ``ready`` starts at
    ``max(ready + dispatch_latency, worker_free)``. Every worker already idle
    at that moment counts as equally early, and the lowest index wins.
    """

    def __init__(self, workers, dispatch_latency=0.0):
        self.free = [0.0] * workers
        self.latency = dispatch_latency

    def assign(self, ready, busy):
        if not busy > 0:
            raise ValueError(f"task durations must be positive, got {busy}")
        earliest = ready + self.latency
        idle = [w for w, f in enumerate(self.free) if f <= earliest]
        w = idle[0] if idle else min(range(len(self.free)), key=lambda i: (self.free[i], i))
        start = max(earliest, self.free[w])
        end = start + busy
        self.free[w] = end
        return w, start, end


@dataclass(frozen=True)
class ScheduledTask:
    index: int
    worker: int
    start: float
    end: float
    status: str


@dataclass
class Schedule:
    tasks: list
    intervals: list = field(default_factory=list)  # (worker, start, end, index)

    @property
    def makespan(self):
        return max((t.end for t in self.tasks), default=0.0)


def run_simulated(cluster, workload):
    """Schedule ``workload`` on ``cluster``.

    ``workload`` items are ``(ready, duration)`` or ``(ready, duration,
    timeout)``, dispatched in list order. A task longer than its timeout
    holds its worker for exactly the timeout and ends with status timeout.
    """
    sched = ListScheduler(cluster.workers, cluster.dispatch_latency)
    out = Schedule([])
    for i, item in enumerate(workload):
        ready, duration = float(item[0]), float(item[1])
        timeout = float(item[2]) if len(item) > 2 else math.inf
        busy, status = (timeout, "timeout") if duration > timeout else (duration, "ok")
        w, start, end = sched.assign(ready, busy)
        out.tasks.append(ScheduledTask(i, w, start, end, status))
        out.intervals.append((w, start, end, i))
    return out


def interval_utilization(intervals, workers, t0, t1):
    """Busy fraction of ``workers`` over [t0, t1] given (worker, start, end, ...) tuples."""
    if t1 <= t0:
        return 0.0
    busy = sum(max(0.0, min(iv[2], t1) - max(iv[1], t0)) for iv in intervals)
    return busy / ((t1 - t0) * workers)
