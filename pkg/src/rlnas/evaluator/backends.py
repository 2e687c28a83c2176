"""Evaluator front ends: a clock-driven simulated cluster and a local process pool.

Both expose the same three calls: ``add_eval_batch`` (never blocks),
``get_finished_evals`` (nonblocking, each result delivered once) and
``await_evals`` (blocks until the named tasks are done).
"""

from __future__ import annotations

import heapq
import itertools
import os
import threading
import time
from collections import deque
from concurrent.futures import ProcessPoolExecutor

from .cluster import ListScheduler
from .tasks import AgentCache, EvalResult


class EvaluatorError(RuntimeError):
    pass


class _EvaluatorBase:
    def __init__(self, benchmark, cache=None):
        self.benchmark = benchmark
        self.cache = cache if cache is not None else AgentCache()
        self.busy_intervals = []  # (worker, start, end, task_id)
        self._live = set()
        # (agent, encoding) -> follower tasks waiting on the same in-flight evaluation
        self._inflight = {}

    def _check_ids(self, tasks):
        ids = [t.task_id for t in tasks]
        if len(set(ids)) != len(ids) or self._live.intersection(ids):
            raise EvaluatorError("duplicate live task id")

    def _lookup(self, task):
        """Cached result, or True when it joined an in-flight twin, or None."""
        hit = self.cache.get(task.agent_id, task.encoding)
        if hit is not None:
            return hit
        key = (task.agent_id, task.encoding)
        if key in self._inflight:
            self._inflight[key].append(task)
            return True
        self._inflight[key] = []
        return None

    def _complete(self, result):
        """Record a fresh result and expand it with its followers."""
        self.cache.put(result)
        self.busy_intervals.append((result.worker, result.start, result.end, result.task_id))
        followers = self._inflight.pop((result.agent_id, result.encoding), [])
        out = [result] + [result.as_cached(t, result.end) for t in followers]
        for r in out:
            self._live.discard(r.task_id)
        return out

    @property
    def pending(self):
        return len(self._live)


class SimulatedEvaluator(_EvaluatorBase):
    """Deterministic cluster simulation; time only moves through ``advance_to``.

    Rewards are computed at submission; the scheduled busy interval decides
    when the result becomes visible.
    """

    def __init__(self, benchmark, cluster, cache=None):
        super().__init__(benchmark, cache)
        self.cluster = cluster
        self.scheduler = ListScheduler(cluster.workers, cluster.dispatch_latency)
        self.now = 0.0
        self._heap = []
        self._seq = itertools.count()

    def advance_to(self, t):
        if t < self.now:
            raise ValueError(f"simulation clock cannot move backwards ({t} < {self.now})")
        self.now = float(t)

    def next_completion(self):
        return self._heap[0][0] if self._heap else None

    def add_eval_batch(self, tasks):
        tasks = list(tasks)
        self._check_ids(tasks)
        for task in tasks:
            self._live.add(task.task_id)
            hit = self._lookup(task)
            if hit is True:
                continue
            if hit is not None:
                heapq.heappush(self._heap, (self.now, next(self._seq), hit.as_cached(task, self.now), False))
                continue
            out = self.benchmark.evaluate(task.encoding, task.budget, task.seed)
            w, start, end = self.scheduler.assign(self.now, out.duration)
            res = EvalResult(task.task_id, task.agent_id, task.encoding, out.status, out.reward,
                             out.duration, out.params, False, w, start, end)
            heapq.heappush(self._heap, (end, next(self._seq), res, True))
        return [t.task_id for t in tasks]

    def get_finished_evals(self):
        done = []
        while self._heap and self._heap[0][0] <= self.now:
            _, _, res, fresh = heapq.heappop(self._heap)
            if fresh:
                done.extend(self._complete(res))
            else:
                self._live.discard(res.task_id)
                done.append(res)
        return done

    def await_evals(self, task_ids=None):
        """Advance the clock until the given tasks (default: all) finish.

        Returns every result delivered along the way, so nothing is lost.
        """
        wanted = set(self._live if task_ids is None else task_ids)
        done = []
        while wanted & self._live:
            nxt = self.next_completion()
            if nxt is None:
                raise EvaluatorError("awaited tasks are not scheduled")
            self.advance_to(max(self.now, nxt))
            done.extend(self.get_finished_evals())
        return done + self.get_finished_evals()

    def running_intervals(self, until):
        """Busy intervals of undelivered tasks, clipped at ``until``."""
        out = []
        for _, _, res, fresh in self._heap:
            if fresh and res.start < until:
                out.append((res.worker, res.start, min(res.end, until), res.task_id))
        return sorted(out, key=lambda iv: (iv[1], iv[0]))

    def close(self):
        pass


_WORKER_BENCHMARK = None


def _init_worker(benchmark):
    global _WORKER_BENCHMARK
    _WORKER_BENCHMARK = benchmark


def _run_task(task):
    start = time.time()
    out = _WORKER_BENCHMARK.evaluate(task.encoding, task.budget, task.seed)
    return out, start, time.time(), os.getpid()


class LocalEvaluator(_EvaluatorBase):
    """Real evaluations in a pool of worker processes; timestamps in seconds since creation."""

    def __init__(self, benchmark, workers, cache=None):
        super().__init__(benchmark, cache)
        self.workers = workers
        self._pool = ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                                         initargs=(benchmark,))
        self._t0 = time.time()
        self._done = deque()
        self._cond = threading.Condition()
        self._pids = {}
        self._submitted = {}

    @property
    def now(self):
        return time.time() - self._t0

    def _worker_index(self, pid):
        return self._pids.setdefault(pid, len(self._pids))

    def _push(self, item):
        with self._cond:
            self._done.append(item)
            self._cond.notify_all()

    def add_eval_batch(self, tasks):
        tasks = list(tasks)
        self._check_ids(tasks)
        for task in tasks:
            self._live.add(task.task_id)
            hit = self._lookup(task)
            if hit is True:
                continue
            if hit is not None:
                self._push(("cached", hit.as_cached(task, self.now)))
                continue
            fut = self._pool.submit(_run_task, task)
            fut.add_done_callback(lambda f, task=task: self._push(("fresh", task, f)))
        return [t.task_id for t in tasks]

    def _convert(self, task, fut):
        try:
            out, start, end, pid = fut.result()
        except Exception as exc:  # worker crashed or benchmark raised
            raise EvaluatorError(f"evaluation of task {task.task_id} failed: {exc}") from exc
        return EvalResult(task.task_id, task.agent_id, task.encoding, out.status, out.reward,
                          out.duration, out.params, False, self._worker_index(pid),
                          start - self._t0, end - self._t0)

    def get_finished_evals(self):
        with self._cond:
            items = list(self._done)
            self._done.clear()
        done = []
        for item in items:
            if item[0] == "cached":
                self._live.discard(item[1].task_id)
                done.append(item[1])
            else:
                done.extend(self._complete(self._convert(item[1], item[2])))
        return done

    def wait(self, timeout=None):
        """Block until something is ready to collect or ``timeout`` passes."""
        with self._cond:
            if not self._done:
                self._cond.wait(timeout)
            return bool(self._done)

    def next_completion(self):
        return None

    def await_evals(self, task_ids=None):
        wanted = set(self._live if task_ids is None else task_ids)
        done = []
        while wanted & self._live:
            self.wait(0.5)
            done.extend(self.get_finished_evals())
        return done

    def running_intervals(self, until):
        return []

    def close(self):
        self._pool.shutdown(wait=True, cancel_futures=True)
