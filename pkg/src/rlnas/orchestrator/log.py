"""Append-only JSON-lines event log.

Every event is one JSON object with ``v`` (schema version), ``type`` and
``t`` (seconds on the run clock) plus type-specific fields:

* SearchStarted: config
* EvalSubmitted: agent, task, batch, encoding
* EvalFinished: agent, task, batch, encoding, status, reward, duration, params, from_cache, worker
* WorkerBusyInterval: worker, start, end, task (``truncated`` when cut by the budget)
* GradientApplied: agent, version, packet_version, staleness
* Checkpoint: version, path
* SearchEnded: reason
"""

from __future__ import annotations

import json
import threading
from pathlib import Path

SCHEMA_VERSION = 1
EVENT_TYPES = ("SearchStarted", "EvalSubmitted", "EvalFinished", "WorkerBusyInterval",
               "GradientApplied", "Checkpoint", "SearchEnded")


class SearchLog:
    def __init__(self, path=None, events=None):
        self.events = list(events or [])
        self.path = Path(path) if path else None
        self._lock = threading.Lock()
        self._fh = None
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self._fh = self.path.open("w", encoding="utf-8")

    def emit(self, type_, t, **fields):
        if type_ not in EVENT_TYPES:
            raise ValueError(f"unknown event type {type_!r}")
        event = {"v": SCHEMA_VERSION, "type": type_, "t": float(t), **fields}
        line = json.dumps(event, sort_keys=True)
        with self._lock:
            self.events.append(event)
            if self._fh is not None:
                self._fh.write(line + "\n")
        return event

    def flush(self):
        with self._lock:
            if self._fh is not None:
                self._fh.flush()

    def close(self):
        with self._lock:
            if self._fh is not None:
                self._fh.close()
                self._fh = None

    def of_type(self, *types):
        return [e for e in self.events if e["type"] in types]

    def __len__(self):
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    @property
    def config(self):
        started = self.of_type("SearchStarted")
        return started[0].get("config", {}) if started else {}

    @classmethod
    def read(cls, path, errors=None):
        """Load a log file. Unparseable lines are skipped and reported as
        (line number, message) in ``errors`` when a list is passed."""
        events = []
        with Path(path).open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    ev = json.loads(line)
                    if not isinstance(ev, dict) or "type" not in ev or "t" not in ev:
                        raise ValueError("missing 'type' or 't'")
                except ValueError as exc:
                    if errors is not None:
                        errors.append((lineno, str(exc)))
                    continue
                events.append(ev)
        return cls(events=events)


def as_events(log):
    """Accept a SearchLog, an iterable of event dicts, or a path."""
    if isinstance(log, SearchLog):
        return log.events
    if isinstance(log, (str, Path)):
        return SearchLog.read(log).events
    return list(log)
