"""Stop the search once agents only resample what they already evaluated."""

from __future__ import annotations

from collections import defaultdict


class ConvergenceMonitor:
    """Tracks, per agent, the run of consecutive batches served fully from cache."""

    def __init__(self, agents, rounds=3):
        self.rounds = rounds
        self.streak = {a: 0 for a in agents}

    def observe(self, agent, all_cached):
        self.streak[agent] = self.streak[agent] + 1 if all_cached else 0

    def retire(self, agent):
        self.streak.pop(agent, None)

    def should_stop(self):
        return self.rounds > 0 and bool(self.streak) and \
            all(s >= self.rounds for s in self.streak.values())


def convergence_monitor(events, rounds=3):
    """Replay a log; True when every agent's last ``rounds`` batches were all cache hits."""
    batches = defaultdict(dict)
    for ev in events:
        if ev["type"] == "EvalFinished":
            key = (ev["agent"], ev["batch"])
            batches[ev["agent"]].setdefault(key, True)
            batches[ev["agent"]][key] &= bool(ev["from_cache"])
    if not batches or rounds < 1:
        return False
    for per_agent in batches.values():
        flags = list(per_agent.values())
        if len(flags) < rounds or not all(flags[-rounds:]):
            return False
    return True
