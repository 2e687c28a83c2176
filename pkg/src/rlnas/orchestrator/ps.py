"""Parameter server: canonical controller weights plus the single Adam state."""

from __future__ import annotations

from collections import deque

import numpy as np

from ..controller.adam import AdamState, adam_update


class VersionMismatch(ValueError):
    pass


class ParameterServer:
    """Serialized owner of the policy parameters.

    ``step_sync`` averages one packet per agent (A2C); ``step_async`` averages
    the sender's packet with the most recent ``window`` packets (A3C).
    """

    def __init__(self, policy, lr=0.001, window=4):
        self.policy = policy
        self.adam = AdamState.zeros(policy.size, lr=lr)
        self.version = 0
        self.window = window
        self.buffer = deque(maxlen=window)
        self.served = {}

    def _apply(self, grad):
        self.policy = self.policy.with_theta(adam_update(self.policy.theta, self.adam, grad))
        self.version += 1

    def step_sync(self, packets):
        packets = list(packets)
        if not packets:
            raise ValueError("step_sync needs at least one packet")
        versions = {p.version for p in packets}
        if len(versions) != 1:
            raise VersionMismatch(f"packets built on different policy versions {sorted(versions)}")
        grads = [p.grad for p in packets]
        if all(np.array_equal(grads[0], g) for g in grads[1:]):
            mean = grads[0].copy()  # exact, so N identical packets equal one
        else:
            mean = np.mean(grads, axis=0)
        self._apply(mean)
        for p in packets:
            self.served[p.agent_id] = self.version
        return self.policy

    def step_async(self, packet):
        """Returns (new policy for the sender, staleness of the packet)."""
        staleness = self.version - packet.version
        self.buffer.append(packet.grad)
        grad = self.buffer[0].copy() if len(self.buffer) == 1 else np.mean(self.buffer, axis=0)
        self._apply(grad)
        self.served[packet.agent_id] = self.version
        return self.policy, staleness
