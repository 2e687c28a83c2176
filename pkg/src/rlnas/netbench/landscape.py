"""Deterministic synthetic reward landscapes for fast strategy testing."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SyntheticLandscape:
    """reward = (sum of per-slot scores + pairwise terms - lo) / (hi - lo).

    ``lo``/``hi`` are the sums of per-table minima/maxima, so the reward lies
    in [0, 1] for every encoding without enumerating the space.
    """

    arities: tuple
    tables: tuple
    interactions: tuple  # (slot_i, slot_j, matrix of shape (arity_i, arity_j))
    lo: float
    hi: float
    seed: int = 0

    @classmethod
    def generate(cls, arities, seed=0, num_interactions=0, interaction_scale=0.5):
        arities = tuple(int(a) for a in arities)
        rng = np.random.default_rng(seed)
        tables = tuple(rng.normal(size=a) for a in arities)
        pairs = []
        k = len(arities)
        if k >= 2:
            for _ in range(num_interactions):
                i, j = sorted(rng.choice(k, size=2, replace=False).tolist())
                pairs.append((i, j, interaction_scale * rng.normal(size=(arities[i], arities[j]))))
        lo = sum(t.min() for t in tables) + sum(m.min() for _, _, m in pairs)
        hi = sum(t.max() for t in tables) + sum(m.max() for _, _, m in pairs)
        if hi == lo:
            hi = lo + 1.0
        return cls(arities, tables, tuple(pairs), float(lo), float(hi), seed)

    def raw(self, encoding):
        s = sum(float(t[e]) for t, e in zip(self.tables, encoding))
        return s + sum(float(m[encoding[i], encoding[j]]) for i, j, m in self.interactions)

    def reward(self, encoding):
        return synthetic_reward(self, encoding)

    def all_rewards(self):
        """Reward of every encoding as an array indexed by the encoding."""
        total = np.zeros(self.arities)
        k = len(self.arities)
        for slot, t in enumerate(self.tables):
            shape = [1] * k
            shape[slot] = len(t)
            total = total + t.reshape(shape)
        for i, j, m in self.interactions:
            shape = [1] * k
            shape[i], shape[j] = m.shape
            total = total + m.reshape(shape)
        return (total - self.lo) / (self.hi - self.lo)

    def optimum(self, max_size=10**6):
        """(best encoding, best reward) by exhaustive search."""
        if math.prod(self.arities) > max_size:
            raise ValueError("space too large for exhaustive search")
        values = self.all_rewards()
        idx = np.unravel_index(int(np.argmax(values)), values.shape)
        return tuple(int(i) for i in idx), float(values[idx])


def synthetic_reward(landscape, encoding):
    enc = tuple(int(e) for e in encoding)
    if len(enc) != len(landscape.arities) or any(not 0 <= e < a for e, a in zip(enc, landscape.arities)):
        raise ValueError(f"encoding {enc} does not match arities {landscape.arities}")
    r = (landscape.raw(enc) - landscape.lo) / (landscape.hi - landscape.lo)
    return min(1.0, max(0.0, r))
