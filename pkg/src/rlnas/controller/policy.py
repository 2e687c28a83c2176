"""Autoregressive LSTM policy with per-slot categorical heads and a critic."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .. import autograd as ag


class PolicyDivergence(FloatingPointError):
    """Raised when the policy emits non-finite logits."""


@dataclass(frozen=True)
class PolicyParams:
    theta: np.ndarray
    layout: tuple  # ((name, offset, shape), ...)
    arities: tuple
    hidden: int
    embed: int
    separate_critic: bool = False

    def __post_init__(self):
        object.__setattr__(self, "_index", {name: (off, shape) for name, off, shape in self.layout})

    @property
    def size(self):
        return len(self.theta)

    def block(self, name, theta=None):
        off, shape = self._index[name]
        src = self.theta if theta is None else theta
        return src[off:off + math.prod(shape)].reshape(shape)

    def block_slice(self, name):
        off, shape = self._index[name]
        return slice(off, off + math.prod(shape))

    def with_theta(self, theta):
        theta = np.asarray(theta, dtype=np.float64)
        if theta.shape != self.theta.shape:
            raise ValueError("parameter vector has the wrong length")
        return PolicyParams(theta.copy(), self.layout, self.arities, self.hidden, self.embed,
                            self.separate_critic)

    def token_offsets(self):
        """Embedding row of choice 0 for each slot; row 0 is the start token."""
        return tuple(1 + sum(self.arities[:k]) for k in range(len(self.arities)))


@dataclass
class Trajectory:
    encoding: tuple
    logp: np.ndarray
    values: np.ndarray
    reward: float | None = None
    entropy: np.ndarray = field(default=None, repr=False)


def _layout(arities, hidden, embed, separate_critic):
    blocks = [("embed", (1 + sum(arities), embed)),
              ("lstm_w", (embed + hidden, 4 * hidden)),
              ("lstm_b", (4 * hidden,))]
    if separate_critic:
        blocks += [("critic_lstm_w", (embed + hidden, 4 * hidden)),
                   ("critic_lstm_b", (4 * hidden,))]
    for k, a in enumerate(arities):
        blocks += [(f"head{k}_w", (hidden, a)), (f"head{k}_b", (a,))]
    blocks += [("critic_w", (hidden, 1)), ("critic_b", (1,))]
    out, off = [], 0
    for name, shape in blocks:
        out.append((name, off, shape))
        off += math.prod(shape)
    return tuple(out), off


def init_policy(space, seed=0, hidden=32, embed=16, init_scale=0.1, separate_critic=False):
    """Uniform(-init_scale, init_scale) weights, zero biases; deterministic per seed."""
    arities = tuple(space.arities) if hasattr(space, "arities") else tuple(space)
    layout, n = _layout(arities, hidden, embed, separate_critic)
    rng = np.random.default_rng(seed)
    theta = np.zeros(n)
    for name, off, shape in layout:
        if name.endswith("_b"):
            continue
        size = math.prod(shape)
        theta[off:off + size] = rng.uniform(-init_scale, init_scale, size=size)
    return PolicyParams(theta, layout, arities, hidden, embed, separate_critic)


def _lstm_step(x, h, c, w, b, hidden):
    z = ag.concat([x, h], axis=1) @ w + b
    i = ag.sigmoid(z[:, :hidden])
    f = ag.sigmoid(z[:, hidden:2 * hidden])
    g = ag.tanh(z[:, 2 * hidden:3 * hidden])
    o = ag.sigmoid(z[:, 3 * hidden:])
    c = f * c + i * g
    h = o * ag.tanh(c)
    return h, c


def _tensors(policy, theta, requires_grad):
    make = ag.parameter if requires_grad else ag.Tensor
    return {name: make(policy.block(name, theta)) for name, _, _ in policy.layout}


class _Rollout:
    """Step-by-step evaluation of the policy for a batch of sequences."""

    def __init__(self, policy, params, batch):
        self.policy, self.p, self.batch = policy, params, batch
        H = policy.hidden
        self.h = self.c = ag.Tensor(np.zeros((batch, H)))
        self.hc = self.cc = self.h
        self.offsets = policy.token_offsets()

    def step(self, t, prev_actions):
        pol, p = self.policy, self.p
        if t == 0:
            tokens = np.zeros(self.batch, dtype=np.int64)
        else:
            tokens = self.offsets[t - 1] + np.asarray(prev_actions, dtype=np.int64)
        x = p["embed"][tokens]
        self.h, self.c = _lstm_step(x, self.h, self.c, p["lstm_w"], p["lstm_b"], pol.hidden)
        logits = self.h @ p[f"head{t}_w"] + p[f"head{t}_b"]
        if pol.separate_critic:
            self.hc, self.cc = _lstm_step(x, self.hc, self.cc, p["critic_lstm_w"],
                                          p["critic_lstm_b"], pol.hidden)
            trunk = self.hc
        else:
            trunk = self.h
        value = (trunk @ p["critic_w"] + p["critic_b"])[:, 0]
        if not np.all(np.isfinite(logits.data)):
            raise PolicyDivergence(f"non-finite logits at slot {t}")
        return ag.log_softmax(logits, axis=1), value


def sample_batch(policy, space, M, rng):
    """Sample ``M`` architectures autoregressively; rewards left unset."""
    arities = tuple(space.arities) if hasattr(space, "arities") else tuple(space)
    if arities != policy.arities:
        raise ValueError("policy is bound to a different space")
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    T = len(arities)
    roll = _Rollout(policy, _tensors(policy, policy.theta, False), M)
    actions = np.zeros((M, T), dtype=np.int64)
    logp = np.zeros((M, T))
    values = np.zeros((M, T))
    entropy = np.zeros((M, T))
    prev = None
    for t in range(T):
        lp, v = roll.step(t, prev)
        probs = np.exp(lp.data)
        probs /= probs.sum(axis=1, keepdims=True)
        # inverse-CDF sampling, one uniform per row
        u = rng.random(M)
        a = np.minimum((probs.cumsum(axis=1) < u[:, None]).sum(axis=1), arities[t] - 1)
        actions[:, t] = a
        logp[:, t] = lp.data[np.arange(M), a]
        values[:, t] = v.data
        entropy[:, t] = -(probs * lp.data).sum(axis=1)
        prev = a
    return [Trajectory(tuple(int(x) for x in actions[m]), logp[m], values[m], None, entropy[m])
            for m in range(M)]


def action_distributions(policy, encodings):
    """Per-slot probability vectors along the given action sequences."""
    actions = np.asarray(encodings, dtype=np.int64).reshape(len(encodings), -1)
    roll = _Rollout(policy, _tensors(policy, policy.theta, False), len(actions))
    out = []
    for t in range(len(policy.arities)):
        lp, _ = roll.step(t, actions[:, t - 1] if t else None)
        out.append(np.exp(lp.data))
    return out


def evaluate_actions(policy, theta, actions, requires_grad=True):
    """Teacher-forced pass: (log-prob matrices per slot, values (B, T), leaf tensors)."""
    actions = np.asarray(actions, dtype=np.int64)
    params = _tensors(policy, theta, requires_grad)
    roll = _Rollout(policy, params, len(actions))
    logps, values = [], []
    for t in range(len(policy.arities)):
        lp, v = roll.step(t, actions[:, t - 1] if t else None)
        logps.append(lp)
        values.append(ag.reshape(v, (-1, 1)))
    return logps, ag.concat(values, axis=1), params


def greedy_encoding(policy):
    """Most likely action at every step (teacher-forced on its own argmax)."""
    roll = _Rollout(policy, _tensors(policy, policy.theta, False), 1)
    prev, enc = None, []
    for t in range(len(policy.arities)):
        lp, _ = roll.step(t, prev)
        a = int(np.argmax(lp.data[0]))
        enc.append(a)
        prev = np.array([a])
    return tuple(enc)
