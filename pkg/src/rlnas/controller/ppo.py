"""Clipped PPO objective, its gradient, and parameter-server packets."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .. import autograd as ag
from .adam import AdamState, adam_update
from .policy import evaluate_actions


@dataclass
class GradientPacket:
    grad: np.ndarray
    agent_id: int = 0
    version: int = 0
    batch_size: int = 0
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if not np.all(np.isfinite(self.grad)):
            raise ValueError("gradient packet contains non-finite values")


def _batch_arrays(trajectories, advantages):
    if not trajectories:
        raise ValueError("empty trajectory batch")
    actions = np.array([t.encoding for t in trajectories], dtype=np.int64)
    logp_old = np.array([t.logp for t in trajectories], dtype=np.float64)
    values_old = np.array([t.values for t in trajectories], dtype=np.float64)
    rewards = np.array([np.nan if t.reward is None else t.reward for t in trajectories], dtype=np.float64)
    if not np.all(np.isfinite(rewards)):
        raise ValueError("trajectory rewards must be set and finite")
    T = actions.shape[1]
    if advantages is None:
        # terminal reward broadcast to every step, critic baseline, gamma = 1
        adv = rewards[:, None] - values_old
    else:
        adv = np.broadcast_to(np.asarray(advantages, dtype=np.float64), (len(trajectories), T)).copy()
    return actions, logp_old, adv, rewards


def _loss_tensor(policy, theta, trajectories, clip, value_coef, entropy_coef, advantages=None):
    actions, logp_old, adv, rewards = _batch_arrays(trajectories, advantages)
    B, T = actions.shape
    logps, values, params = evaluate_actions(policy, theta, actions)
    rows = np.arange(B)
    if T:
        lp = ag.concat([ag.reshape(logps[t][rows, actions[:, t]], (-1, 1)) for t in range(T)], axis=1)
        ratio = ag.exp(lp - logp_old)
        unclipped = ratio * adv
        if math.isinf(clip):
            clipped = unclipped
        else:
            clipped = ag.clip(ratio, 1.0 - clip, 1.0 + clip) * adv
        policy_loss = -ag.mean(ag.minimum(unclipped, clipped))
        value_loss = ag.mean(ag.square(values - rewards[:, None]))
        ent = [-ag.sum(ag.exp(l) * l, axis=1) for l in logps]
        entropy = ag.mean(ag.concat([ag.reshape(e, (-1, 1)) for e in ent], axis=1))
        loss = policy_loss + value_coef * value_loss - entropy_coef * entropy
        r = ratio.data
        diag = {
            "policy_loss": float(policy_loss.data),
            "value_loss": float(value_loss.data),
            "entropy": float(entropy.data),
            "clip_fraction": float(np.mean(np.abs(r - 1.0) > clip)),
            "approx_kl": float(np.mean(logp_old - lp.data)),
        }
    else:
        loss = ag.Tensor(0.0)
        diag = {"policy_loss": 0.0, "value_loss": 0.0, "entropy": 0.0,
                "clip_fraction": 0.0, "approx_kl": 0.0}
    diag["loss"] = float(loss.data)
    return loss, params, diag


def ppo_loss(policy, trajectories, clip=0.2, value_coef=0.5, entropy_coef=0.01, advantages=None,
             theta=None):
    """Scalar PPO loss (to minimize) and diagnostics.

    loss = -mean(min(r A, clip(r, 1-eps, 1+eps) A)) + c_v mean((R - V)^2) - c_e mean(H)
    with r = exp(log pi - log pi_old) and A = R - V_old unless ``advantages``
    is given.
    """
    theta = policy.theta if theta is None else theta
    loss, _, diag = _loss_tensor(policy, theta, trajectories, clip, value_coef, entropy_coef, advantages)
    return float(loss.data), diag


def loss_gradient(policy, theta, trajectories, clip=0.2, value_coef=0.5, entropy_coef=0.01,
                  advantages=None):
    loss, params, diag = _loss_tensor(policy, theta, trajectories, clip, value_coef, entropy_coef,
                                      advantages)
    grad = np.zeros_like(theta)
    if loss.requires_grad:
        loss.backward()
        for name, t in params.items():
            if t.grad is not None:
                grad[policy.block_slice(name)] = t.grad.ravel()
    return float(loss.data), grad, diag


def ppo_gradient(policy, trajectories, clip=0.2, epochs=4, mode="first", lr=0.001,
                 value_coef=0.5, entropy_coef=0.01, advantages=None, agent_id=0, version=0):
    """Run ``epochs`` PPO passes on a local copy of the policy.

    mode="first" returns the gradient of the first pass (taken at the
    sampling parameters). mode="delta" returns the cumulative local change
    after all passes, rescaled by -1/lr so it can be applied like a gradient.
    """
    if mode not in ("first", "delta"):
        raise ValueError(f"unknown packet mode {mode!r}")
    theta = policy.theta.copy()
    state = AdamState.zeros(len(theta), lr=lr)
    first_grad, history = None, []
    for _ in range(max(1, epochs)):
        _, grad, diag = loss_gradient(policy, theta, trajectories, clip, value_coef, entropy_coef,
                                      advantages)
        history.append(diag)
        if first_grad is None:
            first_grad = grad
            if mode == "first" and epochs <= 1:
                break
        theta = adam_update(theta, state, grad)
    packet_grad = first_grad if mode == "first" else (policy.theta - theta) / lr
    diagnostics = dict(history[0])
    diagnostics["final_kl"] = history[-1]["approx_kl"]
    diagnostics["epochs"] = len(history)
    return GradientPacket(packet_grad, agent_id, version, len(trajectories), diagnostics)
