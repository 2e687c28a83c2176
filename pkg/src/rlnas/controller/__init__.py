"""LSTM controller, clipped PPO and Adam."""

from .adam import AdamState, adam_update
from .checkpoint import CheckpointError, load_policy, save_policy
from .policy import (PolicyDivergence, PolicyParams, Trajectory, action_distributions,
                     evaluate_actions, greedy_encoding, init_policy, sample_batch)
from .ppo import GradientPacket, loss_gradient, ppo_gradient, ppo_loss

__all__ = [
    "AdamState", "adam_update", "CheckpointError", "load_policy", "save_policy",
    "PolicyDivergence", "PolicyParams", "Trajectory", "action_distributions",
    "evaluate_actions", "greedy_encoding", "init_policy", "sample_batch",
    "GradientPacket", "loss_gradient", "ppo_gradient", "ppo_loss",
]
