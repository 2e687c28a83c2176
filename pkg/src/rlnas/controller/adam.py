"""Adam with bias correction over flat parameter vectors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    step: int = 0
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros(cls, n, lr=0.001, beta1=0.9, beta2=0.999, eps=1e-8):
        return cls(np.zeros(n), np.zeros(n), 0, lr, beta1, beta2, eps)

    def copy(self):
        return AdamState(self.m.copy(), self.v.copy(), self.step, self.lr, self.beta1,
                         self.beta2, self.eps)


def adam_update(params, state, grad):
    """Return updated params; ``state`` is advanced in place.

    An all-zero gradient only decays the moments and bumps the step counter;
    the parameters are returned unchanged.
    """
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != state.m.shape or np.shape(params) != grad.shape:
        raise ValueError(f"shape mismatch: params {np.shape(params)}, grad {grad.shape}, "
                         f"state {state.m.shape}")
    if not np.all(np.isfinite(grad)):
        raise ValueError("non-finite gradient")
    state.step += 1
    state.m *= state.beta1
    state.m += (1.0 - state.beta1) * grad
    state.v *= state.beta2
    state.v += (1.0 - state.beta2) * grad * grad
    if not grad.any():
        return np.array(params, dtype=np.float64, copy=True)
    m_hat = state.m / (1.0 - state.beta1 ** state.step)
    v_hat = state.v / (1.0 - state.beta2 ** state.step)
    return params - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
