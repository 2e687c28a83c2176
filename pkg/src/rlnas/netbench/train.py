"""Low-fidelity training and scoring of compiled programs."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .. import autograd as ag
from ..controller.adam import AdamState, adam_update


@dataclass(frozen=True)
class FidelityBudget:
    epochs: int = 1
    subset_fraction: float = 1.0
    timeout: float = math.inf
    batch_size: int = 32
    lr: float = 0.001

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be positive")
        if not 0.0 < self.subset_fraction <= 1.0:
            raise ValueError(f"subset_fraction must lie in (0, 1], got {self.subset_fraction}")
        if not self.timeout > 0:
            raise ValueError("timeout must be positive")

    def to_dict(self):
        return {"epochs": self.epochs, "subset_fraction": self.subset_fraction,
                "timeout": None if math.isinf(self.timeout) else self.timeout,
                "batch_size": self.batch_size, "lr": self.lr}

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if d.get("timeout") is None:
            d["timeout"] = math.inf
        return cls(**d)


@dataclass(frozen=True)
class CostModel:
    """Deterministic stand-in for wall time: seconds proportional to FLOPs.

    A training step costs three forward passes (forward + backward) over
    the batch plus a fixed per-step overhead.
    """

    flops_per_second: float = 1e8
    step_overhead: float = 1e-3

    def step_seconds(self, program, rows):
        return 3.0 * program.flops_per_sample * rows / self.flops_per_second + self.step_overhead

    def eval_seconds(self, program, rows):
        return program.flops_per_sample * rows / self.flops_per_second


@dataclass
class TrainOutcome:
    status: str
    reward: float
    duration: float
    params: int
    metric: float = float("nan")
    loss_history: list = field(default_factory=list)
    weights: np.ndarray | None = None


def r2_score(y_true, y_pred):
    y_true = np.asarray(y_true, dtype=np.float64).ravel()
    y_pred = np.asarray(y_pred, dtype=np.float64).ravel()
    ss_res = np.sum((y_true - y_pred) ** 2)
    ss_tot = np.sum((y_true - y_true.mean()) ** 2)
    if ss_tot == 0:
        return 1.0 if ss_res == 0 else 0.0
    return float(1.0 - ss_res / ss_tot)


def accuracy(labels, logits):
    return float(np.mean(np.argmax(logits, axis=1) == np.asarray(labels)))


def loss_value(program, out, y):
    if program.loss == "cross_entropy":
        logp = ag.log_softmax(out, axis=1)
        picked = logp[np.arange(len(y)), np.asarray(y, dtype=np.int64)]
        return -ag.mean(picked)
    diff = out - np.asarray(y, dtype=np.float64).reshape(out.shape)
    return ag.mean(ag.square(diff))


def _batch(inputs, idx):
    return {k: v[idx] for k, v in inputs.items()}


def predict(program, weights, inputs, batch_size=512):
    blocks = {k: (ag.Tensor(w), ag.Tensor(b)) for k, (w, b) in program.unflatten(weights).items()}
    n = len(next(iter(inputs.values())))
    outs = [program.forward(_batch(inputs, slice(i, i + batch_size)), blocks).data
            for i in range(0, n, batch_size)]
    return np.concatenate(outs, axis=0)


def dataset_loss(program, weights, inputs, y):
    out = ag.Tensor(predict(program, weights, inputs))
    return float(loss_value(program, out, y).data)


def loss_and_grad(program, weights, batch, y, training=False, rng=None):
    blocks = {k: (ag.parameter(w), ag.parameter(b)) for k, (w, b) in program.unflatten(weights).items()}
    loss = loss_value(program, program.forward(batch, blocks, training, rng), y)
    loss.backward()
    return float(loss.data), program.flatten_grads(blocks)


def train_and_score(program, dataset, budget=FidelityBudget(), seed=0, cost_model=None,
                    track_loss=False, keep_weights=False):
    """Train ``program`` under ``budget`` and score it on the validation split.

    Elapsed time is measured on the wall clock, or accumulated from
    ``cost_model`` when one is given (deterministic). The timeout is checked
    after every batch; hitting it yields status ``timeout`` and reward -1.
    Regression reward is validation R^2 clamped to [-1, 1]; classification
    reward is validation accuracy.
    """
    # overflow is expected for diverging models and is reported as status "failed"
    with np.errstate(over="ignore", invalid="ignore"):
        return _train_and_score(program, dataset, budget, seed, cost_model, track_loss, keep_weights)


def _train_and_score(program, dataset, budget, seed, cost_model, track_loss, keep_weights):
    dataset.check_inputs(program.inputs)
    rng = np.random.default_rng(seed)
    weights = program.init_params(rng)
    n = len(dataset.train_y)
    n_sub = max(1, int(round(budget.subset_fraction * n)))
    rows = np.arange(n) if n_sub == n else np.sort(rng.choice(n, size=n_sub, replace=False))
    train_x, train_y = _batch(dataset.train_inputs, rows), dataset.train_y[rows]
    state = AdamState.zeros(program.num_params, lr=budget.lr)

    start = time.perf_counter()
    simulated = 0.0

    def elapsed():
        return simulated if cost_model is not None else time.perf_counter() - start

    history = [dataset_loss(program, weights, train_x, train_y)] if track_loss else []
    nparams = program.num_params
    for _ in range(budget.epochs):
        order = rng.permutation(n_sub)
        for i in range(0, n_sub, budget.batch_size):
            idx = order[i:i + budget.batch_size]
            loss, grad = loss_and_grad(program, weights, _batch(train_x, idx), train_y[idx],
                                       training=True, rng=rng)
            if not (math.isfinite(loss) and np.all(np.isfinite(grad))):
                return TrainOutcome("failed", -1.0, elapsed(), nparams, loss_history=history)
            weights = adam_update(weights, state, grad)
            if cost_model is not None:
                simulated += cost_model.step_seconds(program, len(idx))
            if elapsed() > budget.timeout:
                return TrainOutcome("timeout", -1.0, budget.timeout, nparams, loss_history=history)
        if track_loss:
            history.append(dataset_loss(program, weights, train_x, train_y))

    out = predict(program, weights, dataset.valid_inputs)
    if cost_model is not None:
        simulated += cost_model.eval_seconds(program, len(dataset.valid_y))
    if not np.all(np.isfinite(out)):
        return TrainOutcome("failed", -1.0, elapsed(), nparams, loss_history=history)
    if program.loss == "cross_entropy":
        metric = accuracy(dataset.valid_y, out)
        reward = metric
    else:
        metric = r2_score(dataset.valid_y, out)
        reward = min(1.0, max(-1.0, metric))
    return TrainOutcome("ok", reward, elapsed(), nparams, metric, history,
                        weights if keep_weights else None)
