"""Full-fidelity retraining of selected architectures and baseline-relative ratios."""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass
from pathlib import Path

from ..evaluator.backends import EvaluatorError, LocalEvaluator
from ..evaluator.benchmarks import Outcome
from ..evaluator.tasks import EvalTask
from ..netbench.program import compile_graph
from ..netbench.train import FidelityBudget, train_and_score
from ..space.builtins import builtin_baseline
from ..space.search_space import decode


@dataclass(frozen=True)
class BaselineRecord:
    name: str
    params: int
    train_time: float
    accuracy: float

    def __post_init__(self):
        if self.params <= 0 or self.train_time <= 0 or self.accuracy <= 0:
            raise ValueError("baseline params, train_time and accuracy must be positive")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def load(cls, path):
        return cls(**json.loads(Path(path).read_text()))

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


# Published reference rows for the manually designed networks.
PRESET_BASELINES = {
    "combo": BaselineRecord("combo", 13_772_001, 705.26, 0.926),
    "uno": BaselineRecord("uno", 19_274_001, 164.94, 0.649),
    "nt3": BaselineRecord("nt3", 96_777_878, 247.63, 0.986),
}


@dataclass(frozen=True)
class RatioRow:
    arch_id: int
    accuracy_ratio: float
    param_ratio: float
    time_ratio: float


def ratio_row(arch_id, accuracy, params, train_time, baseline):
    """accuracy / baseline accuracy, P_b / P and T_b / T."""
    if params <= 0 or train_time <= 0:
        raise ValueError("params and train_time must be positive")
    return RatioRow(arch_id, accuracy / baseline.accuracy, baseline.params / params,
                    baseline.train_time / train_time)


def _measure(program, dataset, budget, seed, cost_model):
    start = time.perf_counter()
    out = train_and_score(program, dataset, budget, seed, cost_model)
    wall = time.perf_counter() - start
    return out, (out.duration if cost_model is not None else wall)


@dataclass(frozen=True)
class FullTraining:
    """Benchmark binding that reports the raw validation metric."""

    space: object
    dataset: object
    cost_model: object = None

    def evaluate(self, encoding, budget, seed=0):
        try:
            program = compile_graph(decode(self.space, encoding), self.dataset.input_dims,
                                    self.dataset.task)
            out, elapsed = _measure(program, self.dataset, budget, seed, self.cost_model)
        except Exception:  # one broken architecture must not stop the batch
            return Outcome("failed", -1.0, 1e-6)
        if out.status != "ok" or not math.isfinite(out.metric):
            return Outcome("failed", -1.0, max(elapsed, 1e-6), out.params)
        return Outcome("ok", float(out.metric), max(elapsed, 1e-6), out.params)


def train_reference(graph, dataset, name="reference", epochs=20, seed=0, batch_size=32, lr=0.001,
                    cost_model=None):
    """BaselineRecord measured by training ``graph`` at full fidelity."""
    program = compile_graph(graph, dataset.input_dims, dataset.task)
    budget = FidelityBudget(epochs=epochs, batch_size=batch_size, lr=lr)
    out, elapsed = _measure(program, dataset, budget, seed, cost_model)
    if out.status != "ok":
        raise RuntimeError(f"reference model training {out.status}")
    return BaselineRecord(name, program.num_params, elapsed, out.metric)


def reference_baseline(name, dataset, unit_scale=1.0, **kw):
    graph = builtin_baseline(name, dataset.input_dims, unit_scale)
    return train_reference(graph, dataset, f"{name}-reference", **kw)


@dataclass
class PostTrainReport:
    rows: list
    metrics: list  # one dict per architecture, failures included


def post_train(space, encodings, dataset, baseline, epochs=20, seed=0, batch_size=32, lr=0.001,
               cost_model=None, workers=1):
    """Retrain each encoding on the full training split without a timeout.

    With ``workers > 1`` the trainings fan out through the local evaluator.
    A failing architecture is recorded and the batch continues.
    """
    budget = FidelityBudget(epochs=epochs, batch_size=batch_size, lr=lr)
    bench = FullTraining(space, dataset, cost_model)
    encodings = [tuple(int(x) for x in e) for e in encodings]
    outcomes = {}
    if workers > 1 and encodings:
        ev = LocalEvaluator(bench, workers)
        try:
            # distinct agent ids so repeated encodings are still retrained
            ev.add_eval_batch([EvalTask(i, i, enc, budget, seed) for i, enc in enumerate(encodings)])
            for r in ev.await_evals():
                outcomes[r.task_id] = Outcome(r.status, r.reward, r.duration, r.params)
        except EvaluatorError as exc:
            raise RuntimeError(str(exc)) from exc
        finally:
            ev.close()
    else:
        for i, enc in enumerate(encodings):
            outcomes[i] = bench.evaluate(enc, budget, seed)
    rows, metrics = [], []
    for i, enc in enumerate(encodings):
        out = outcomes[i]
        entry = {"arch_id": i, "encoding": "-".join(map(str, enc)), "status": out.status,
                 "metric": out.reward if out.status == "ok" else math.nan,
                 "params": out.params, "train_time": out.duration}
        metrics.append(entry)
        if out.status == "ok" and out.params > 0:
            rows.append(ratio_row(i, out.reward, out.params, out.duration, baseline))
    return PostTrainReport(rows, metrics)
