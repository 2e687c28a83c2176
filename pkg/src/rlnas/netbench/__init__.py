"""Compiling, training and scoring decoded architectures."""

from .data import PRESETS, DatasetError, TabularDataset, generate_dataset, load_dataset, write_dataset
from .landscape import SyntheticLandscape, synthetic_reward
from .program import CompileError, TensorProgram, compile_graph, count_params
from .train import (CostModel, FidelityBudget, TrainOutcome, accuracy, predict, r2_score,
                    train_and_score)

__all__ = [
    "PRESETS", "DatasetError", "TabularDataset", "generate_dataset", "load_dataset", "write_dataset",
    "SyntheticLandscape", "synthetic_reward", "CompileError", "TensorProgram", "compile_graph",
    "count_params", "CostModel", "FidelityBudget", "TrainOutcome", "accuracy", "predict",
    "r2_score", "train_and_score",
]
