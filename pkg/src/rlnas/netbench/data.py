"""Tabular datasets: manifest + CSV loading and seeded synthetic generators.

Manifest JSON::

    {
      "task": "regression",            # or "classification"
      "inputs": {"cell": "cell.csv", "drug1": "drug1.csv"},
      "output": "y.csv",
      "validation_fraction": 0.2,      # last rows become the validation split
    }

Paths are relative to the manifest. CSVs are UTF-8, comma separated, with
one header row.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class TabularDataset:
    train_inputs: dict
    train_y: np.ndarray
    valid_inputs: dict
    valid_y: np.ndarray
    task: str = "regression"
    name: str = ""

    def __post_init__(self):
        if self.task not in ("regression", "classification"):
            raise DatasetError(f"unknown task {self.task!r}")
        for split, inputs, y in (("train", self.train_inputs, self.train_y),
                                 ("validation", self.valid_inputs, self.valid_y)):
            for name, x in inputs.items():
                if len(x) != len(y):
                    raise DatasetError(f"{split} group {name!r} has {len(x)} rows, "
                                       f"output has {len(y)}")
        if set(self.train_inputs) != set(self.valid_inputs):
            raise DatasetError("train and validation input groups differ")

    @property
    def input_dims(self):
        return {name: x.shape[1] for name, x in self.train_inputs.items()}

    @property
    def num_classes(self):
        return int(max(self.train_y.max(), self.valid_y.max())) + 1 if self.task == "classification" else 1

    def check_inputs(self, names):
        missing = set(names) - set(self.train_inputs)
        if missing:
            raise DatasetError(f"dataset lacks input groups {sorted(missing)}")


def _read_csv(path):
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"missing file {path}")
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2, dtype=np.float64)
    except ValueError as exc:
        raise DatasetError(f"{path}: ragged or non-numeric rows ({exc})") from None
    return data


def load_dataset(manifest_path, expected_groups=None):
    """Load and validate a dataset described by a manifest JSON file.

    ``expected_groups`` (e.g. a space's input names) rejects unknown groups.
    """
    manifest_path = Path(manifest_path)
    if not manifest_path.exists():
        raise DatasetError(f"missing manifest {manifest_path}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    root = manifest_path.parent
    task = manifest.get("task", "regression")
    groups = manifest.get("inputs")
    if not groups:
        raise DatasetError("manifest names no input groups")
    expected = expected_groups if expected_groups is not None else manifest.get("groups")
    if expected is not None:
        unknown = set(groups) - set(expected)
        if unknown:
            raise DatasetError(f"unknown group(s) {sorted(unknown)}")
    y = _read_csv(root / manifest["output"])
    arrays = {}
    for name, rel in groups.items():
        arr = _read_csv(root / rel)
        if len(arr) != len(y):
            raise DatasetError(f"group {name!r} has {len(arr)} rows but output has {len(y)}")
        arrays[name] = arr
    y = y[:, 0].astype(np.int64) if task == "classification" else y
    frac = float(manifest.get("validation_fraction", 0.2))
    n_valid = int(round(len(y) * frac))
    if not 0 < n_valid < len(y):
        raise DatasetError(f"validation_fraction {frac} leaves an empty split")
    cut = len(y) - n_valid
    return TabularDataset(
        {k: v[:cut] for k, v in arrays.items()}, y[:cut],
        {k: v[cut:] for k, v in arrays.items()}, y[cut:],
        task=task, name=manifest.get("name", manifest_path.stem),
    )


PRESETS = {
    "combo-mini": {"task": "regression", "rows": 2000,
                   "groups": {"cell_expression": 16, "drug1_descriptors": 24, "drug2_descriptors": 24}},
    "uno-mini": {"task": "regression", "rows": 2000,
                 "groups": {"cell_rnaseq": 16, "dose": 1, "drug_descriptors": 24, "drug_fingerprints": 16}},
    "nt3-mini": {"task": "classification", "rows": 600, "groups": {"rnaseq": 120}},
}


def generate_dataset(preset="combo-mini", seed=0, rows=None, dims=None, noise=0.05,
                     validation_fraction=0.2):
    """Seeded synthetic dataset shaped like one of the benchmarks.

    Regression targets mix additive and multiplicative terms of tanh
    encodings of each group; equally sized drug groups go through one shared
    encoder, so a shared submodel is the right inductive bias. Classification draws a class-dependent
    localized signal in a long 1-D profile.
    """
    try:
        cfg = PRESETS[preset]
    except KeyError:
        raise DatasetError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}") from None
    rng = np.random.default_rng(seed)
    n = int(rows or cfg["rows"])
    groups = dict(cfg["groups"])
    if dims:
        groups.update(dims)
    xs = {name: rng.normal(size=(n, d)) for name, d in groups.items()}
    if cfg["task"] == "regression":
        latent = 3
        names = list(groups)
        drugs = [g for g in names[1:] if g.startswith("drug")]
        share = len(drugs) >= 2 and len({groups[g] for g in drugs}) == 1
        enc, shared = {}, None
        for name in names:
            proj = rng.normal(size=(groups[name], latent)) / np.sqrt(groups[name])
            if share and name in drugs:
                shared = proj if shared is None else shared
                proj = shared
            enc[name] = np.tanh(xs[name] @ proj)
        first = enc[names[0]]
        rest = sum(enc[name] for name in names[1:]) if len(names) > 1 else np.zeros_like(first)
        y = first @ rng.normal(size=latent) + rest @ rng.normal(size=latent)
        y = y + 0.5 * np.sum(first * rest, axis=1)
        y = (y - y.mean()) / y.std()
        y = y + noise * rng.normal(size=n)
        y = y[:, None]
    else:
        name = next(iter(groups))
        length = groups[name]
        labels = rng.integers(0, 2, size=n)
        motif = np.sin(np.linspace(0, 3 * np.pi, 9))
        for i in np.nonzero(labels)[0]:
            pos = rng.integers(0, length - len(motif))
            xs[name][i, pos:pos + len(motif)] += 3.0 * motif
        y = labels
    n_valid = int(round(n * validation_fraction))
    cut = n - n_valid
    return TabularDataset(
        {k: v[:cut] for k, v in xs.items()}, y[:cut],
        {k: v[cut:] for k, v in xs.items()}, y[cut:],
        task=cfg["task"], name=preset,
    )


def write_dataset(dataset, directory, validation_fraction=None):
    """Write ``dataset`` as CSVs plus ``manifest.json``; returns the manifest path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    n_train, n_valid = len(dataset.train_y), len(dataset.valid_y)
    files = {}
    for name in dataset.train_inputs:
        x = np.vstack([dataset.train_inputs[name], dataset.valid_inputs[name]])
        fname = f"{name}.csv"
        _write_csv(directory / fname, x, [f"{name}_{j}" for j in range(x.shape[1])])
        files[name] = fname
    y = np.concatenate([dataset.train_y, dataset.valid_y]).reshape(n_train + n_valid, -1)
    fmt = "%d" if dataset.task == "classification" else "%.6f"
    _write_csv(directory / "y.csv", y, ["y"], fmt)
    manifest = {
        "name": dataset.name,
        "task": dataset.task,
        "inputs": files,
        "output": "y.csv",
        "validation_fraction": validation_fraction or n_valid / (n_train + n_valid),
    }
    path = directory / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return path


def _write_csv(path, array, header, fmt="%.6f"):
    np.savetxt(path, array, delimiter=",", header=",".join(header), comments="", fmt=fmt,
               encoding="utf-8")
