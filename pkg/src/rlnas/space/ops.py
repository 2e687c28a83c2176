"""Layer operations that can fill a node of the search space."""

from __future__ import annotations

from dataclasses import dataclass

ACTIVATIONS = ("relu", "tanh", "sigmoid", "linear", "softmax")


class LayerOp:
    """Base class; concrete ops are frozen dataclasses below."""

    kind = "op"
    merge = False

    def to_dict(self):
        d = {"op": self.kind}
        d.update({k: v for k, v in self.__dict__.items()})
        return d


@dataclass(frozen=True)
class Identity(LayerOp):
    kind = "identity"

    def __str__(self):
        return "Identity"


@dataclass(frozen=True)
class Dense(LayerOp):
    units: int
    activation: str = "linear"
    kind = "dense"

    def __post_init__(self):
        if int(self.units) < 1:
            raise ValueError(f"Dense units must be positive, got {self.units}")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")

    def __str__(self):
        return f"Dense({self.units}, {self.activation})"


@dataclass(frozen=True)
class Dropout(LayerOp):
    rate: float
    kind = "dropout"

    def __post_init__(self):
        if not 0.0 < self.rate < 1.0:
            raise ValueError(f"Dropout rate must lie in (0, 1), got {self.rate}")

    def __str__(self):
        return f"Dropout({self.rate})"


@dataclass(frozen=True)
class Conv1D(LayerOp):
    filters: int
    kernel: int
    stride: int = 1
    kind = "conv1d"

    def __post_init__(self):
        if min(self.filters, self.kernel, self.stride) < 1:
            raise ValueError("Conv1D filters, kernel and stride must be >= 1")

    def __str__(self):
        return f"Conv1D({self.filters}, {self.kernel}, {self.stride})"


@dataclass(frozen=True)
class MaxPooling1D(LayerOp):
    size: int
    kind = "maxpool1d"

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("MaxPooling1D size must be >= 1")

    def __str__(self):
        return f"MaxPooling1D({self.size})"


@dataclass(frozen=True)
class Activation(LayerOp):
    fn: str
    kind = "activation"

    def __post_init__(self):
        if self.fn not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.fn!r}")

    def __str__(self):
        return f"Activation({self.fn})"


@dataclass(frozen=True)
class Add(LayerOp):
    kind = "add"
    merge = True

    def __str__(self):
        return "Add"


@dataclass(frozen=True)
class Concatenate(LayerOp):
    kind = "concatenate"
    merge = True

    def __str__(self):
        return "Concatenate"


@dataclass(frozen=True)
class Connect(LayerOp):
    """Skip connection from named tensors; no targets means Null.

    Target grammar: ``input:<name>``, ``inputs`` (all structure inputs),
    ``cell:<i>`` (output of cell i) and ``node:<path>`` such as ``C1.B0.N0``.
    Several targets are concatenated.
    """

    targets: tuple = ()
    kind = "connect"

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))

    @property
    def is_null(self):
        return not self.targets

    def to_dict(self):
        return {"op": self.kind, "targets": list(self.targets)}

    def __str__(self):
        return "Connect(Null)" if self.is_null else f"Connect({'&'.join(self.targets)})"


@dataclass(frozen=True)
class Input(LayerOp):
    """Structure input; only appears in decoded graphs."""

    name: str
    dim: int
    kind = "input"

    def __str__(self):
        return f"Input({self.name}, {self.dim})"


_KINDS = {cls.kind: cls for cls in (Identity, Dense, Dropout, Conv1D, MaxPooling1D,
                                    Activation, Add, Concatenate, Connect, Input)}


def op_from_dict(d):
    d = dict(d)
    kind = d.pop("op")
    try:
        cls = _KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown op kind {kind!r}") from None
    if cls is Connect:
        return Connect(tuple(d.get("targets", ())))
    return cls(**d)
