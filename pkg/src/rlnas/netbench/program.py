"""Compile an ``ArchGraph`` into a trainable tensor program."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .. import autograd as ag
from ..space.ops import (Activation, Add, Concatenate, Conv1D, Dense, Dropout, Identity, Input,
                         MaxPooling1D)


class CompileError(ValueError):
    pass


@dataclass(frozen=True)
class Step:
    node: int
    op: object
    inputs: tuple
    shape: tuple
    param: str | None = None
    # Add merges: per-input projection tag (None when the width already matches)
    projections: tuple = ()


@dataclass
class TensorProgram:
    steps: list
    inputs: dict  # input name -> node id
    input_shapes: dict
    output: int
    param_shapes: dict  # tag -> (weight shape, bias shape)
    loss: str
    flops_per_sample: float = 0.0
    _offsets: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        off = 0
        for tag, (ws, bs) in self.param_shapes.items():
            nw, nb = math.prod(ws), math.prod(bs)
            self._offsets[tag] = (off, off + nw, off + nw + nb)
            off += nw + nb
        self.num_params = off

    @property
    def task(self):
        return "classification" if self.loss == "cross_entropy" else "regression"

    def init_params(self, rng):
        """Glorot-uniform weights, zero biases, as one flat vector."""
        flat = np.zeros(self.num_params)
        for tag, (ws, _) in self.param_shapes.items():
            start, mid, _ = self._offsets[tag]
            if len(ws) == 3:  # conv kernel (k, c, f)
                fan_in, fan_out = ws[0] * ws[1], ws[0] * ws[2]
            else:
                fan_in, fan_out = ws
            limit = math.sqrt(6.0 / (fan_in + fan_out))
            flat[start:mid] = rng.uniform(-limit, limit, size=mid - start)
        return flat

    def unflatten(self, flat):
        out = {}
        for tag, (ws, bs) in self.param_shapes.items():
            start, mid, end = self._offsets[tag]
            out[tag] = (flat[start:mid].reshape(ws), flat[mid:end].reshape(bs))
        return out

    def flatten_grads(self, tensors):
        flat = np.zeros(self.num_params)
        for tag, (w, b) in tensors.items():
            start, mid, end = self._offsets[tag]
            if w.grad is not None:
                flat[start:mid] = w.grad.ravel()
            if b.grad is not None:
                flat[mid:end] = b.grad.ravel()
        return flat

    def forward(self, batch, params, training=False, rng=None):
        """Run the program; returns head pre-activations for classification,
        head outputs for regression. ``params`` maps tag -> (w, b) Tensors."""
        values = {}
        for step in self.steps:
            op = step.op
            if isinstance(op, Input):
                x = ag.Tensor(np.asarray(batch[op.name], dtype=np.float64))
                if x.ndim == 1:
                    x = ag.reshape(x, (-1, 1))
                values[step.node] = x
                continue
            xs = [values[i] for i in step.inputs]
            if isinstance(op, Dense):
                w, b = params[step.param]
                y = _flat(xs[0]) @ w + b
                last = step.node == self.output
                if not (last and self.loss == "cross_entropy"):
                    y = _activate(y, op.activation)
            elif isinstance(op, Conv1D):
                w, b = params[step.param]
                y = ag.conv1d(_seq(xs[0]), w, b, op.stride)
            elif isinstance(op, MaxPooling1D):
                y = ag.maxpool1d(_seq(xs[0]), op.size)
            elif isinstance(op, Activation):
                y = _activate(xs[0], op.fn)
            elif isinstance(op, Dropout):
                y = xs[0]
                if training:
                    keep = 1.0 - op.rate
                    mask = (rng.random(y.shape) < keep) / keep
                    y = ag.scale(y, mask)
            elif isinstance(op, Identity):
                y = xs[0]
            elif isinstance(op, Concatenate):
                y = ag.concat([_flat(x) for x in xs], axis=1)
            elif isinstance(op, Add):
                if step.projections:
                    parts = []
                    for x, tag in zip(xs, step.projections):
                        x = _flat(x)
                        if tag is not None:
                            w, b = params[tag]
                            x = x @ w + b
                        parts.append(x)
                    xs = parts
                y = xs[0]
                for x in xs[1:]:
                    y = y + x
            else:
                raise CompileError(f"unsupported op {op}")
            values[step.node] = y
        return values[self.output]

    def summary(self):
        """Per-layer shapes and parameter counts, JSON-ready."""
        layers = []
        for step in self.steps:
            n = 0
            if step.param is not None:
                ws, bs = self.param_shapes[step.param]
                n = math.prod(ws) + math.prod(bs)
            layers.append({"node": step.node, "op": str(step.op), "inputs": list(step.inputs),
                           "shape": list(step.shape), "param": step.param, "params": n})
        return {"layers": layers, "trainable_params": self.num_params, "loss": self.loss,
                "flops_per_sample": self.flops_per_sample}


def _flat(x):
    if x.ndim == 2:
        return x
    return ag.reshape(x, (x.shape[0], -1))


def _seq(x):
    if x.ndim == 3:
        return x
    return ag.reshape(x, (x.shape[0], x.shape[1], 1))


def _activate(x, fn):
    if fn == "relu":
        return ag.relu(x)
    if fn == "tanh":
        return ag.tanh(x)
    if fn == "sigmoid":
        return ag.sigmoid(x)
    if fn == "softmax":
        return ag.softmax(x, axis=-1)
    return x


def _width(shape):
    return math.prod(shape)


def compile_graph(graph, input_dims=None, task="regression"):
    """Shape-check ``graph`` and lay out its parameters.

    ``input_dims`` optionally overrides the dimensions recorded on the
    graph's input nodes. Nodes sharing a weight tag share one parameter
    block, so their weight shapes must agree.
    """
    if task not in ("regression", "classification"):
        raise CompileError(f"unknown task {task!r}")
    input_dims = dict(input_dims or {})
    shapes = {}
    steps = []
    param_shapes = {}
    inputs, input_shapes = {}, {}
    flops = 0.0

    def claim(tag, ws, bs, where):
        if tag in param_shapes:
            if param_shapes[tag] != (ws, bs):
                raise CompileError(f"node {where}: shared weights {tag!r} need shape "
                                   f"{param_shapes[tag][0]}, got {ws}")
        else:
            param_shapes[tag] = (ws, bs)

    for nid in graph.topological_order():
        node = graph.node(nid)
        op = node.op
        ins = [shapes[i] for i in node.inputs]
        param, projections = None, ()
        if isinstance(op, Input):
            shape = (int(input_dims.get(op.name, op.dim)),)
            inputs[op.name] = nid
            input_shapes[op.name] = shape
        elif isinstance(op, Dense):
            d = _width(ins[0])
            shape = (op.units,)
            param = node.tag or f"n{nid}"
            claim(param, (d, op.units), (op.units,), nid)
            flops += 2.0 * d * op.units
        elif isinstance(op, Conv1D):
            length, c = ins[0] if len(ins[0]) == 2 else (ins[0][0], 1)
            if length < op.kernel:
                raise CompileError(f"node {nid}: Conv1D kernel {op.kernel} exceeds length {length} "
                                   f"on edge {node.inputs[0]}->{nid}")
            out_len = (length - op.kernel) // op.stride + 1
            shape = (out_len, op.filters)
            param = node.tag or f"n{nid}"
            claim(param, (op.kernel, c, op.filters), (op.filters,), nid)
            flops += 2.0 * out_len * op.kernel * c * op.filters
        elif isinstance(op, MaxPooling1D):
            length, c = ins[0] if len(ins[0]) == 2 else (ins[0][0], 1)
            if length // op.size < 1:
                raise CompileError(f"node {nid}: MaxPooling1D({op.size}) on length {length} "
                                   f"on edge {node.inputs[0]}->{nid}")
            shape = (length // op.size, c)
            flops += length * c
        elif isinstance(op, (Activation, Dropout, Identity)):
            shape = ins[0]
            flops += _width(shape)
        elif isinstance(op, Concatenate):
            shape = (sum(_width(s) for s in ins),)
        elif isinstance(op, Add):
            if all(s == ins[0] for s in ins):
                shape = ins[0]
            else:
                # widths differ: project narrower operands to the widest
                target = max(_width(s) for s in ins)
                tags = []
                for j, s in enumerate(ins):
                    if _width(s) == target:
                        tags.append(None)
                    else:
                        tag = f"proj{nid}.{j}"
                        claim(tag, (_width(s), target), (target,), nid)
                        flops += 2.0 * _width(s) * target
                        tags.append(tag)
                shape = (target,)
                projections = tuple(tags)
            flops += _width(shape) * len(ins)
        else:
            raise CompileError(f"node {nid}: unsupported op {op}")
        shapes[nid] = shape
        steps.append(Step(nid, op, tuple(node.inputs), shape, param, projections))

    loss = "cross_entropy" if task == "classification" else "mse"
    return TensorProgram(steps, inputs, input_shapes, graph.output, param_shapes, loss, flops)


def count_params(program):
    """Trainable parameters; weight-shared blocks are counted once."""
    return program.num_params
