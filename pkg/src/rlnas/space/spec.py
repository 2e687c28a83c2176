"""Declarative description of a structure -> cells -> blocks -> nodes space.

A space is described by plain frozen dataclasses and round-trips through
JSON (see ``spec_to_dict`` / ``spec_from_dict``). Block inputs and Connect
targets are referenced by string:

* ``input:<name>`` - a structure input
* ``inputs``       - every structure input, concatenated
* ``prev``         - output of the previous cell (all inputs for cell 0)
* ``cell:<i>``     - output of cell ``i`` (must precede the current cell)
* ``node:C<i>.B<j>.N<k>`` - a node of an earlier block
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .ops import LayerOp, op_from_dict


@dataclass(frozen=True)
class VariableNode:
    choices: tuple
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "choices", tuple(self.choices))
        if not self.choices:
            raise ValueError("a VariableNode needs at least one choice")
        for op in self.choices:
            if not isinstance(op, LayerOp):
                raise TypeError(f"choice {op!r} is not a LayerOp")


@dataclass(frozen=True)
class ConstantNode:
    op: LayerOp
    name: str = ""


@dataclass(frozen=True)
class MirrorNode:
    ref: str
    name: str = ""


@dataclass(frozen=True)
class BlockSpec:
    nodes: tuple
    inputs: tuple = ("prev",)
    # (src, dst) pairs; src is "in" or a node index. None means a chain.
    edges: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "inputs", tuple(self.inputs))
        if self.edges is not None:
            object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))

    def edge_list(self):
        if self.edges is not None:
            return list(self.edges)
        if not self.nodes:
            return []
        return [("in", 0)] + [(k, k + 1) for k in range(len(self.nodes) - 1)]


@dataclass(frozen=True)
class CellSpec:
    blocks: tuple
    output_rule: str = "concatenate"

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        if self.output_rule not in ("concatenate", "add"):
            raise ValueError(f"unknown cell output rule {self.output_rule!r}")


@dataclass(frozen=True)
class InputSpec:
    name: str
    dim: int


@dataclass(frozen=True)
class HeadSpec:
    units: int = 1
    activation: str = "linear"


@dataclass(frozen=True)
class SpaceSpec:
    inputs: tuple
    cells: tuple
    head: HeadSpec = field(default_factory=HeadSpec)
    # cells whose outputs feed the head; None means the last cell only
    output_cells: tuple | None = None
    output_rule: str = "concatenate"
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "cells", tuple(self.cells))
        if self.output_cells is not None:
            object.__setattr__(self, "output_cells", tuple(self.output_cells))

    def with_input_dims(self, dims):
        """Copy with input dimensions replaced by ``dims`` (name -> dim)."""
        unknown = set(dims) - {i.name for i in self.inputs}
        if unknown:
            raise ValueError(f"unknown input names {sorted(unknown)}")
        inputs = tuple(InputSpec(i.name, int(dims.get(i.name, i.dim))) for i in self.inputs)
        return SpaceSpec(inputs, self.cells, self.head, self.output_cells,
                         self.output_rule, self.name)


def node_path(cell, block, node):
    return f"C{cell}.B{block}.N{node}"


# JSON

def _node_to_dict(node):
    if isinstance(node, VariableNode):
        return {"kind": "variable", "name": node.name,
                "choices": [op.to_dict() for op in node.choices]}
    if isinstance(node, ConstantNode):
        return {"kind": "constant", "name": node.name, "op": node.op.to_dict()}
    return {"kind": "mirror", "name": node.name, "ref": node.ref}


def _node_from_dict(d):
    kind = d["kind"]
    name = d.get("name", "")
    if kind == "variable":
        return VariableNode(tuple(op_from_dict(o) for o in d["choices"]), name)
    if kind == "constant":
        return ConstantNode(op_from_dict(d["op"]), name)
    if kind == "mirror":
        return MirrorNode(d["ref"], name)
    raise ValueError(f"unknown node kind {kind!r}")


def spec_to_dict(spec):
    return {
        "format": "rlnas.space/1",
        "name": spec.name,
        "inputs": [{"name": i.name, "dim": i.dim} for i in spec.inputs],
        "cells": [
            {
                "output_rule": cell.output_rule,
                "blocks": [
                    {
                        "inputs": list(block.inputs),
                        "nodes": [_node_to_dict(n) for n in block.nodes],
                        "edges": None if block.edges is None else [list(e) for e in block.edges],
                    }
                    for block in cell.blocks
                ],
            }
            for cell in spec.cells
        ],
        "output_cells": None if spec.output_cells is None else list(spec.output_cells),
        "output_rule": spec.output_rule,
        "head": {"units": spec.head.units, "activation": spec.head.activation},
    }


def spec_from_dict(d):
    cells = []
    for c in d["cells"]:
        blocks = []
        for b in c["blocks"]:
            edges = b.get("edges")
            blocks.append(BlockSpec(
                nodes=tuple(_node_from_dict(n) for n in b["nodes"]),
                inputs=tuple(b.get("inputs", ("prev",))),
                edges=None if edges is None else tuple(tuple(e) for e in edges),
            ))
        cells.append(CellSpec(tuple(blocks), c.get("output_rule", "concatenate")))
    head = d.get("head", {})
    oc = d.get("output_cells")
    return SpaceSpec(
        inputs=tuple(InputSpec(i["name"], int(i["dim"])) for i in d["inputs"]),
        cells=tuple(cells),
        head=HeadSpec(int(head.get("units", 1)), head.get("activation", "linear")),
        output_cells=None if oc is None else tuple(oc),
        output_rule=d.get("output_rule", "concatenate"),
        name=d.get("name", ""),
    )


def dump_spec(spec, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(spec_to_dict(spec), fh, indent=2)


def load_spec(path):
    with open(path, encoding="utf-8") as fh:
        return spec_from_dict(json.load(fh))
