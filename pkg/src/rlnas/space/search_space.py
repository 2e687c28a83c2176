"""Compile a ``SpaceSpec`` into decision slots; sample and decode encodings."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .graph import GraphBuilder
from .ops import Add, Concatenate, Connect, Conv1D, Dense, Identity, Input
from .spec import ConstantNode, MirrorNode, SpaceSpec, VariableNode, node_path


class SpaceError(ValueError):
    """A malformed space specification; the message names the offending path."""


@dataclass(frozen=True)
class Slot:
    path: str
    arity: int
    choices: tuple


class SearchSpace:
    """A validated space plus its ordered decision slots.

    Slots follow cell, then block, then node declaration order. Constant and
    Mirror nodes add no slot.
    """

    def __init__(self, spec: SpaceSpec, slots):
        self.spec = spec
        self.slots = tuple(slots)
        self.arities = tuple(s.arity for s in self.slots)
        self._slot_index = {s.path: k for k, s in enumerate(self.slots)}

    def __repr__(self):
        return f"SearchSpace({self.spec.name or 'custom'}, slots={len(self.slots)}, size={self.size})"

    def __eq__(self, other):
        return isinstance(other, SearchSpace) and self.spec == other.spec

    def __hash__(self):
        return hash(self.spec)

    @property
    def num_slots(self):
        return len(self.slots)

    @property
    def size(self):
        return space_size(self)

    def slot_index(self, path):
        return self._slot_index[path]

    def validate_encoding(self, encoding):
        enc = tuple(int(i) for i in encoding)
        if len(enc) != len(self.arities):
            raise ValueError(f"encoding has length {len(enc)}, space has {len(self.arities)} slots")
        for k, (i, a) in enumerate(zip(enc, self.arities)):
            if not 0 <= i < a:
                raise ValueError(f"encoding[{k}]={i} out of range for slot "
                                 f"{self.slots[k].path} with arity {a}")
        return enc

    def enumerate(self):
        """Every encoding, lexicographically. Only sensible for small spaces."""
        return itertools.product(*(range(a) for a in self.arities))


def _split_ref(ref):
    kind, _, arg = ref.partition(":")
    return kind, arg


def build_space(spec: SpaceSpec) -> SearchSpace:
    """Validate ``spec`` and enumerate its decision slots."""
    input_names = [i.name for i in spec.inputs]
    if len(set(input_names)) != len(input_names):
        raise SpaceError(f"duplicate input names in {input_names}")
    if not spec.cells:
        raise SpaceError("a space needs at least one cell")
    for i in spec.inputs:
        if int(i.dim) < 1:
            raise SpaceError(f"input {i.name!r} has non-positive dimension {i.dim}")

    # traversal order of every node, needed for mirror/target precedence checks
    order = {}
    kinds = {}
    for ci, cell in enumerate(spec.cells):
        for bi, block in enumerate(cell.blocks):
            for ni, node in enumerate(block.nodes):
                path = node_path(ci, bi, ni)
                order[path] = len(order)
                kinds[path] = node

    def check_ref(ref, ci, where, position):
        kind, arg = _split_ref(ref)
        if ref in ("prev", "inputs"):
            return
        if kind == "input":
            if arg not in input_names:
                raise SpaceError(f"{where}: unknown input {arg!r}")
        elif kind == "cell":
            if not arg.isdigit() or int(arg) >= ci:
                raise SpaceError(f"{where}: cell target {ref!r} must name an earlier cell")
        elif kind == "node":
            if arg not in order:
                raise SpaceError(f"{where}: unresolvable node target {arg!r}")
            if order[arg] >= position:
                raise SpaceError(f"{where}: node target {arg!r} does not precede it")
        else:
            raise SpaceError(f"{where}: unresolvable target {ref!r}")

    slots = []
    for ci, cell in enumerate(spec.cells):
        if not cell.blocks:
            raise SpaceError(f"C{ci}: cell has no blocks")
        for bi, block in enumerate(cell.blocks):
            where = f"C{ci}.B{bi}"
            first = order.get(node_path(ci, bi, 0), len(order))
            for ref in block.inputs:
                check_ref(ref, ci, where, first)
            _check_block_edges(block, where)
            for ni, node in enumerate(block.nodes):
                path = node_path(ci, bi, ni)
                if isinstance(node, VariableNode):
                    for op in node.choices:
                        if isinstance(op, Connect):
                            for t in op.targets:
                                check_ref(t, ci, path, order[path])
                    slots.append(Slot(path, len(node.choices), node.choices))
                elif isinstance(node, MirrorNode):
                    if node.ref not in order:
                        raise SpaceError(f"{path}: dangling mirror referent {node.ref!r}")
                    if order[node.ref] >= order[path]:
                        raise SpaceError(f"{path}: forward mirror of {node.ref!r}")
                    if not isinstance(kinds[node.ref], VariableNode):
                        raise SpaceError(f"{path}: mirror referent {node.ref!r} is not a variable node")
                elif isinstance(node, ConstantNode):
                    if isinstance(node.op, Connect):
                        for t in node.op.targets:
                            check_ref(t, ci, path, order[path])
                else:
                    raise SpaceError(f"{path}: unknown node type {type(node).__name__}")
    if spec.output_cells is not None:
        for i in spec.output_cells:
            if not 0 <= i < len(spec.cells):
                raise SpaceError(f"output cell {i} does not exist")
    return SearchSpace(spec, slots)


def _check_block_edges(block, where):
    n = len(block.nodes)
    edges = block.edge_list()
    preds = {k: [] for k in range(n)}
    for src, dst in edges:
        if not (isinstance(dst, int) and 0 <= dst < n):
            raise SpaceError(f"{where}: edge target {dst!r} is not a node index")
        if src != "in" and not (isinstance(src, int) and 0 <= src < n):
            raise SpaceError(f"{where}: edge source {src!r} is not 'in' or a node index")
        preds[dst].append(src)
    try:
        _block_topo(n, edges)
    except ValueError:
        raise SpaceError(f"{where}: cyclic block graph") from None
    # reachability from the block input
    reach = set()
    frontier = ["in"]
    while frontier:
        s = frontier.pop()
        for src, dst in edges:
            if src == s and dst not in reach:
                reach.add(dst)
                frontier.append(dst)
    missing = sorted(set(range(n)) - reach)
    if missing:
        raise SpaceError(f"{where}: nodes {missing} unreachable from the block input")


def _block_topo(n, edges):
    indeg = [0] * n
    for src, dst in edges:
        if src != "in":
            indeg[dst] += 1
    ready = [k for k in range(n) if indeg[k] == 0]
    out = []
    while ready:
        k = ready.pop(0)
        out.append(k)
        for src, dst in edges:
            if src == k:
                indeg[dst] -= 1
                if indeg[dst] == 0:
                    ready.append(dst)
    if len(out) != n:
        raise ValueError("cycle")
    return out


def space_size(space: SearchSpace) -> int:
    """Exact number of encodings (product of slot arities)."""
    return math.prod(space.arities)


def sample_random(space: SearchSpace, rng_seed=None, n=None):
    """Uniform independent draw per slot.

    ``rng_seed`` may be an int or a ``numpy.random.Generator``. Returns one
    encoding tuple, or a list of ``n`` of them.
    """
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    if not space.arities:
        draws = np.zeros((1 if n is None else n, 0), dtype=np.int64)
    else:
        draws = rng.integers(0, np.asarray(space.arities), size=(1 if n is None else n, len(space.arities)))
    encs = [tuple(int(v) for v in row) for row in draws]
    return encs[0] if n is None else encs


_PARAMETRIC = (Dense, Conv1D)


def decode(space: SearchSpace, encoding):
    """Materialize an encoding as an ``ArchGraph``.

    Identity choices and Null connects add nothing. Mirror nodes reuse the
    chosen op of their referent and carry its weight tag. Block outputs are
    merged by the cell's rule; the listed cell outputs feed the output head.
    """
    enc = space.validate_encoding(encoding)
    spec = space.spec
    b = GraphBuilder()
    inputs = {i.name: b.add(Input(i.name, int(i.dim))) for i in spec.inputs}
    cache = {}

    def all_inputs():
        if "inputs" not in cache:
            cache["inputs"] = b.merge(list(inputs.values()))
        return cache["inputs"]

    cell_out = {}
    node_out = {}
    chosen = {}
    slot_ops = []

    def prev_output(ci):
        for j in range(ci - 1, -1, -1):
            if cell_out.get(j) is not None:
                return cell_out[j]
        return all_inputs()

    def resolve(ref, ci):
        kind, arg = _split_ref(ref)
        if ref == "inputs":
            return all_inputs()
        if ref == "prev":
            return prev_output(ci)
        if kind == "input":
            return inputs[arg]
        if kind == "cell":
            return cell_out.get(int(arg))
        return node_out.get(arg)

    def resolve_many(refs, ci):
        key = ("targets", tuple(refs), ci)
        if key not in cache:
            cache[key] = b.merge([resolve(r, ci) for r in refs])
        return cache[key]

    slot = 0
    for ci, cell in enumerate(spec.cells):
        block_outs = []
        for bi, block in enumerate(cell.blocks):
            block_in = b.merge([resolve(r, ci) for r in block.inputs])
            edges = block.edge_list()
            outs = {}
            for ni in _block_topo(len(block.nodes), edges):
                node = block.nodes[ni]
                path = node_path(ci, bi, ni)
                if isinstance(node, VariableNode):
                    op = node.choices[enc[slot]]
                    slot += 1
                    chosen[path] = op
                    slot_ops.append((path, op))
                    tag = path
                elif isinstance(node, ConstantNode):
                    op, tag = node.op, path
                else:
                    op, tag = chosen[node.ref], node.ref
                preds = [block_in if src == "in" else outs[src] for src, dst in edges if dst == ni]
                preds = [p for p in preds if p is not None]
                if isinstance(op, Connect):
                    out = None if op.is_null else resolve_many(op.targets, ci)
                elif isinstance(op, Identity):
                    out = b.merge(preds)
                elif op.merge:
                    out = b.merge(preds, op)
                else:
                    x = b.merge(preds)
                    out = None if x is None else b.add(op, [x], tag if isinstance(op, _PARAMETRIC) else None)
                outs[ni] = out
                node_out[path] = out
            sources = {src for src, _ in edges}
            sinks = [k for k in range(len(block.nodes)) if k not in sources]
            block_outs.append(b.merge([outs[k] for k in sinks]))
        rule = Add() if cell.output_rule == "add" else Concatenate()
        cell_out[ci] = b.merge(block_outs, rule)

    out_cells = spec.output_cells if spec.output_cells is not None else (len(spec.cells) - 1,)
    rule = Add() if spec.output_rule == "add" else Concatenate()
    head_in = b.merge([cell_out[i] for i in out_cells], rule)
    if head_in is None:
        head_in = all_inputs()
    out = b.add(Dense(spec.head.units, spec.head.activation), [head_in], "head")
    return b.build(out, slot_ops)


def encoding_of(space: SearchSpace, graph):
    """Recover the encoding from a decoded graph's per-slot chosen ops."""
    chosen = dict(graph.slot_ops)
    return tuple(s.choices.index(chosen[s.path]) for s in space.slots)
