"""Framework-neutral decoded architecture graph."""

from __future__ import annotations

import json
from dataclasses import dataclass

from .ops import Concatenate, Dense, Input, op_from_dict


@dataclass(frozen=True)
class GraphNode:
    id: int
    op: object
    inputs: tuple = ()
    # nodes sharing a tag share one parameter block
    tag: str | None = None


@dataclass(frozen=True)
class ArchGraph:
    nodes: tuple
    output: int
    # (slot path, chosen op) for every decision slot, in slot order
    slot_ops: tuple = ()

    @property
    def input_nodes(self):
        return [n for n in self.nodes if isinstance(n.op, Input)]

    def node(self, node_id):
        return self.nodes[node_id]

    def edges(self):
        return [(src, n.id) for n in self.nodes for src in n.inputs]

    def topological_order(self):
        """Kahn's algorithm; raises ValueError on a cycle."""
        indeg = {n.id: len(n.inputs) for n in self.nodes}
        children = {n.id: [] for n in self.nodes}
        for src, dst in self.edges():
            children[src].append(dst)
        ready = sorted(i for i, d in indeg.items() if d == 0)
        order = []
        while ready:
            i = ready.pop(0)
            order.append(i)
            for c in children[i]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(c)
        if len(order) != len(self.nodes):
            raise ValueError("architecture graph contains a cycle")
        return order

    def to_dict(self):
        return {
            "format": "rlnas.graph/1",
            "nodes": [
                {"id": n.id, "op": n.op.to_dict(), "inputs": list(n.inputs), "tag": n.tag}
                for n in self.nodes
            ],
            "output": self.output,
            "slots": [{"path": p, "op": op.to_dict()} for p, op in self.slot_ops],
        }

    @classmethod
    def from_dict(cls, d):
        nodes = tuple(GraphNode(n["id"], op_from_dict(n["op"]), tuple(n["inputs"]), n.get("tag"))
                      for n in d["nodes"])
        slots = tuple((s["path"], op_from_dict(s["op"])) for s in d.get("slots", ()))
        return cls(nodes, d["output"], slots)

    def to_json(self, path=None):
        text = json.dumps(self.to_dict(), indent=2)
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text


class GraphBuilder:
    """Append-only helper used by the decoder and the hand-built baselines."""

    def __init__(self):
        self._nodes = []

    def add(self, op, inputs=(), tag=None):
        node = GraphNode(len(self._nodes), op, tuple(inputs), tag)
        self._nodes.append(node)
        return node.id

    def merge(self, ids, op=None):
        """Merge tensors; a single tensor passes through, none gives None."""
        ids = [i for i in ids if i is not None]
        # drop duplicates but keep first-seen order
        ids = list(dict.fromkeys(ids))
        if not ids:
            return None
        if len(ids) == 1:
            return ids[0]
        return self.add(op or Concatenate(), ids)

    def dense_stack(self, src, widths, activation="relu", tag_prefix=None):
        for k, w in enumerate(widths):
            tag = None if tag_prefix is None else f"{tag_prefix}.{k}"
            src = self.add(Dense(w, activation), [src], tag)
        return src

    def build(self, output, slot_ops=()):
        return ArchGraph(tuple(self._nodes), output, tuple(slot_ops))
