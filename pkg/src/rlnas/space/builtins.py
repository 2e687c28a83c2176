"""Built-in Combo / Uno / NT3 search spaces and the hand-designed baselines.

``unit_scale`` shrinks every Dense width (rounded, at least 1) so the same
layouts can be trained at desk scale; slot arities and space sizes do not
depend on it.
"""

from __future__ import annotations

from itertools import combinations

from .graph import GraphBuilder
from .ops import Activation, Add, Connect, Conv1D, Dense, Dropout, Identity, Input, MaxPooling1D
from .spec import (BlockSpec, CellSpec, ConstantNode, HeadSpec, InputSpec, MirrorNode,
                   SpaceSpec, VariableNode, node_path)

SPACE_NAMES = ("combo_small", "combo_large", "uno_small", "uno_large", "nt3_small")
BASELINE_NAMES = ("combo", "uno")

COMBO_INPUTS = (("cell_expression", 942), ("drug1_descriptors", 3820), ("drug2_descriptors", 3820))
UNO_INPUTS = (("cell_rnaseq", 942), ("dose", 1), ("drug_descriptors", 5270),
              ("drug_fingerprints", 2048))
NT3_INPUTS = (("rnaseq", 60483),)


def _w(units, scale):
    return max(1, int(round(units * scale)))


def mlp_choices(scale=1.0):
    """The 13-option MLP node: identity, dense widths x activations, dropouts."""
    ops = [Identity()]
    for width, rate in ((100, 0.05), (500, 0.1), (1000, 0.2)):
        for act in ("relu", "tanh", "sigmoid"):
            ops.append(Dense(_w(width, scale), act))
        ops.append(Dropout(rate))
    return tuple(ops)


def _mlp_node(scale):
    return VariableNode(mlp_choices(scale), "MLP_Node")


def _mlp_block(inputs, scale, n=3):
    return BlockSpec(tuple(_mlp_node(scale) for _ in range(n)), inputs=inputs)


def _mirror_block(inputs, cell, block, n=3):
    return BlockSpec(tuple(MirrorNode(node_path(cell, block, k), "Mirror_Node") for k in range(n)),
                     inputs=inputs)


COMBO_CONNECT = (
    (),
    ("input:cell_expression",),
    ("input:drug1_descriptors",),
    ("input:drug2_descriptors",),
    ("cell:0",),
    ("inputs",),
    ("input:cell_expression", "input:drug1_descriptors"),
    ("input:cell_expression", "input:drug2_descriptors"),
    ("input:drug1_descriptors", "input:drug2_descriptors"),
)


def _combo_cell0(scale):
    return CellSpec((
        _mlp_block(("input:cell_expression",), scale),
        _mlp_block(("input:drug1_descriptors",), scale),
        _mirror_block(("input:drug2_descriptors",), 0, 1),
    ))


def _connect_node(targets):
    return VariableNode(tuple(Connect(t) for t in targets), "Connect")


def combo_small(scale=1.0):
    cells = (
        _combo_cell0(scale),
        CellSpec((_mlp_block(("prev",), scale), BlockSpec((_connect_node(COMBO_CONNECT),)))),
        CellSpec((_mlp_block(("prev",), scale),)),
    )
    return SpaceSpec(tuple(InputSpec(*i) for i in COMBO_INPUTS), cells, HeadSpec(1, "linear"),
                     output_cells=(0, 1, 2), name="combo_small")


def combo_large(scale=1.0):
    cells = [_combo_cell0(scale)]
    for i in range(1, 9):
        targets = COMBO_CONNECT + tuple((f"cell:{j}",) for j in range(1, i))
        cells.append(CellSpec((_mlp_block(("prev",), scale), BlockSpec((_connect_node(targets),)))))
    cells.append(CellSpec((_mlp_block(("prev",), scale),)))
    return SpaceSpec(tuple(InputSpec(*i) for i in COMBO_INPUTS), tuple(cells), HeadSpec(1, "linear"),
                     output_cells=tuple(range(len(cells))), name="combo_large")


def _uno_cell0(scale):
    return CellSpec(tuple(_mlp_block((f"input:{name}",), scale) for name, _ in UNO_INPUTS))


def uno_small(scale=1.0):
    add = ConstantNode(Add(), "Add")
    block = BlockSpec(
        (_mlp_node(scale), _mlp_node(scale), add, _mlp_node(scale), add),
        inputs=("prev",),
        edges=(("in", 0), (0, 1), (1, 2), (2, 3), (3, 4), (0, 2), (2, 4)),
    )
    return SpaceSpec(tuple(InputSpec(*i) for i in UNO_INPUTS),
                     (_uno_cell0(scale), CellSpec((block,))), HeadSpec(1, "linear"),
                     name="uno_small")


def uno_large(scale=1.0):
    names = [f"input:{name}" for name, _ in UNO_INPUTS]
    input_combos = [c for r in range(1, len(names) + 1) for c in combinations(names, r)]
    cells = [_uno_cell0(scale)]
    for i in range(1, 9):
        targets = ((),) + tuple(input_combos)
        targets += tuple((f"cell:{j}",) for j in range(i))
        targets += tuple((f"node:{node_path(j, 0, 0)}",) for j in range(1, i))
        cells.append(CellSpec((_mlp_block(("prev",), scale, n=1), BlockSpec((_connect_node(targets),)))))
    return SpaceSpec(tuple(InputSpec(*i) for i in UNO_INPUTS), tuple(cells), HeadSpec(1, "linear"),
                     name="uno_large")


def _nt3_nodes():
    conv = VariableNode((Identity(),) + tuple(Conv1D(8, k, 1) for k in (3, 4, 5, 6)), "Conv_Node")
    act = VariableNode((Identity(),) + tuple(Activation(f) for f in ("relu", "tanh", "sigmoid")), "Act_Node")
    pool = VariableNode((Identity(),) + tuple(MaxPooling1D(p) for p in (3, 4, 5, 6)), "Pool_Node")
    dense = VariableNode((Identity(),) + tuple(Dense(u) for u in (10, 50, 100, 200, 250, 500, 750, 1000)),
                         "Dense_Node")
    drop = VariableNode((Identity(),) + tuple(Dropout(r) for r in (0.5, 0.4, 0.3, 0.2, 0.1, 0.05)),
                        "Drop_Node")
    return conv, act, pool, dense, drop


def nt3_small(scale=1.0):
    conv, act, pool, dense, drop = _nt3_nodes()
    if scale != 1.0:
        dense = VariableNode(tuple(Dense(_w(op.units, scale)) if isinstance(op, Dense) else op
                                   for op in dense.choices), dense.name)
    cells = (
        CellSpec((BlockSpec((conv, act, pool)),)),
        CellSpec((BlockSpec((conv, act, pool)),)),
        CellSpec((BlockSpec((dense, act, drop)),)),
        CellSpec((BlockSpec((dense, act, drop)),)),
    )
    return SpaceSpec(tuple(InputSpec(*i) for i in NT3_INPUTS), cells, HeadSpec(2, "softmax"),
                     name="nt3_small")


def grid_space(arities, input_dim=4):
    """A single-block chain with one Dense-choice node per arity.

    Useful as a plain decision grid (e.g. for synthetic reward landscapes),
    where the ops themselves matter less than the slot structure.
    """
    arities = tuple(int(a) for a in arities)
    if not arities or min(arities) < 1:
        raise ValueError("grid_space needs at least one slot and positive arities")
    nodes = tuple(VariableNode(tuple(Dense(k + 1, "relu") for k in range(a)), f"Grid_Node{i}")
                  for i, a in enumerate(arities))
    name = "grid_" + "x".join(str(a) for a in arities)
    return SpaceSpec((InputSpec("x", input_dim),), (CellSpec((BlockSpec(nodes),)),),
                     HeadSpec(1, "linear"), name=name)


_BUILDERS = {
    "combo_small": combo_small,
    "combo_large": combo_large,
    "uno_small": uno_small,
    "uno_large": uno_large,
    "nt3_small": nt3_small,
}


def builtin_space(name, input_dims=None, unit_scale=1.0):
    """Return the named built-in ``SpaceSpec``.

    ``input_dims`` (name -> dim) overrides the benchmark's input widths.
    """
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise ValueError(f"unknown built-in space {name!r}; choose from {SPACE_NAMES}") from None
    spec = builder(unit_scale)
    if input_dims:
        spec = spec.with_input_dims(input_dims)
    return spec


def builtin_baseline(name, input_dims=None, unit_scale=1.0):
    """Manually designed reference network as an ``ArchGraph``.

    combo: a drug submodel of three Dense(1000) layers shared by both drug
    inputs, a cell submodel of three Dense(1000), concatenation, three more
    Dense(1000) and a scalar head. uno: three unshared submodels plus the
    dose input, concatenation, three Dense(1000) and a scalar head.
    """
    if name not in BASELINE_NAMES:
        raise ValueError(f"unknown baseline {name!r}; choose from {BASELINE_NAMES}")
    dims = dict(COMBO_INPUTS if name == "combo" else UNO_INPUTS)
    if input_dims:
        unknown = set(input_dims) - set(dims)
        if unknown:
            raise ValueError(f"unknown input names {sorted(unknown)}")
        dims.update({k: int(v) for k, v in input_dims.items()})
    widths = [_w(1000, unit_scale)] * 3
    b = GraphBuilder()
    ids = {n: b.add(Input(n, d)) for n, d in dims.items()}
    if name == "combo":
        cell = b.dense_stack(ids["cell_expression"], widths, tag_prefix="cell")
        d1 = b.dense_stack(ids["drug1_descriptors"], widths, tag_prefix="drug")
        d2 = b.dense_stack(ids["drug2_descriptors"], widths, tag_prefix="drug")
        merged = b.merge([cell, d1, d2])
    else:
        subs = [b.dense_stack(ids[n], widths, tag_prefix=n)
                for n in ("cell_rnaseq", "drug_descriptors", "drug_fingerprints")]
        merged = b.merge(subs + [ids["dose"]])
    top = b.dense_stack(merged, widths, tag_prefix="top")
    out = b.add(Dense(1, "linear"), [top], "head")
    return b.build(out)


def nt3_baseline(input_length=60483, unit_scale=1.0):
    """Best-effort NT3 reference (valid padding); its count is not the published one."""
    b = GraphBuilder()
    x = b.add(Input("rnaseq", input_length))
    x = b.add(Conv1D(128, 20, 1), [x], "conv0")
    x = b.add(Activation("relu"), [x])
    x = b.add(MaxPooling1D(1), [x])
    x = b.add(Conv1D(128, 10, 1), [x], "conv1")
    x = b.add(Activation("relu"), [x])
    x = b.add(MaxPooling1D(10), [x])
    x = b.add(Dense(_w(200, unit_scale), "relu"), [x], "dense0")
    x = b.add(Dropout(0.1), [x])
    x = b.add(Dense(_w(20, unit_scale), "relu"), [x], "dense1")
    x = b.add(Dropout(0.1), [x])
    out = b.add(Dense(2, "softmax"), [x], "head")
    return b.build(out)
