import math
import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rlnas.space import (Add, BlockSpec, CellSpec, ConstantNode, Connect, Dense, Dropout, HeadSpec,
                         Identity, InputSpec, MirrorNode, SpaceError, SpaceSpec, VariableNode,
                         builtin_baseline, builtin_space, build_space, decode, encoding_of,
                         grid_space, mlp_choices, sample_random, space_size, spec_from_dict,
                         spec_to_dict, SPACE_NAMES)
from rlnas.space.graph import ArchGraph


def one_cell(*blocks, inputs=(("x", 4),), **kw):
    return SpaceSpec(tuple(InputSpec(n, d) for n, d in inputs), (CellSpec(tuple(blocks)),),
                     HeadSpec(1, "linear"), **kw)


@pytest.fixture(scope="module")
def spaces():
    return {name: build_space(builtin_space(name)) for name in SPACE_NAMES}


def test_combo_small_slots(spaces):
    s = spaces["combo_small"]
    assert s.num_slots == 13
    assert sorted(s.arities) == [9] + [13] * 12
    assert space_size(s) == 209_682_766_102_329 == 13 ** 12 * 9


def test_nt3_small_size_and_dense_arity(spaces):
    s = spaces["nt3_small"]
    assert space_size(s) == 635_040_000 == (5 * 4 * 5) ** 2 * (9 * 4 * 7) ** 2
    assert s.arities[6] == 9


def test_other_builtin_sizes_follow_the_product_rule(spaces):
    assert space_size(spaces["uno_small"]) == 13 ** 15
    combo_large = space_size(spaces["combo_large"])
    assert f"{combo_large:.3e}" == "2.987e+45"
    for s in spaces.values():
        assert space_size(s) == math.prod(s.arities)
        assert isinstance(space_size(s), int)


def test_mlp_node_has_thirteen_options():
    ops = mlp_choices()
    assert len(ops) == 13 and ops[0] == Identity() and Dense(1000, "relu") in ops
    assert sum(isinstance(o, Dropout) for o in ops) == 3


def test_single_choice_space():
    s = build_space(one_cell(BlockSpec((VariableNode((Dense(3),)),))))
    assert s.size == 1 and s.num_slots == 1


def test_empty_decision_list_has_size_one():
    s = build_space(one_cell(BlockSpec((ConstantNode(Dense(2)),))))
    assert s.num_slots == 0 and space_size(s) == 1
    assert sample_random(s, 0) == ()


def test_build_is_idempotent():
    spec = builtin_space("combo_small")
    a, b = build_space(spec), build_space(spec)
    assert a == b and a.slots == b.slots


def test_forward_mirror_is_rejected():
    spec = one_cell(BlockSpec((MirrorNode("C0.B1.N0"),)), BlockSpec((VariableNode((Dense(2),)),)))
    with pytest.raises(SpaceError, match="forward mirror"):
        build_space(spec)


def test_dangling_mirror_is_rejected():
    spec = one_cell(BlockSpec((MirrorNode("C0.B7.N0"),)))
    with pytest.raises(SpaceError, match="C0.B7.N0"):
        build_space(spec)


def test_mirror_of_constant_is_rejected():
    spec = one_cell(BlockSpec((ConstantNode(Dense(2)), MirrorNode("C0.B0.N0"))))
    with pytest.raises(SpaceError):
        build_space(spec)


def test_unresolvable_connect_target():
    spec = one_cell(BlockSpec((VariableNode((Connect(("input:nope",)),)),)))
    with pytest.raises(SpaceError, match="C0.B0.N0.*nope"):
        build_space(spec)


def test_cyclic_block_is_rejected():
    block = BlockSpec((VariableNode((Dense(2),)), VariableNode((Dense(2),))),
                      edges=(("in", 0), (0, 1), (1, 0)))
    with pytest.raises(SpaceError, match="cycl"):
        build_space(one_cell(block))


def test_sample_random_is_deterministic_and_in_range(spaces):
    s = spaces["uno_large"]
    assert sample_random(s, 7) == sample_random(s, 7)
    for enc in sample_random(s, 3, n=50):
        s.validate_encoding(enc)


def test_sample_random_is_uniform_binomial_oracle():
    s = build_space(grid_space([4]))
    draws = np.array(sample_random(s, 11, n=100_000))[:, 0]
    n, p = len(draws), 0.25
    sigma = math.sqrt(n * p * (1 - p))
    for k in range(4):
        assert abs(np.sum(draws == k) - n * p) <= 4 * sigma


def test_arity_one_space_samples_zeros():
    s = build_space(grid_space([1, 1, 1]))
    assert sample_random(s, 5) == (0, 0, 0)


def test_mirror_branch_shares_ops_and_tags(spaces):
    s = spaces["combo_small"]
    enc = [0] * 13
    dense1000 = mlp_choices().index(Dense(1000, "relu"))
    for k in range(3):
        enc[s.slot_index(f"C0.B1.N{k}")] = dense1000
    g = decode(s, enc)
    dense = [n for n in g.nodes if n.op == Dense(1000, "relu")]
    assert len(dense) == 6
    tags = sorted(n.tag for n in dense)
    assert tags == sorted(["C0.B1.N0", "C0.B1.N1", "C0.B1.N2"] * 2)


def _input_fanout(graph, name):
    node = next(n for n in graph.input_nodes if n.op.name == name)
    return sum(1 for src, _ in graph.edges() if src == node.id)


def test_null_connect_adds_no_edge(spaces):
    s = spaces["combo_small"]
    k = s.slot_index("C1.B1.N0")
    enc = [1] * 13
    enc[k] = 0
    null_graph = decode(s, enc)
    enc[k] = 1  # cell expression
    skip_graph = decode(s, enc)
    assert _input_fanout(skip_graph, "cell_expression") == _input_fanout(null_graph, "cell_expression") + 1
    assert len(skip_graph.edges()) > len(null_graph.edges())


def test_all_identity_collapses_to_head():
    s = build_space(one_cell(BlockSpec((VariableNode((Identity(), Dense(3))),) * 3)))
    g = decode(s, (0, 0, 0))
    assert len(g.nodes) == 2
    assert g.nodes[g.output].inputs == (g.input_nodes[0].id,)


def test_mirror_blocks_add_no_slots():
    spec = builtin_space("combo_small")
    cell0 = spec.cells[0]
    trimmed = SpaceSpec(spec.inputs, (CellSpec(cell0.blocks[:2]),) + spec.cells[1:], spec.head,
                        output_cells=spec.output_cells)
    assert build_space(trimmed).size == build_space(spec).size


@pytest.mark.parametrize("name", SPACE_NAMES)
def test_decode_is_acyclic_and_round_trips(spaces, name):
    s = spaces[name]
    for enc in sample_random(s, 99, n=1000):
        g = decode(s, enc)
        assert len(g.topological_order()) == len(g.nodes)
        assert encoding_of(s, g) == enc


@st.composite
def small_specs(draw):
    """Random one- or two-cell specs with Variable, Constant and Mirror nodes."""
    cells, variables = [], []
    for ci in range(draw(st.integers(1, 2))):
        blocks = []
        for bi in range(draw(st.integers(1, 2))):
            nodes = []
            for ni in range(draw(st.integers(1, 3))):
                kind = draw(st.sampled_from(["var", "var", "const", "mirror"]))
                if kind == "mirror" and variables:
                    nodes.append(MirrorNode(draw(st.sampled_from(variables))))
                elif kind == "const":
                    nodes.append(ConstantNode(Dense(2, "relu")))
                else:
                    a = draw(st.integers(1, 4))
                    nodes.append(VariableNode(tuple(Dense(k + 1) for k in range(a))))
            for ni, node in enumerate(nodes):
                if isinstance(node, VariableNode):
                    variables.append(f"C{ci}.B{bi}.N{ni}")
            blocks.append(BlockSpec(tuple(nodes)))
        cells.append(CellSpec(tuple(blocks), draw(st.sampled_from(["concatenate", "add"]))))
    return SpaceSpec((InputSpec("x", 3),), tuple(cells), HeadSpec(1, "linear"))


@given(small_specs())
def test_size_equals_enumeration_count(spec):
    s = build_space(spec)
    encodings = list(s.enumerate())
    assert len(encodings) == s.size
    for enc in encodings[:50]:
        g = decode(s, enc)
        g.topological_order()
        assert encoding_of(s, g) == enc


@given(small_specs())
def test_spec_json_round_trip(spec):
    again = spec_from_dict(json.loads(json.dumps(spec_to_dict(spec))))
    assert again == spec
    assert build_space(again).arities == build_space(spec).arities


def test_graph_json_round_trip(spaces):
    s = spaces["uno_small"]
    g = decode(s, sample_random(s, 4))
    assert ArchGraph.from_dict(json.loads(g.to_json())) == g


def test_unknown_names_raise():
    with pytest.raises(ValueError):
        builtin_space("resnet")
    with pytest.raises(ValueError):
        builtin_baseline("nt3")


def test_decode_rejects_bad_encodings(spaces):
    s = spaces["combo_small"]
    with pytest.raises(ValueError):
        decode(s, (0,) * 12)
    with pytest.raises(ValueError):
        decode(s, (13,) + (0,) * 12)


def test_baseline_input_dims():
    g = builtin_baseline("combo")
    assert tuple(n.op.dim for n in g.input_nodes) == (942, 3820, 3820)


def test_uno_constant_add_nodes_are_not_slots(spaces):
    s = spaces["uno_small"]
    paths = [slot.path for slot in s.slots]
    assert "C1.B0.N2" not in paths and "C1.B0.N4" not in paths
    g = decode(s, [1] * 15)
    assert sum(isinstance(n.op, Add) for n in g.nodes) == 2
