"""Graph-structured architecture search spaces."""

from .builtins import BASELINE_NAMES, SPACE_NAMES, builtin_baseline, builtin_space, grid_space, mlp_choices, nt3_baseline
from .graph import ArchGraph, GraphBuilder, GraphNode
from .ops import (Activation, Add, Concatenate, Connect, Conv1D, Dense, Dropout, Identity, Input,
                  LayerOp, MaxPooling1D, op_from_dict)
from .search_space import (SearchSpace, Slot, SpaceError, build_space, decode, encoding_of,
                           sample_random, space_size)
from .spec import (BlockSpec, CellSpec, ConstantNode, HeadSpec, InputSpec, MirrorNode, SpaceSpec,
                   VariableNode, dump_spec, load_spec, node_path, spec_from_dict, spec_to_dict)
