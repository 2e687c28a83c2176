"""A walk through the Combo search space.

Run with ``python demos/space_tour.py``. We build the small Combo space,
count its architectures exactly, draw one at random, decode it into a layer
graph and compile it against the three input groups of the mini dataset.
"""

from rlnas.netbench import compile_graph, count_params, generate_dataset
from rlnas.space import build_space, builtin_baseline, builtin_space, decode, sample_random


def main():
    data = generate_dataset("combo-mini", seed=0)
    print("input groups:", dict(data.input_dims))

    space = build_space(builtin_space("combo_small", data.input_dims))
    print(f"combo_small has {space.num_slots} decisions and {space.size:,} architectures")

    # An encoding is one integer per decision, in pre-order over cells, blocks and nodes.
    encoding = sample_random(space, rng_seed=3)
    print("sampled encoding:", "-".join(map(str, encoding)))
    for slot, choice in list(zip(space.slots, encoding))[:6]:
        print(f"  {slot.path:<14} picks option {choice} of {slot.arity}")
    print("  ...")

    graph = decode(space, encoding)
    program = compile_graph(graph, data.input_dims, data.task)
    print(f"decoded graph: {len(graph.nodes)} nodes, {count_params(program):,} trainable parameters")

    # The hand-designed reference network, compiled at full width for comparison.
    reference = compile_graph(builtin_baseline("combo"))
    print(f"hand-designed Combo network: {count_params(reference):,} parameters")


if __name__ == "__main__":
    main()
