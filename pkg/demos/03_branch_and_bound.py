"""
Branch and bound with variable and general splits
=================================================

"""
import io

from lotbnb import BranchingRule, hard_instance, read_tree, solve_bnb, tree_stats

inst = hard_instance(8)

# most-fractional variable branching, best-bound node selection
value, plan, tree = solve_bnb(inst)
print("most-fractional", value, tree_stats(tree))

# random split disjunctions with small integer coefficients
for seed in (1, 2, 3):
    value, _, tree = solve_bnb(inst, BranchingRule("random-split", seed=seed), "depth-first")
    print("random-split seed", seed, value, tree_stats(tree))

# without the dynamic-programming incumbent the tree has to find one itself
value, _, tree = solve_bnb(inst, warm_start=False)
print("cold start", value, tree_stats(tree))

# trees stream to JSON lines as nodes are closed
buf = io.StringIO()
solve_bnb(hard_instance(4), dump=buf)
print(buf.getvalue().splitlines()[0])
print(len(read_tree(io.StringIO(buf.getvalue()))), "nodes read back")
