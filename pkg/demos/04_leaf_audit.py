"""
Why every tree needs many leaves
================================

"""
from lotbnb import (BnbNode, BnbTree, audit_tree, construct_witness, enumerate_S, hard_instance,
                    hard_opt_formula, solve_bnb, theorem_bound, verify_witness)
from lotbnb.bnb import INTEGRAL

# the fooling set: setup vectors with the non-free coordinates fixed to one
S = enumerate_S(5)
print("free periods", S.free)
for y in S.members:
    print(y)

# the midpoint of two members is feasible and cheaper than the integer optimum
w = construct_witness(5, S.members[0], S.members[-1])
print("yhat", w.yhat, "xhat", w.xhat)
print("objective", w.objective, "OPT", hard_opt_formula(5), verify_witness(hard_instance(5), w))

# a real tree keeps the members apart
_, _, tree = solve_bnb(hard_instance(10))
report = audit_tree(tree, 10)
print(report.to_text())

# a one-leaf "tree" is caught with an explicit counterexample
fake = BnbTree(4, complete=True, incumbent_value=hard_opt_formula(4))
fake.nodes[0] = BnbNode(0, None, (), status=INTEGRAL, bound=hard_opt_formula(4), feasible=True)
print(audit_tree(fake, 4).to_text())

for n in range(2, 17, 2):
    print(n, theorem_bound(n))
