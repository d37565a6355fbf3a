"""
Lot sizing with the O(n^2) dynamic program
==========================================

"""
import random
from fractions import Fraction

from lotbnb import Instance, brute_force_solve, dp_solve, hard_instance, hard_opt_formula

# a small plan: producing both periods' demand up front saves one setup
inst = Instance(2, p=[1, 1], f=[10, 10], d=[1, 1])
value, plan = dp_solve(inst)
print("value", value, "x", plan.x, "y", plan.y)

# the hard family has p_i = n - i + 1 and unit setups and demands
for n in (1, 5, 10, 50):
    value, _ = dp_solve(hard_instance(n))
    print(n, value, value == hard_opt_formula(n))

# rational data is kept exact end to end
rng = random.Random(0)
inst = Instance(4, [Fraction(rng.randint(1, 9), 4) for _ in range(4)], [3, 1, 4, 1], [2, 0, 1, Fraction(1, 2)])
print(dp_solve(inst)[0], brute_force_solve(inst)[0])
