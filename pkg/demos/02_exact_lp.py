"""
Exact simplex and its certificates
==================================

"""
from lotbnb import build_milp, hard_instance, lp_solve, verify_certificate
from lotbnb.lp import GE, LE, LinearProgram, Row

# the LP relaxation of the hard n=2 instance sits strictly below the integer optimum 5
lp = build_milp(hard_instance(2)).relaxation()
sol = lp_solve(lp)
print(sol.status, sol.value, sol.point)
print("row multipliers", sol.certificate, "checks out:", verify_certificate(lp, sol))

# x <= 1 and x >= 2 cannot both hold; the certificate is a Farkas combination
bad = LinearProgram((0,), (Row((1,), LE, 1), Row((1,), GE, 2)))
sol = lp_solve(bad)
print(sol.status, sol.certificate, verify_certificate(bad, sol))

# minimise -x subject to x - y <= 1 runs off along a ray
sol = lp_solve(LinearProgram((-1, 0), (Row((1, -1), LE, 1),)))
print(sol.status, sol.certificate)
