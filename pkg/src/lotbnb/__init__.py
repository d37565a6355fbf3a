"""Exact-arithmetic branch-and-bound laboratory for uncapacitated lot sizing."""

from .bnb import (BnbNode, BnbTree, BranchingConstraint, BranchingRule, SplitDisjunction,
                  branch, choose_disjunction_general, choose_disjunction_simple, read_tree,
                  solve_bnb, tree_stats, write_tree)
from .certificate import (AuditReport, SetS, Witness, audit_tree, construct_witness,
                          enumerate_S, objective_identity, theorem_bound, verify_witness)
from .lotsizing import (Instance, MilpModel, Solution, brute_force_solve, build_milp,
                        check_feasible, cumulative_demand, dp_solve, evaluate_objective,
                        hard_instance, hard_opt_formula, random_instance, read_instance,
                        write_instance)
from .lp import LinearProgram, LpSolution, Row, lp_solve, verify_certificate, with_extra_rows

__version__ = "0.1.0"
