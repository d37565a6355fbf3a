import io
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from lotbnb.bnb import (BRANCHED, DEPTH_FIRST, INTEGRAL, OPEN, PRUNED_BOUND, PRUNED_INFEASIBLE,
                        BnbTree, BranchingConstraint, BranchingRule, NoSplitFound,
                        SplitDisjunction, branch, choose_disjunction_general,
                        choose_disjunction_simple, node_relaxation, read_tree, solve_bnb,
                        split_through, tree_stats, write_tree)
from lotbnb.lotsizing import build_milp, dp_solve, hard_instance, hard_opt_formula, random_instance
from lotbnb.lp import lp_solve

from oracles import binary_vectors

RULES = [BranchingRule(), BranchingRule("first-fractional"), BranchingRule("random-split", seed=3)]


def test_split_disjunction_validation():
    with pytest.raises(ValueError):
        SplitDisjunction((0, 0), 0)
    with pytest.raises(TypeError):
        SplitDisjunction((F(1, 2), 1), 0)
    with pytest.raises(ValueError):
        BranchingConstraint(SplitDisjunction((1,), 0), "middle")


def test_simple_choice():
    assert choose_disjunction_simple((1, F(3, 10), 1)) == SplitDisjunction((0, 1, 0), 0)
    assert choose_disjunction_simple((F(1, 2), F(1, 2))) == SplitDisjunction((1, 0), 0)
    assert choose_disjunction_simple((1, F(1, 10), F(2, 5))).pi == (0, 0, 1)
    assert choose_disjunction_simple((1, F(1, 10), F(2, 5)), "first-fractional").pi == (0, 1, 0)
    with pytest.raises(ValueError):
        choose_disjunction_simple((0, 1))


def test_split_through():
    split = split_through((1, 1), (F(1, 2), 0))
    assert split == SplitDisjunction((1, 1), 0)
    assert BranchingConstraint(split, "lower").row().rhs == 0
    assert BranchingConstraint(split, "upper").row().rhs == 1
    assert split_through((2, 0), (F(1, 2), 0)) is None


def test_general_choice_cuts_point_and_is_seeded():
    point = (1, F(1, 3), F(1, 2), 0, F(3, 4))
    rule = BranchingRule("random-split", seed=11)
    rng1, rng2 = random.Random(5), random.Random(5)
    seq1 = [choose_disjunction_general(point, rule, rng1) for _ in range(20)]
    seq2 = [choose_disjunction_general(point, rule, rng2) for _ in range(20)]
    assert seq1 == seq2
    assert choose_disjunction_general(point, rule) == choose_disjunction_general(point, rule)
    for split in seq1:
        assert split.violated_by(point)
        assert all(-2 <= c <= 2 for c in split.pi)
    with pytest.raises(ValueError):
        choose_disjunction_general((1, 0), rule)


def test_general_choice_gives_up():
    with pytest.raises(NoSplitFound):
        choose_disjunction_general((F(1, 2),), BranchingRule("random-split", budget=0))


def test_branch_structure():
    tree = BnbTree.with_root(2)
    lo, hi = branch(tree, 0, SplitDisjunction((0, 1), 0))
    assert len(tree.nodes[lo].constraints) == len(tree.nodes[hi].constraints) == 1
    assert tree.nodes[0].status == BRANCHED
    assert tree_stats(tree)["nodes"] == 3
    assert tree_stats(tree)["leaves"] == 2
    assert tree_stats(tree)["depth"] == 1
    a, _ = branch(tree, lo, SplitDisjunction((1, 0), 0))
    assert len(tree.nodes[a].constraints) == 2
    with pytest.raises(ValueError):
        branch(tree, 0, SplitDisjunction((1, 0), 0))
    tree.nodes[hi].status = PRUNED_BOUND
    with pytest.raises(ValueError):
        branch(tree, hi, SplitDisjunction((1, 0), 0))


def test_branch_lower_child_infeasible_for_n1():
    tree = BnbTree.with_root(1)
    lo, hi = branch(tree, 0, SplitDisjunction((1,), 0))
    root_lp = build_milp(hard_instance(1)).relaxation()
    assert lp_solve(node_relaxation(root_lp, tree.nodes[lo].constraints)).status == "infeasible"
    assert lp_solve(node_relaxation(root_lp, tree.nodes[hi].constraints)).value == 2


def test_single_node_stats():
    stats = tree_stats(BnbTree.with_root(3))
    assert (stats["nodes"], stats["leaves"], stats["depth"]) == (1, 1, 0)


@pytest.mark.parametrize("rule", RULES, ids=lambda r: r.kind)
def test_n1_root_is_integral(rule):
    value, sol, tree = solve_bnb(hard_instance(1), rule, warm_start=False)
    assert value == 2
    assert len(tree) == 1
    assert tree.nodes[0].status == INTEGRAL
    value, _, tree = solve_bnb(hard_instance(1), rule)
    assert value == 2 and len(tree) == 1


@pytest.mark.parametrize("rule", RULES, ids=lambda r: r.kind)
@pytest.mark.parametrize("selection", ["best-bound", "depth-first"])
@pytest.mark.parametrize("warm", [True, False])
def test_hard_family_small(rule, selection, warm):
    for n in range(2, 8):
        value, sol, tree = solve_bnb(hard_instance(n), rule, selection, warm_start=warm,
                                     check_certificates=True)
        assert tree.complete
        assert value == hard_opt_formula(n)
        assert sol.integral
        stats = tree_stats(tree)
        assert stats["leaves"] ** 2 >= 2 ** (n - 2)
        assert stats["leaves"] == sum(1 for node in tree.nodes.values() if node.status != BRANCHED)
        assert stats["nodes"] == 2 * stats["leaves"] - 1


def test_cold_start_finds_integral_leaves():
    _, _, tree = solve_bnb(hard_instance(5), warm_start=False)
    assert any(node.status == INTEGRAL for node in tree.nodes.values())


def _check_tree_invariants(tree):
    for node in tree.nodes.values():
        assert node.status != OPEN
        if node.status == BRANCHED:
            lo, hi = (tree.nodes[c] for c in node.children)
            assert lo.constraints[:-1] == hi.constraints[:-1] == node.constraints
            assert lo.constraints[-1].disjunction == hi.constraints[-1].disjunction
            assert {lo.constraints[-1].side, hi.constraints[-1].side} == {"lower", "upper"}
            assert lo.constraints[-1].disjunction.violated_by(node.y)
            for child in (lo, hi):
                if child.feasible:
                    assert child.bound >= node.bound


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 7), st.integers(0, 2**32), st.sampled_from(RULES),
       st.sampled_from(["best-bound", "depth-first"]))
def test_random_instances_match_dp(n, seed, rule, selection):
    inst = random_instance(n, random.Random(seed))
    value, sol, tree = solve_bnb(inst, rule, selection, warm_start=bool(seed % 2),
                                 check_certificates=True)
    assert tree.complete
    assert value == dp_solve(inst)[0]
    _check_tree_invariants(tree)


@pytest.mark.parametrize("rule", RULES, ids=lambda r: r.kind)
def test_partition_exhaustive(rule):
    for n in range(2, 6):
        _, _, tree = solve_bnb(hard_instance(n), rule)
        ys = binary_vectors(n)
        for node in tree.nodes.values():
            if node.status != BRANCHED:
                continue
            lo, hi = (tree.nodes[c] for c in node.children)
            for y in ys:
                if all(c.satisfied(y) for c in node.constraints):
                    in_lo = all(c.satisfied(y) for c in lo.constraints)
                    in_hi = all(c.satisfied(y) for c in hi.constraints)
                    assert in_lo != in_hi


def _fingerprint(tree):
    return [(k, v.parent, v.constraints, v.status, v.bound) for k, v in sorted(tree.nodes.items())]


def test_determinism():
    rule = BranchingRule("random-split", seed=4)
    for selection in ("best-bound", "depth-first"):
        a = solve_bnb(hard_instance(7), rule, selection)[2]
        b = solve_bnb(hard_instance(7), rule, selection)[2]
        assert _fingerprint(a) == _fingerprint(b)


def test_node_cap_gives_incomplete_tree():
    dump = io.StringIO()
    value, _, tree = solve_bnb(hard_instance(8), node_cap=9, dump=dump)
    assert not tree.complete
    assert len(tree) <= 9
    assert any(node.status == OPEN for node in tree.nodes.values())
    back = read_tree(io.StringIO(dump.getvalue()))
    assert not back.complete
    with pytest.raises(ValueError):
        solve_bnb(hard_instance(2), node_cap=0)


def test_dump_round_trip_streaming_and_batch():
    stream = io.StringIO()
    _, _, tree = solve_bnb(hard_instance(6), BranchingRule("random-split", seed=2),
                           DEPTH_FIRST, dump=stream)
    batch = io.StringIO()
    write_tree(tree, batch)
    for text in (stream.getvalue(), batch.getvalue()):
        back = read_tree(io.StringIO(text))
        assert back.complete
        assert back.n == 6
        assert back.incumbent_value == hard_opt_formula(6)
        assert set(back.nodes) == set(tree.nodes)
        for k, node in tree.nodes.items():
            other = back.nodes[k]
            assert (other.parent, other.constraints, other.status) == \
                (node.parent, node.constraints, node.status)
            assert other.bound == node.bound
            assert other.children == node.children
    lines = stream.getvalue().splitlines()
    assert lines[0].startswith('{"type": "header"')
    assert lines[-1].startswith('{"type": "summary"')


def test_truncated_dump_is_incomplete():
    stream = io.StringIO()
    solve_bnb(hard_instance(5), dump=stream)
    lines = stream.getvalue().splitlines()
    cut = "\n".join(lines[:-1]) + "\n"
    assert not read_tree(io.StringIO(cut)).complete
    half = "\n".join(lines[:3]) + "\n" + lines[3][:10]
    assert not read_tree(io.StringIO(half)).complete


def test_infeasible_bound_text():
    stream = io.StringIO()
    solve_bnb(hard_instance(4), BranchingRule("random-split", seed=1), dump=stream)
    tree = read_tree(io.StringIO(stream.getvalue()))
    statuses = {node.status for node in tree.nodes.values()}
    assert statuses <= {BRANCHED, PRUNED_BOUND, PRUNED_INFEASIBLE, INTEGRAL}
    for node in tree.nodes.values():
        if node.status == PRUNED_INFEASIBLE:
            assert node.feasible is False
