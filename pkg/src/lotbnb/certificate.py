"""Leaf lower bound for the hard lot-sizing family, checked instance by instance.

The fooling set ``S`` holds binary setup vectors that share every forced
coordinate and differ only on a set of "free" periods.  For two distinct
members ``u, v`` the midpoint ``(u + v) / 2`` extends to a fractional plan
that is feasible for any node containing both and costs ``OPT - n_half / 2``,
so no leaf of a finished tree can contain two members.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .bnb import BRANCHED, OPEN, BnbTree
from .lotsizing import (Solution, check_feasible, evaluate_objective, hard_instance,
                        hard_opt_formula)

HALF = Fraction(1, 2)


class IncompleteTreeError(ValueError):
    """The tree did not finish; it proves nothing about leaf counts."""


@dataclass(frozen=True)
class SetS:
    n: int
    free: tuple
    members: tuple

    def __len__(self):
        return len(self.members)

    def __contains__(self, y):
        return tuple(y) in self.members


@dataclass(frozen=True)
class Witness:
    u: tuple
    v: tuple
    xhat: tuple
    yhat: tuple
    n_half: int
    objective: Fraction

    @property
    def n(self) -> int:
        return len(self.yhat)

    def solution(self) -> Solution:
        return Solution(self.xhat, self.yhat)


@dataclass(frozen=True)
class WitnessCheck:
    ok: bool
    reason: str = ""

    def __bool__(self):
        return self.ok


def free_periods(n: int) -> tuple:
    """1-based periods left free in the fooling set."""
    if n % 2:
        return tuple(range(2, n, 2))
    return tuple(range(3, n, 2))


def _leaders(n: int) -> tuple:
    # a leader j is paired with the free period j + 1
    return tuple(j - 1 for j in free_periods(n))


def theorem_bound(n: int) -> int:
    """Smallest integer leaf count meeting ``2 ** (n/2 - 1)``."""
    if n < 2:
        return 1
    if n % 2 == 0:
        return 2 ** ((n - 2) // 2)
    return math.isqrt(2 ** (n - 2)) + 1


def enumerate_S(n: int) -> SetS:
    """All binary ``y`` with the forced periods at 1, in lexicographic order.

    Odd ``n`` forces every odd period; even ``n`` forces period 1 and every
    even period.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    free = free_periods(n)
    members = []
    for bits in itertools.product((0, 1), repeat=len(free)):
        y = [1] * n
        for j, b in zip(free, bits):
            y[j - 1] = b
        members.append(tuple(y))
    return SetS(n, free, tuple(members))


def construct_witness(n: int, u: Sequence[int], v: Sequence[int]) -> Witness:
    """Fractional plan over the midpoint of two distinct fooling-set members.

    Each leader period ``j`` is paired with the free period ``j + 1``: when
    ``yhat[j+1] == 0`` period ``j`` produces both demands (``x = 2, 0``),
    otherwise each period produces its own unit.  Every other period
    produces exactly its own demand.
    """
    u, v = tuple(u), tuple(v)
    s = enumerate_S(n)
    if u not in s or v not in s:
        raise ValueError("u and v must both belong to the fooling set")
    if u == v:
        raise ValueError("u and v must differ")
    yhat = tuple(Fraction(a + b, 2) for a, b in zip(u, v))
    xhat = [Fraction(1)] * n
    for j in _leaders(n):
        if yhat[j] == 0:  # period j + 1, 0-based index j
            xhat[j - 1] = Fraction(2)
            xhat[j] = Fraction(0)
    n_half = sum(1 for y in yhat if y == HALF)
    objective = evaluate_objective(hard_instance(n), Solution(xhat, yhat))
    return Witness(u, v, tuple(xhat), yhat, n_half, objective)


def period_costs(w: Witness) -> list:
    """Per-period cost ``p_j x_j + f_j y_j`` of the witness on the hard instance."""
    inst = hard_instance(w.n)
    return [p * x + f * y for p, f, x, y in zip(inst.p, inst.f, w.xhat, w.yhat)]


def objective_identity(n: int, w: Witness) -> bool:
    """Does the witness cost exactly ``OPT - n_half / 2``?"""
    value = evaluate_objective(hard_instance(n), w.solution())
    return value == hard_opt_formula(n) - Fraction(w.n_half, 2) and value == w.objective


def verify_witness(inst, w: Witness, constraints: Sequence = ()) -> WitnessCheck:
    """Is ``w`` a point of the node LP under ``constraints`` that beats OPT?"""
    n = inst.n
    if inst != hard_instance(n):
        return WitnessCheck(False, "instance is not the hard family")
    if len(w.yhat) != n or len(w.xhat) != n:
        return WitnessCheck(False, "witness has the wrong length")
    violations = check_feasible(inst, w.solution())
    if violations:
        return WitnessCheck(False, f"{violations[0]}")
    for k, c in enumerate(constraints):
        if len(c.disjunction.pi) != n:
            return WitnessCheck(False, f"branching constraint {k} has the wrong length")
        if not c.satisfied(w.yhat):
            return WitnessCheck(False, f"branching constraint {k} violated")
    value = evaluate_objective(inst, w.solution())
    if value != w.objective:
        return WitnessCheck(False, "stored objective does not match the plan")
    if not value < hard_opt_formula(n):
        return WitnessCheck(False, "objective does not beat OPT")
    return WitnessCheck(True)


@dataclass
class AuditReport:
    n: int
    size_S: int
    leaf_count: int
    bound: int
    max_members_per_leaf: int
    passed: bool
    members_per_leaf: dict = field(default_factory=dict)
    reasons: list = field(default_factory=list)
    offending_leaf: Optional[int] = None
    witness: Optional[Witness] = None
    strict: bool = False

    def to_text(self) -> str:
        def vec(xs):
            return "(" + ", ".join(str(x) for x in xs) + ")"

        lines = [
            f"n: {self.n}",
            f"S_size: {self.size_S}",
            f"leaves: {self.leaf_count}",
            f"bound: {self.bound}",
            f"bound_formula: 2^(n/2-1)",
            f"strong_bound: {self.size_S}",
            f"strict: {str(self.strict).lower()}",
            f"max_members_per_leaf: {self.max_members_per_leaf}",
            f"result: {'PASS' if self.passed else 'FAIL'}",
        ]
        for reason in self.reasons:
            lines.append(f"reason: {reason}")
        if self.offending_leaf is not None:
            lines.append(f"offending_leaf: {self.offending_leaf}")
        if self.witness is not None:
            w = self.witness
            lines += [
                f"witness_u: {vec(w.u)}",
                f"witness_v: {vec(w.v)}",
                f"witness_yhat: {vec(w.yhat)}",
                f"witness_xhat: {vec(w.xhat)}",
                f"witness_n_half: {w.n_half}",
                f"witness_objective: {w.objective}",
            ]
        return "\n".join(lines) + "\n"


def _members_by_leaf(tree: BnbTree, members, reasons: list) -> dict:
    """Route every member down the tree; returns ``{leaf id: [member, ...]}``.

    A child's constraint list must extend its parent's by exactly one
    constraint, so only the newest constraint is tested on the way down.
    """
    nodes = tree.nodes
    for node in nodes.values():
        if node.parent is None:
            continue
        parent = nodes.get(node.parent)
        if parent is None or node.constraints[:-1] != parent.constraints or \
                len(node.constraints) != len(parent.constraints) + 1:
            reasons.append(f"node {node.id} does not extend its parent's constraints by one")
    root = nodes[tree.root]
    out: dict = {}
    for y in members:
        if not all(c.satisfied(y) for c in root.constraints):
            continue
        todo = [root]
        while todo:
            node = todo.pop()
            if node.status != BRANCHED:
                out.setdefault(node.id, []).append(y)
                continue
            for cid in node.children:
                child = nodes[cid]
                if child.constraints and child.constraints[-1].satisfied(y):
                    todo.append(child)
    return out


def audit_tree(tree: BnbTree, n: int, strict: bool = False) -> AuditReport:
    """Check the leaf lower bound on a finished tree for ``hard_instance(n)``.

    Every member of the fooling set must reach at least one leaf, and no leaf
    may hold two members: for such a leaf the midpoint witness is built and,
    if it satisfies the leaf's constraints, the leaf's claimed status is
    refuted.  ``strict`` additionally demands ``|S|`` leaves (stronger than
    the stated bound when ``n`` is odd).
    """
    if not tree.complete:
        raise IncompleteTreeError("tree is incomplete")
    if tree.n != n:
        raise ValueError(f"tree is for n={tree.n}, expected n={n}")
    s = enumerate_S(n)
    reasons: list = []
    leaves = [node for node in tree.nodes.values() if node.status != BRANCHED]
    opt = hard_opt_formula(n)
    if tree.incumbent_value != opt:
        reasons.append(f"incumbent {tree.incumbent_value} differs from the optimum {opt}")
    for node in leaves:
        if node.status == OPEN:
            reasons.append(f"leaf {node.id} is still open")
    by_leaf = _members_by_leaf(tree, s.members, reasons)
    covered = {y for ys in by_leaf.values() for y in ys}
    missing = [y for y in s.members if y not in covered]
    if missing:
        reasons.append(f"{len(missing)} fooling-set members reach no leaf")

    report = AuditReport(n, len(s), len(leaves), theorem_bound(n),
                         max((len(ys) for ys in by_leaf.values()), default=0),
                         passed=False, members_per_leaf=by_leaf, strict=strict)
    inst = hard_instance(n)
    for leaf_id in sorted(by_leaf):
        ys = by_leaf[leaf_id]
        if len(ys) < 2:
            continue
        leaf = tree.nodes[leaf_id]
        w = construct_witness(n, ys[0], ys[1])
        check = verify_witness(inst, w, leaf.constraints)
        if check:
            reasons.append(f"leaf {leaf_id} ({leaf.status}) admits a point of value "
                           f"{w.objective} < {opt}")
        else:
            reasons.append(f"leaf {leaf_id} holds {len(ys)} members but the witness "
                           f"failed: {check.reason}")
        if report.witness is None:
            report.offending_leaf = leaf_id
            report.witness = w
    if report.leaf_count < report.bound:
        reasons.append(f"{report.leaf_count} leaves is below the bound {report.bound}")
    if strict and report.leaf_count < len(s):
        reasons.append(f"{report.leaf_count} leaves is below |S| = {len(s)}")
    report.reasons = reasons
    report.passed = not reasons
    return report
