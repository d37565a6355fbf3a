"""Branch-and-bound over the lot-sizing MILP with split disjunctions on ``y``.

Every node LP is solved from scratch with the exact simplex in
:mod:`lotbnb.lp`.  The explored tree is kept in full so it can be audited
afterwards, and it can be streamed to a line-oriented dump while the search
runs.
"""
from __future__ import annotations

import heapq
import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .lotsizing import Instance, Solution, build_milp, dp_solve, format_rational
from .lp import GE, LE, LinearProgram, Row, ZERO, lp_solve, verify_certificate, with_extra_rows

LOWER, UPPER = "lower", "upper"

BRANCHED = "branched"
PRUNED_BOUND = "pruned-by-bound"
PRUNED_INFEASIBLE = "pruned-infeasible"
INTEGRAL = "integral-leaf"
OPEN = "open"
STATUSES = (BRANCHED, PRUNED_BOUND, PRUNED_INFEASIBLE, INTEGRAL, OPEN)

MOST_FRACTIONAL = "most-fractional"
FIRST_FRACTIONAL = "first-fractional"
RANDOM_SPLIT = "random-split"
RULE_ALIASES = {
    "most-fractional": MOST_FRACTIONAL,
    "most-fractional-variable": MOST_FRACTIONAL,
    "first-fractional": FIRST_FRACTIONAL,
    "lexicographic-first-fractional": FIRST_FRACTIONAL,
    "random-split": RANDOM_SPLIT,
}

BEST_BOUND = "best-bound"
DEPTH_FIRST = "depth-first"
SELECTIONS = (BEST_BOUND, DEPTH_FIRST)

DEFAULT_NODE_CAP = 10**6


class NoSplitFound(RuntimeError):
    """The random split sampler exhausted its rejection budget."""


@dataclass(frozen=True)
class SplitDisjunction:
    """``pi . y <= eta``  or  ``pi . y >= eta + 1`` for integer ``pi`` and ``eta``."""

    pi: tuple
    eta: int

    def __post_init__(self):
        pi = tuple(self.pi)
        if not all(isinstance(a, int) for a in pi) or not isinstance(self.eta, int):
            raise TypeError("pi and eta must be integers")
        if not any(pi):
            raise ValueError("pi must not be the zero vector")
        object.__setattr__(self, "pi", pi)

    @classmethod
    def unit(cls, n: int, index: int, eta: int) -> "SplitDisjunction":
        pi = [0] * n
        pi[index] = 1
        return cls(tuple(pi), eta)

    def dot(self, y: Sequence) -> Fraction:
        return sum((a * v for a, v in zip(self.pi, y) if a), ZERO)

    def violated_by(self, y: Sequence) -> bool:
        """True when ``y`` lies strictly inside the split's excluded slab."""
        value = self.dot(y)
        return self.eta < value < self.eta + 1


@dataclass(frozen=True)
class BranchingConstraint:
    disjunction: SplitDisjunction
    side: str

    def __post_init__(self):
        if self.side not in (LOWER, UPPER):
            raise ValueError(f"side must be {LOWER!r} or {UPPER!r}")

    def satisfied(self, y: Sequence) -> bool:
        value = self.disjunction.dot(y)
        if self.side == LOWER:
            return value <= self.disjunction.eta
        return value >= self.disjunction.eta + 1

    def row(self) -> Row:
        """The constraint as an LP row over ``(x, y)``."""
        pi = self.disjunction.pi
        coeffs = (0,) * len(pi) + pi
        if self.side == LOWER:
            return Row(coeffs, LE, self.disjunction.eta, "split")
        return Row(coeffs, GE, self.disjunction.eta + 1, "split")

    def to_record(self) -> dict:
        return {"pi": list(self.disjunction.pi), "eta": self.disjunction.eta, "side": self.side}

    @classmethod
    def from_record(cls, rec: dict) -> "BranchingConstraint":
        return cls(SplitDisjunction(tuple(int(a) for a in rec["pi"]), int(rec["eta"])), rec["side"])


@dataclass(frozen=True)
class BranchingRule:
    """How to pick a disjunction at a fractional node.

    ``coefficient_bound`` and ``budget`` only matter for random splits: the
    entries of ``pi`` are drawn from ``[-coefficient_bound, coefficient_bound]``
    and sampling gives up (falling back to most-fractional) after ``budget``
    rejections.
    """

    kind: str = MOST_FRACTIONAL
    coefficient_bound: int = 2
    seed: int = 0
    budget: int = 50

    def __post_init__(self):
        kind = RULE_ALIASES.get(self.kind)
        if kind is None:
            raise ValueError(f"unknown branching rule {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if self.coefficient_bound < 1:
            raise ValueError("coefficient_bound must be >= 1")


@dataclass
class BnbNode:
    id: int
    parent: Optional[int]
    constraints: tuple
    depth: int = 0
    status: str = OPEN
    bound: Optional[Fraction] = None
    feasible: Optional[bool] = None
    point: Optional[tuple] = None
    disjunction: Optional[SplitDisjunction] = None
    children: tuple = ()
    fallback: bool = False

    @property
    def is_leaf(self) -> bool:
        return self.status != BRANCHED

    @property
    def y(self) -> Optional[tuple]:
        if self.point is None:
            return None
        return self.point[len(self.point) // 2:]


@dataclass
class BnbTree:
    n: int
    nodes: dict = field(default_factory=dict)
    root: int = 0
    incumbent: Optional[Solution] = None
    incumbent_value: Optional[Fraction] = None
    complete: bool = False
    meta: dict = field(default_factory=dict)

    @classmethod
    def with_root(cls, n: int, **meta) -> "BnbTree":
        tree = cls(n, meta=meta)
        tree.nodes[0] = BnbNode(0, None, ())
        return tree

    def leaves(self) -> list:
        return [node for node in self.nodes.values() if node.is_leaf]

    def __len__(self):
        return len(self.nodes)


def node_relaxation(root_lp: LinearProgram, constraints: Sequence[BranchingConstraint]) -> LinearProgram:
    return with_extra_rows(root_lp, (c.row() for c in constraints))


def _fraction_part(v: Fraction) -> Fraction:
    return v - math.floor(v)


def choose_disjunction_simple(point: Sequence, mode: str = MOST_FRACTIONAL) -> SplitDisjunction:
    """Variable split ``y_i <= floor(y_i)`` / ``y_i >= floor(y_i) + 1``.

    ``most-fractional`` takes the coordinate whose fractional part is closest
    to 1/2 (lowest index on ties); ``first-fractional`` takes the first
    non-integer coordinate.
    """
    mode = RULE_ALIASES.get(mode, mode)
    best = None
    best_score = None
    for i, v in enumerate(point):
        frac = _fraction_part(Fraction(v))
        if not frac:
            continue
        if mode == FIRST_FRACTIONAL:
            best = i
            break
        if mode != MOST_FRACTIONAL:
            raise ValueError(f"unknown simple branching mode {mode!r}")
        score = min(frac, 1 - frac)
        if best_score is None or score > best_score:
            best, best_score = i, score
    if best is None:
        raise ValueError("point is integral; nothing to branch on")
    return SplitDisjunction.unit(len(point), best, math.floor(Fraction(point[best])))


def split_through(pi: Sequence[int], point: Sequence) -> Optional[SplitDisjunction]:
    """The split with normal ``pi`` whose slab contains ``point``, or ``None``
    when ``pi . point`` is an integer (no split with this ``pi`` cuts it off)."""
    value = sum((a * Fraction(v) for a, v in zip(pi, point) if a), ZERO)
    if value.denominator == 1:
        return None
    return SplitDisjunction(tuple(pi), math.floor(value))


def _most_fractional_index(point: Sequence[Fraction]) -> int:
    best, best_score = None, None
    for i, v in enumerate(point):
        frac = _fraction_part(v)
        if frac:
            score = min(frac, 1 - frac)
            if best_score is None or score > best_score:
                best, best_score = i, score
    return best


def choose_disjunction_general(point: Sequence, rule: BranchingRule,
                               rng: Optional[random.Random] = None) -> SplitDisjunction:
    """Sample a sparse random integer split that cuts off ``point``.

    Each draw puts a random nonzero coefficient in ``[-B, B]`` on the most
    fractional coordinate and, with probability 1/2, a random coefficient in
    ``[-B, B]`` on one other uniformly chosen coordinate (``B`` is
    ``rule.coefficient_bound``).  Draws with integral ``pi . point`` are
    rejected; ``eta = floor(pi . point)``.  Raises :class:`NoSplitFound`
    after ``rule.budget`` rejections.
    """
    point = tuple(Fraction(v) for v in point)
    anchor = _most_fractional_index(point)
    if anchor is None:
        raise ValueError("point is integral; nothing to branch on")
    if rng is None:
        rng = random.Random(rule.seed)
    bound = rule.coefficient_bound
    nonzero = [a for a in range(-bound, bound + 1) if a]
    n = len(point)
    for _ in range(rule.budget):
        pi = [0] * n
        pi[anchor] = rng.choice(nonzero)
        if n > 1 and rng.random() < 0.5:
            other = rng.randrange(n - 1)
            other += other >= anchor
            pi[other] = rng.randint(-bound, bound)
        split = split_through(pi, point)
        if split is not None:
            return split
    raise NoSplitFound(f"no split found in {rule.budget} draws")


def branch(tree: BnbTree, node_id: int, disjunction: SplitDisjunction):
    """Split an open node into its lower and upper child; returns their ids."""
    node = tree.nodes[node_id]
    if node.status != OPEN:
        raise ValueError(f"node {node_id} is {node.status}; only open nodes can be branched")
    if len(disjunction.pi) != tree.n:
        raise ValueError(f"disjunction has length {len(disjunction.pi)}, expected {tree.n}")
    ids = []
    for side in (LOWER, UPPER):
        child_id = len(tree.nodes)
        while child_id in tree.nodes:
            child_id += 1
        child = BnbNode(child_id, node_id,
                        node.constraints + (BranchingConstraint(disjunction, side),),
                        depth=node.depth + 1)
        tree.nodes[child_id] = child
        ids.append(child_id)
    node.status = BRANCHED
    node.disjunction = disjunction
    node.children = tuple(ids)
    return ids[0], ids[1]


def tree_stats(tree: BnbTree) -> dict:
    nodes = list(tree.nodes.values())
    return {
        "nodes": len(nodes),
        "leaves": sum(1 for node in nodes if node.is_leaf),
        "depth": max((node.depth for node in nodes), default=0),
        "incumbent": tree.incumbent_value,
    }


def _is_integral(y) -> bool:
    return all(Fraction(v).denominator == 1 for v in y)


def solve_bnb(inst: Instance, rule: BranchingRule = BranchingRule(), selection: str = BEST_BOUND,
              node_cap: int = DEFAULT_NODE_CAP, warm_start: bool = True, dump=None,
              check_certificates: bool = False):
    """Solve ``inst`` by LP-based branch and bound.

    Parameters
    ----------
    rule : BranchingRule
        Simple variable splits or seeded random general splits.
    selection : {'best-bound', 'depth-first'}
        Best-bound breaks ties by lowest node id; depth-first explores the
        lower child first.
    node_cap : int
        Maximum number of tree nodes.  When branching would exceed it the
        search stops and the tree is returned with ``complete=False``.
    warm_start : bool
        Seed the incumbent with the dynamic-programming optimum.
    dump : text stream, optional
        Receives one JSON record per node as soon as its status is final.
    check_certificates : bool
        Re-verify every node LP certificate; a failure raises ``RuntimeError``.

    Returns
    -------
    (value, Solution, BnbTree)
        ``value`` and ``Solution`` are the incumbent (``None`` if none found).
    """
    if selection not in SELECTIONS:
        raise ValueError(f"unknown node selection {selection!r}")
    if node_cap < 1:
        raise ValueError("node_cap must be at least 1")
    root_lp = build_milp(inst).relaxation()
    tree = BnbTree.with_root(inst.n, rule=rule.kind, selection=selection, seed=rule.seed,
                             warm_start=warm_start)
    tree.meta["certificates_checked"] = 0
    rng = random.Random(rule.seed)
    if warm_start:
        tree.incumbent_value, tree.incumbent = dp_solve(inst)
    if dump is not None:
        write_header(dump, tree)

    def evaluate(node: BnbNode):
        lp = node_relaxation(root_lp, node.constraints)
        sol = lp_solve(lp)
        if check_certificates:
            if not verify_certificate(lp, sol):
                raise RuntimeError(f"certificate check failed at node {node.id}")
            tree.meta["certificates_checked"] += 1
        if sol.status == "optimal":
            node.feasible = True
            node.bound = sol.value
            node.point = sol.point
        elif sol.status == "infeasible":
            node.feasible = False
        else:
            raise RuntimeError("node relaxation is unbounded")

    def finalize(node: BnbNode, status: str):
        node.status = status
        if dump is not None:
            dump.write(node_record(node) + "\n")

    heap: list = []
    stack: list = []

    def push(node: BnbNode):
        if selection == BEST_BOUND:
            heapq.heappush(heap, (node.bound, node.id))
        else:
            stack.append(node.id)

    root = tree.nodes[0]
    evaluate(root)
    if root.feasible:
        push(root)
    else:
        finalize(root, PRUNED_INFEASIBLE)

    while heap or stack:
        node_id = heapq.heappop(heap)[1] if selection == BEST_BOUND else stack.pop()
        node = tree.nodes[node_id]
        if tree.incumbent_value is not None and node.bound >= tree.incumbent_value:
            finalize(node, PRUNED_BOUND)
            continue
        y = node.y
        if _is_integral(y):
            tree.incumbent_value = node.bound
            n = inst.n
            tree.incumbent = Solution(node.point[:n], node.point[n:])
            finalize(node, INTEGRAL)
            continue
        if len(tree.nodes) + 2 > node_cap:
            # put it back so it is reported as open
            push(node)
            break
        if rule.kind == RANDOM_SPLIT:
            try:
                disjunction = choose_disjunction_general(y, rule, rng)
            except NoSplitFound:
                disjunction = choose_disjunction_simple(y, MOST_FRACTIONAL)
                node.fallback = True
        else:
            disjunction = choose_disjunction_simple(y, rule.kind)
        lower_id, upper_id = branch(tree, node_id, disjunction)
        if dump is not None:
            dump.write(node_record(node) + "\n")
        children = [tree.nodes[lower_id], tree.nodes[upper_id]]
        for child in children:
            evaluate(child)
            if not child.feasible:
                finalize(child, PRUNED_INFEASIBLE)
        live = [c for c in children if c.feasible]
        if selection == DEPTH_FIRST:
            live.reverse()
        for child in live:
            push(child)

    tree.complete = not heap and not stack
    if dump is not None:
        if not tree.complete:
            for node in tree.nodes.values():
                if node.status == OPEN:
                    dump.write(node_record(node) + "\n")
        write_summary(dump, tree)
    return tree.incumbent_value, tree.incumbent, tree


# -- dump format ---------------------------------------------------------------

def _bound_text(node: BnbNode):
    if node.feasible is False:
        return "infeasible"
    if node.bound is None:
        return None
    return str(format_rational(node.bound))


def node_record(node: BnbNode) -> str:
    rec = {
        "type": "node",
        "id": node.id,
        "parent": node.parent,
        "constraints": [c.to_record() for c in node.constraints],
        "status": node.status,
        "bound": _bound_text(node),
    }
    if node.fallback:
        rec["fallback"] = True
    return json.dumps(rec)


def write_header(stream, tree: BnbTree):
    rec = {"type": "header", "n": tree.n}
    rec.update({k: v for k, v in tree.meta.items() if k in ("rule", "selection", "seed")})
    stream.write(json.dumps(rec) + "\n")


def write_summary(stream, tree: BnbTree):
    stats = tree_stats(tree)
    rec = {
        "type": "summary",
        "complete": tree.complete,
        "incumbent": None if tree.incumbent_value is None else str(format_rational(tree.incumbent_value)),
        "nodes": stats["nodes"],
        "leaves": stats["leaves"],
        "depth": stats["depth"],
    }
    stream.write(json.dumps(rec) + "\n")


def write_tree(tree: BnbTree, stream):
    """Dump a finished tree in node-id order."""
    write_header(stream, tree)
    for node_id in sorted(tree.nodes):
        stream.write(node_record(tree.nodes[node_id]) + "\n")
    write_summary(stream, tree)


class TreeFormatError(ValueError):
    pass


def read_tree(lines) -> BnbTree:
    """Rebuild a tree from dump lines.

    A dump without its closing summary record (e.g. a truncated file) yields a
    tree with ``complete=False``.  Node LP points are not part of the format.
    """
    tree = None
    summary = None
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if not line:
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            if tree is not None:
                # a partially written last line reads as truncation
                break
            raise TreeFormatError(f"line {lineno}: {exc}") from None
        kind = rec.get("type")
        if kind == "header":
            tree = BnbTree(int(rec["n"]), meta={k: v for k, v in rec.items() if k not in ("type", "n")})
        elif kind == "node":
            if tree is None:
                raise TreeFormatError("node record before header")
            constraints = tuple(BranchingConstraint.from_record(c) for c in rec["constraints"])
            bound = rec.get("bound")
            node = BnbNode(int(rec["id"]), rec.get("parent"), constraints, depth=len(constraints),
                           status=rec["status"], fallback=bool(rec.get("fallback", False)))
            if node.status not in STATUSES:
                raise TreeFormatError(f"line {lineno}: unknown status {node.status!r}")
            if bound == "infeasible":
                node.feasible = False
            elif bound is not None:
                node.feasible = True
                node.bound = Fraction(bound)
            tree.nodes[node.id] = node
        elif kind == "summary":
            summary = rec
        else:
            raise TreeFormatError(f"line {lineno}: unknown record type {kind!r}")
    if tree is None:
        raise TreeFormatError("missing header record")
    for node in tree.nodes.values():
        if node.parent is not None and node.parent in tree.nodes:
            parent = tree.nodes[node.parent]
            parent.children = tuple(sorted(parent.children + (node.id,)))
    roots = [node.id for node in tree.nodes.values() if node.parent is None]
    if len(roots) == 1:
        tree.root = roots[0]
    if summary is not None:
        tree.complete = bool(summary.get("complete"))
        inc = summary.get("incumbent")
        tree.incumbent_value = None if inc is None else Fraction(inc)
    return tree
