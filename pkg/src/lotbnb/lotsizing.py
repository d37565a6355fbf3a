"""Uncapacitated lot-sizing: instances, the MILP model and exact solvers."""
from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .lp import EQ, GE, LE, LinearProgram, Row, ZERO, as_fraction

BRUTE_FORCE_CAP = 16


@dataclass(frozen=True)
class Instance:
    """Lot-sizing data: per-period unit cost ``p``, fixed cost ``f`` and demand ``d``."""

    n: int
    p: tuple
    f: tuple
    d: tuple

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError("n must be a positive integer")
        for name in ("p", "f", "d"):
            vec = tuple(as_fraction(v) for v in getattr(self, name))
            if len(vec) != self.n:
                raise ValueError(f"{name} must have length {self.n}, got {len(vec)}")
            object.__setattr__(self, name, vec)
        if any(v < 0 for v in self.d):
            raise ValueError("demands must be nonnegative")


@dataclass(frozen=True)
class Solution:
    """Production plan ``x`` and (possibly fractional) setup vector ``y``."""

    x: tuple
    y: tuple

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(as_fraction(v) for v in self.x))
        object.__setattr__(self, "y", tuple(as_fraction(v) for v in self.y))
        if len(self.x) != len(self.y):
            raise ValueError("x and y must have the same length")

    @property
    def integral(self) -> bool:
        return all(v in (0, 1) for v in self.y)


@dataclass(frozen=True)
class MilpModel:
    """Lot-sizing MILP over the variable vector ``(x_1..x_n, y_1..y_n)``."""

    objective: tuple
    rows: tuple
    lower: tuple
    upper: tuple
    integer_mask: tuple

    def relaxation(self) -> LinearProgram:
        return LinearProgram(self.objective, self.rows, self.lower, self.upper)

    @property
    def n(self) -> int:
        return len(self.objective) // 2


def hard_instance(n: int) -> Instance:
    """Unit demands and fixed costs, unit production cost falling by one per period."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return Instance(n, p=[n - j + 1 for j in range(1, n + 1)], f=[1] * n, d=[1] * n)


def hard_opt_formula(n: int) -> Fraction:
    if n < 1:
        raise ValueError("n must be at least 1")
    return Fraction(n * (n + 1), 2) + n


def random_instance(n: int, rng: random.Random, max_num: int = 20, max_den: int = 4) -> Instance:
    """Instance with nonnegative rational entries ``a/b``, ``a <= max_num``, ``b <= max_den``."""
    def draw():
        return Fraction(rng.randint(0, max_num), rng.randint(1, max_den))
    return Instance(n, [draw() for _ in range(n)], [draw() for _ in range(n)],
                    [draw() for _ in range(n)])


def cumulative_demand(inst: Instance, i: int, j: int) -> Fraction:
    """Total demand of periods ``i..j`` (1-based, inclusive)."""
    if not 1 <= i <= j <= inst.n:
        raise ValueError(f"need 1 <= i <= j <= {inst.n}, got i={i}, j={j}")
    return sum(inst.d[i - 1:j], ZERO)


def build_milp(inst: Instance) -> MilpModel:
    n = inst.n
    nv = 2 * n
    rows = []

    def row(coeffs, sense, rhs, name):
        rows.append(Row(tuple(coeffs), sense, rhs, name))

    for i in range(1, n):
        row([1] * i + [0] * (nv - i), GE, cumulative_demand(inst, 1, i), f"demand[{i}]")
    row([1] * n + [0] * n, EQ, cumulative_demand(inst, 1, n), "balance")
    for i in range(1, n + 1):
        coeffs = [0] * nv
        coeffs[i - 1] = 1
        coeffs[n + i - 1] = -cumulative_demand(inst, i, n)
        row(coeffs, LE, 0, f"link[{i}]")
    return MilpModel(
        objective=tuple(inst.p) + tuple(inst.f),
        rows=tuple(rows),
        lower=(ZERO,) * nv,
        upper=(None,) * n + (Fraction(1),) * n,
        integer_mask=(False,) * n + (True,) * n,
    )


def _check_lengths(inst: Instance, sol: Solution):
    if len(sol.x) != inst.n or len(sol.y) != inst.n:
        raise ValueError(f"solution vectors must have length {inst.n}")


def evaluate_objective(inst: Instance, sol: Solution) -> Fraction:
    _check_lengths(inst, sol)
    return (sum((p * x for p, x in zip(inst.p, sol.x)), ZERO)
            + sum((f * y for f, y in zip(inst.f, sol.y)), ZERO))


@dataclass(frozen=True)
class Violation:
    row: str
    slack: Fraction

    def __str__(self):
        return f"{self.row} violated (slack {self.slack})"


def check_feasible(inst: Instance, sol: Solution) -> list:
    """Every violated constraint of the LP relaxation, compared exactly.

    An empty list means ``sol`` is feasible for the relaxation; integrality of
    ``y`` is not checked here.
    """
    _check_lengths(inst, sol)
    n = inst.n
    out = []
    cum = ZERO
    for i in range(1, n + 1):
        cum += sol.x[i - 1]
        need = cumulative_demand(inst, 1, i)
        if i < n and cum < need:
            out.append(Violation(f"cumulative demand at i={i}", cum - need))
        if i == n and cum != need:
            out.append(Violation("total balance", -abs(cum - need)))
    for i in range(1, n + 1):
        slack = cumulative_demand(inst, i, n) * sol.y[i - 1] - sol.x[i - 1]
        if slack < 0:
            out.append(Violation(f"setup link at i={i}", slack))
    for i, v in enumerate(sol.x, 1):
        if v < 0:
            out.append(Violation(f"x[{i}] >= 0", v))
    for i, v in enumerate(sol.y, 1):
        if v < 0:
            out.append(Violation(f"y[{i}] >= 0", v))
        if v > 1:
            out.append(Violation(f"y[{i}] <= 1", 1 - v))
    return out


def _plan_from_setups(inst: Instance, segments) -> Solution:
    x = [ZERO] * inst.n
    y = [ZERO] * inst.n
    for i, j in segments:
        x[i - 1] = cumulative_demand(inst, i, j)
        y[i - 1] = Fraction(1)
    return Solution(x, y)


def dp_solve(inst: Instance):
    """Exact optimum by the O(n^2) single-sourcing recursion.

    ``C[j] = min(C[j-1] if d_j == 0, min_i C[i-1] + f_i + p_i * d(i..j))``:
    either period ``j`` needs nothing, or the last setup ``i`` serves all of
    ``i..j``.  Ties go to fewer setups, then to the earlier setup period.
    Requires nonnegative fixed costs.

    Returns
    -------
    (value, Solution)
        The optimal cost and an integral plan attaining it.
    """
    if any(f < 0 for f in inst.f):
        raise ValueError("dp_solve assumes nonnegative fixed costs")
    n = inst.n
    prefix = [ZERO]
    for dk in inst.d:
        prefix.append(prefix[-1] + dk)
    best: list = [(ZERO, 0)] + [None] * n
    choice: list = [None] * (n + 1)
    for j in range(1, n + 1):
        if inst.d[j - 1] == 0:
            best[j] = best[j - 1]
            choice[j] = None
        for i in range(1, j + 1):
            cost, setups = best[i - 1]
            cand = (cost + inst.f[i - 1] + inst.p[i - 1] * (prefix[j] - prefix[i - 1]), setups + 1)
            if best[j] is None or cand < best[j]:
                best[j] = cand
                choice[j] = i
    segments = []
    j = n
    while j > 0:
        i = choice[j]
        if i is None:
            j -= 1
            continue
        segments.append((i, j))
        j = i - 1
    return best[n][0], _plan_from_setups(inst, segments)


def brute_force_solve(inst: Instance, cap: int = BRUTE_FORCE_CAP):
    """Enumerate every setup vector and serve each demand from its cheapest open period."""
    n = inst.n
    if n > cap:
        raise ValueError(f"brute force limited to n <= {cap}, got n={n}")
    best_value: Optional[Fraction] = None
    best_plan = None
    for bits in itertools.product((0, 1), repeat=n):
        x = [ZERO] * n
        value = sum((f for f, b in zip(inst.f, bits) if b), ZERO)
        ok = True
        cheapest = None
        for j in range(n):
            if bits[j] and (cheapest is None or inst.p[j] < inst.p[cheapest]):
                cheapest = j
            dj = inst.d[j]
            if not dj:
                continue
            if cheapest is None:
                ok = False
                break
            x[cheapest] += dj
            value += inst.p[cheapest] * dj
        if ok and (best_value is None or value < best_value):
            best_value = value
            best_plan = Solution(x, bits)
    return best_value, best_plan


# -- text format -------------------------------------------------------------

def format_rational(v: Fraction):
    v = Fraction(v)
    return v.numerator if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def parse_rational(v) -> Fraction:
    if isinstance(v, bool) or isinstance(v, float):
        raise ValueError(f"not an exact rational: {v!r}")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v.strip())
    raise ValueError(f"not an exact rational: {v!r}")


def instance_to_text(inst: Instance) -> str:
    record = {"n": inst.n}
    for name in ("p", "f", "d"):
        record[name] = [format_rational(v) for v in getattr(inst, name)]
    return json.dumps(record) + "\n"


def instance_from_text(text: str) -> Instance:
    record = json.loads(text)
    n = record["n"]
    if not isinstance(n, int) or isinstance(n, bool):
        raise ValueError("field n must be an integer")
    return Instance(n, *(
        [parse_rational(v) for v in record[name]] for name in ("p", "f", "d")))


def write_instance(inst: Instance, path) -> None:
    with open(path, "w") as fh:
        fh.write(instance_to_text(inst))


def read_instance(path) -> Instance:
    with open(path) as fh:
        return instance_from_text(fh.read())


def solution_rows(sol: Solution, names: Sequence[str] = ("x", "y")) -> list:
    return [f"{name} = ({', '.join(str(v) for v in vec)})"
            for name, vec in zip(names, (sol.x, sol.y))]
