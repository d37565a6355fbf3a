"""Exact rational linear programming.

A bounded-variable primal simplex in exact rationals (``gmpy2.mpq`` inside
the tableau, :class:`fractions.Fraction` at the interface) with
Bland's rule, plus an independent checker for the certificates it emits.
Every variable needs a finite lower bound; upper bounds may be ``None``
(meaning +infinity).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

try:
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover
    _Q = Fraction

LE, EQ, GE = "<=", "==", ">="
SENSES = (LE, EQ, GE)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

ZERO = Fraction(0)


def _out(v) -> Fraction:
    return Fraction(int(v.numerator), int(v.denominator))


def as_fraction(value) -> Fraction:
    if type(value) is Fraction:
        return value
    if isinstance(value, float):
        raise TypeError("floats are not exact; pass int, Fraction or 'a/b'")
    return Fraction(value)


@dataclass(frozen=True)
class Row:
    """One linear constraint ``coeffs . x  <sense>  rhs``."""

    coeffs: tuple
    sense: str
    rhs: Fraction
    name: str = ""
    terms: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.sense not in SENSES:
            raise ValueError(f"unknown sense {self.sense!r}")
        coeffs = tuple(as_fraction(a) for a in self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "rhs", as_fraction(self.rhs))
        object.__setattr__(self, "terms", tuple((j, a) for j, a in enumerate(coeffs) if a))

    def activity(self, x: Sequence[Fraction]) -> Fraction:
        total = ZERO
        for j, a in self.terms:
            v = x[j]
            if v:
                total += a * v
        return total

    def slack(self, x: Sequence[Fraction]) -> Fraction:
        """Signed slack; negative means violated (for ``==`` any nonzero is)."""
        act = self.activity(x)
        if self.sense == LE:
            return self.rhs - act
        if self.sense == GE:
            return act - self.rhs
        return -abs(act - self.rhs)

    def satisfied(self, x: Sequence[Fraction]) -> bool:
        return self.slack(x) >= 0


@dataclass(frozen=True)
class LinearProgram:
    """``min objective . x`` subject to ``rows`` and ``lower <= x <= upper``."""

    objective: tuple
    rows: tuple = ()
    lower: Optional[tuple] = None
    upper: Optional[tuple] = None

    def __post_init__(self):
        c = tuple(as_fraction(v) for v in self.objective)
        nv = len(c)
        lower = (ZERO,) * nv if self.lower is None else tuple(as_fraction(v) for v in self.lower)
        upper = (None,) * nv if self.upper is None else tuple(
            None if v is None else as_fraction(v) for v in self.upper)
        rows = tuple(self.rows)
        if len(lower) != nv or len(upper) != nv:
            raise ValueError("bounds must have one entry per variable")
        for i, row in enumerate(rows):
            if len(row.coeffs) != nv:
                raise ValueError(f"row {i} has {len(row.coeffs)} coefficients, expected {nv}")
        for j, (lo, hi) in enumerate(zip(lower, upper)):
            if hi is not None and lo > hi:
                raise ValueError(f"variable {j}: lower bound exceeds upper bound")
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def num_vars(self) -> int:
        return len(self.objective)

    def value(self, x: Sequence[Fraction]) -> Fraction:
        return sum((c * v for c, v in zip(self.objective, x) if c), ZERO)

    def is_feasible(self, x: Sequence[Fraction]) -> bool:
        if len(x) != self.num_vars:
            return False
        for v, lo, hi in zip(x, self.lower, self.upper):
            if v < lo or (hi is not None and v > hi):
                return False
        return all(row.satisfied(x) for row in self.rows)


@dataclass(frozen=True)
class LpSolution:
    """Result of :func:`lp_solve`.

    ``certificate`` depends on ``status``: row multipliers proving optimality,
    Farkas multipliers proving infeasibility, or a recession ray along which
    the objective decreases without bound (``point`` is then a feasible start).
    """

    status: str
    point: Optional[tuple] = None
    value: Optional[Fraction] = None
    certificate: tuple = ()
    pivots: int = field(default=0, compare=False)

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


def with_extra_rows(lp: LinearProgram, rows: Iterable[Row]) -> LinearProgram:
    rows = tuple(rows)
    for row in rows:
        if len(row.coeffs) != lp.num_vars:
            raise ValueError("extra row has the wrong dimension")
    if not rows:
        return lp
    return LinearProgram(lp.objective, lp.rows + rows, lp.lower, lp.upper)


class _Tableau:
    """Sparse simplex tableau ``B^-1 [A | S | D]`` with explicit variable values.

    Column layout: structural variables, then one slack per inequality row,
    then one artificial per row that needed one.  The slack/artificial chosen
    for the initial basis of row ``i`` is ``home[i]`` with sign ``home_sign[i]``,
    which lets row multipliers be read straight off the reduced costs.
    """

    def __init__(self, lp: LinearProgram):
        nv = lp.num_vars
        m = len(lp.rows)
        self.nv = nv
        self.m = m
        lo = [_Q(v) for v in lp.lower]
        hi = [None if v is None else _Q(v) for v in lp.upper]
        cols: list[dict] = [dict() for _ in range(m)]
        for i, row in enumerate(lp.rows):
            for j, a in row.terms:
                cols[i][j] = _Q(a)

        # nonbasic structurals start at their lower bound
        residual = [_Q(row.rhs - row.activity(lp.lower)) for row in lp.rows]

        ncol = nv
        self.slack_of: dict[int, int] = {}
        for i, row in enumerate(lp.rows):
            if row.sense != EQ:
                sign = 1 if row.sense == LE else -1
                cols[i][ncol] = _Q(sign)
                self.slack_of[i] = ncol
                lo.append(_Q(0))
                hi.append(None)
                ncol += 1
        self.num_real = ncol  # structurals + slacks

        self.home: list[int] = [0] * m
        self.home_sign: list[int] = [0] * m
        self.artificials: list[int] = []
        for i, row in enumerate(lp.rows):
            r = residual[i]
            s = self.slack_of.get(i)
            if s is not None and cols[i][s] * r >= 0:
                self.home[i] = s
                self.home_sign[i] = int(cols[i][s])
                continue
            sign = 1 if r >= 0 else -1
            cols[i][ncol] = _Q(sign)
            self.home[i] = ncol
            self.home_sign[i] = sign
            self.artificials.append(ncol)
            lo.append(_Q(0))
            hi.append(None)
            ncol += 1

        self.ncol = ncol
        self.lo = lo
        self.hi = hi
        self.val = [lo[j] for j in range(ncol)]
        self.basis = list(self.home)
        self.is_basic = [False] * ncol
        self.at_upper = [False] * ncol
        self.rows: list[dict] = []
        for i in range(m):
            b = self.home[i]
            self.is_basic[b] = True
            self.val[b] = residual[i] * self.home_sign[i]
            piv = cols[i][b]
            self.rows.append({j: a / piv for j, a in cols[i].items()})
        self.cost: list = [_Q(0)] * ncol
        self.dj: dict = {}
        self.pivots = 0

    def set_costs(self, cost: Sequence):
        cost = [_Q(c) for c in cost]
        self.cost = cost
        dj = {j: c for j, c in enumerate(cost) if c}
        for i, b in enumerate(self.basis):
            cb = cost[b]
            if not cb:
                continue
            for j, a in self.rows[i].items():
                dj[j] = dj.get(j, 0) - cb * a
        self.dj = {j: v for j, v in dj.items() if v}

    def objective(self):
        return sum((c * v for c, v in zip(self.cost, self.val) if c and v), _Q(0))

    def _entering(self):
        for j in sorted(self.dj):
            if self.is_basic[j]:
                continue
            d = self.dj[j]
            hi = self.hi[j]
            if hi is not None and hi == self.lo[j]:
                continue
            if d < 0 and not self.at_upper[j]:
                return j, 1
            if d > 0 and self.at_upper[j]:
                return j, -1
        return None, 0

    def run(self):
        """Iterate to optimality; returns ``None`` or ``(q, direction)`` of an unbounded ray."""
        while True:
            q, direction = self._entering()
            if q is None:
                return None
            best = None  # (step, var index, row or -1)
            hq = self.hi[q]
            if hq is not None:
                best = (hq - self.lo[q], q, -1)
            for i, row in enumerate(self.rows):
                a = row.get(q)
                if not a:
                    continue
                alpha = a * direction
                b = self.basis[i]
                if alpha > 0:
                    step = (self.val[b] - self.lo[b]) / alpha
                else:
                    hb = self.hi[b]
                    if hb is None:
                        continue
                    step = (hb - self.val[b]) / -alpha
                cand = (step, b, i)
                if best is None or cand[:2] < best[:2]:
                    best = cand
            if best is None:
                return q, direction
            step, leaving, r = best
            if step:
                self.val[q] += direction * step
                for i, row in enumerate(self.rows):
                    a = row.get(q)
                    if a:
                        self.val[self.basis[i]] -= a * direction * step
            if r < 0:
                self.at_upper[q] = not self.at_upper[q]
                continue
            alpha = self.rows[r][q] * direction
            self.at_upper[leaving] = alpha < 0
            self.val[leaving] = self.hi[leaving] if alpha < 0 else self.lo[leaving]
            self._pivot(r, q)

    def _pivot(self, r: int, q: int):
        self.pivots += 1
        prow = self.rows[r]
        piv = prow[q]
        if piv != 1:
            prow = {j: a / piv for j, a in prow.items()}
            self.rows[r] = prow
        for i, row in enumerate(self.rows):
            if i == r:
                continue
            factor = row.get(q)
            if not factor:
                continue
            for j, a in prow.items():
                v = row.get(j, 0) - factor * a
                if v:
                    row[j] = v
                else:
                    row.pop(j, None)
        factor = self.dj.get(q)
        if factor:
            dj = self.dj
            for j, a in prow.items():
                v = dj.get(j, 0) - factor * a
                if v:
                    dj[j] = v
                else:
                    dj.pop(j, None)
        leaving = self.basis[r]
        self.is_basic[leaving] = False
        self.is_basic[q] = True
        self.at_upper[q] = False
        self.basis[r] = q

    def row_multipliers(self) -> tuple:
        # reduced cost of the home column of row i is cost - sign * y_i
        return tuple(
            _out((self.cost[self.home[i]] - self.dj.get(self.home[i], 0)) * self.home_sign[i])
            for i in range(self.m))


def lp_solve(lp: LinearProgram) -> LpSolution:
    """Solve ``lp`` exactly.

    Two-phase bounded-variable primal simplex; the entering and leaving
    variables follow Bland's lowest-index rule so the method terminates on
    degenerate problems.  Deterministic for a fixed row order.
    """
    for j, lo in enumerate(lp.lower):
        if lo is None:
            raise ValueError(f"variable {j} needs a finite lower bound")
    tab = _Tableau(lp)

    if tab.artificials:
        phase1 = [ZERO] * tab.ncol
        for a in tab.artificials:
            phase1[a] = Fraction(1)
        tab.set_costs(phase1)
        tab.run()
        if tab.objective() > 0:
            return LpSolution(INFEASIBLE, certificate=tab.row_multipliers(), pivots=tab.pivots)
        for a in tab.artificials:
            tab.hi[a] = _Q(0)

    tab.set_costs(list(lp.objective) + [ZERO] * (tab.ncol - lp.num_vars))
    ray = tab.run()
    point = tuple(_out(v) for v in tab.val[:lp.num_vars])
    if ray is not None:
        q, direction = ray
        r = [ZERO] * tab.ncol
        r[q] = Fraction(direction)
        for i, row in enumerate(tab.rows):
            a = row.get(q)
            if a:
                r[tab.basis[i]] = _out(-a * direction)
        return LpSolution(UNBOUNDED, point=point, certificate=tuple(r[:lp.num_vars]),
                          pivots=tab.pivots)
    return LpSolution(OPTIMAL, point=point, value=lp.value(point),
                      certificate=tab.row_multipliers(), pivots=tab.pivots)


def _multiplier_signs_ok(lp: LinearProgram, y: Sequence[Fraction]) -> bool:
    for row, yi in zip(lp.rows, y):
        if row.sense == GE and yi < 0:
            return False
        if row.sense == LE and yi > 0:
            return False
    return True


def _transpose_product(lp: LinearProgram, y: Sequence[Fraction]) -> list:
    g = [ZERO] * lp.num_vars
    for row, yi in zip(lp.rows, y):
        if yi:
            for j, a in row.terms:
                g[j] += a * yi
    return g


def verify_certificate(lp: LinearProgram, sol: LpSolution) -> bool:
    """Re-check ``sol`` against ``lp`` from scratch, using only the LP data.

    Optimal: the point is feasible, the multipliers are dual feasible and the
    dual bound they imply equals the primal value.  Infeasible: the Farkas
    multipliers produce a valid inequality that no point of the box meets.
    Unbounded: the point is feasible and the ray is an improving recession
    direction.
    """
    try:
        return _verify(lp, sol)
    except (TypeError, ValueError, IndexError):
        return False


def _verify(lp: LinearProgram, sol: LpSolution) -> bool:
    y = sol.certificate
    if sol.status == OPTIMAL:
        x = sol.point
        if x is None or not lp.is_feasible(x) or lp.value(x) != sol.value:
            return False
        if len(y) != len(lp.rows) or not _multiplier_signs_ok(lp, y):
            return False
        g = _transpose_product(lp, y)
        bound = sum((row.rhs * yi for row, yi in zip(lp.rows, y)), ZERO)
        for j, cj in enumerate(lp.objective):
            red = cj - g[j]
            if red > 0:
                bound += red * lp.lower[j]
            elif red < 0:
                if lp.upper[j] is None:
                    return False
                bound += red * lp.upper[j]
        return bound == sol.value

    if sol.status == INFEASIBLE:
        if sol.point is not None or len(y) != len(lp.rows) or not _multiplier_signs_ok(lp, y):
            return False
        g = _transpose_product(lp, y)
        top = ZERO
        for j, gj in enumerate(g):
            if gj > 0:
                if lp.upper[j] is None:
                    return False
                top += gj * lp.upper[j]
            elif gj < 0:
                top += gj * lp.lower[j]
        rhs = sum((row.rhs * yi for row, yi in zip(lp.rows, y)), ZERO)
        return top < rhs

    if sol.status == UNBOUNDED:
        x, r = sol.point, y
        if x is None or not lp.is_feasible(x) or len(r) != lp.num_vars:
            return False
        for j, rj in enumerate(r):
            if rj < 0 and lp.lower[j] is not None:
                return False
            if rj > 0 and lp.upper[j] is not None:
                return False
        for row in lp.rows:
            act = row.activity(r)
            if (row.sense == LE and act > 0) or (row.sense == GE and act < 0) or \
                    (row.sense == EQ and act != 0):
                return False
        return lp.value(r) < 0
    return False
