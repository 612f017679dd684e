"""Bounded-variable primal simplex in exact rational arithmetic.

Every constraint row gets a slack whose bounds encode the relation
(``<=`` rows: ``[0, inf)``, ``=`` rows: ``[0, 0]``; ``>=`` rows are negated
first). Phase 1 starts from an all-artificial basis with every other
variable at its lower bound; phase 2 pins the artificials to zero.

Pricing is Dantzig's rule (largest reduced-cost magnitude, lowest index on
ties). After a run of degenerate pivots the solve switches to Bland's rule
for good, which cannot cycle in exact arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from ..milp import GE, LE, MilpProblem

OPTIMAL, INFEASIBLE, UNBOUNDED = "optimal", "infeasible", "unbounded"

_DEGENERATE_RUN = 20


@dataclass
class LpResult:
    status: str
    assignment: Optional[list] = None
    objective: Optional[Fraction] = None
    iterations: int = 0


class _Tableau:
    def __init__(self, rows, rhs, lower, upper, basis):
        self.T = rows          # m x N, B^-1 A
        self.lower = lower
        self.upper = upper     # None = +inf
        self.basis = basis
        self.x = list(lower)   # current values of every column
        for k, b in enumerate(basis):
            self.x[b] = rhs[k]
        self.is_basic = [False] * len(lower)
        for b in basis:
            self.is_basic[b] = True
        self.iterations = 0
        self.bland = False

    def reduced_costs(self, cost):
        d = list(cost)
        for k, b in enumerate(self.basis):
            cb = cost[b]
            if cb:
                row = self.T[k]
                for j, a in enumerate(row):
                    if a:
                        d[j] -= cb * a
        return d

    def run(self, cost, limit=100_000):
        d = self.reduced_costs(cost)
        degenerate = 0
        while True:
            j, direction = self._entering(d)
            if j is None:
                return OPTIMAL
            step, row, to_upper = self._ratio(j, direction)
            if step is None:
                return UNBOUNDED
            self.iterations += 1
            if self.iterations > limit:
                raise RuntimeError("simplex iteration limit exceeded")
            degenerate = degenerate + 1 if step == 0 else 0
            if degenerate > _DEGENERATE_RUN:
                self.bland = True
            delta = step * direction
            if delta:
                self.x[j] += delta
                for k, b in enumerate(self.basis):
                    a = self.T[k][j]
                    if a:
                        self.x[b] -= delta * a
            if row is None:
                continue  # bound flip
            leaving = self.basis[row]
            self.x[leaving] = self.upper[leaving] if to_upper else self.lower[leaving]
            self._pivot(row, j, d)

    def _entering(self, d):
        best, best_dir, best_mag = None, 0, 0
        for j, dj in enumerate(d):
            if not dj or self.is_basic[j]:
                continue
            lo, hi = self.lower[j], self.upper[j]
            if hi is not None and lo == hi:
                continue
            if dj < 0 and (hi is None or self.x[j] < hi):
                direction = 1
            elif dj > 0 and self.x[j] > lo:
                direction = -1
            else:
                continue
            if self.bland:
                return j, direction
            mag = abs(dj)
            if mag > best_mag:
                best, best_dir, best_mag = j, direction, mag
        return best, best_dir

    def _ratio(self, j, direction):
        lo, hi = self.lower[j], self.upper[j]
        step = None if hi is None else hi - lo
        row, to_upper, leave_id = None, False, None
        for k, b in enumerate(self.basis):
            a = self.T[k][j] * direction
            if a > 0:
                limit, up = (self.x[b] - self.lower[b]) / a, False
            elif a < 0 and self.upper[b] is not None:
                limit, up = (self.upper[b] - self.x[b]) / -a, True
            else:
                continue
            if step is None or limit < step or (limit == step and row is not None and b < leave_id):
                step, row, to_upper, leave_id = limit, k, up, b
        return step, row, to_upper

    def _pivot(self, r, j, d):
        T = self.T
        prow = T[r]
        piv = prow[j]
        if piv != 1:
            inv = 1 / Fraction(piv)
            for c, a in enumerate(prow):
                if a:
                    prow[c] = a * inv
        nz = [c for c, a in enumerate(prow) if a]
        for k, row in enumerate(T):
            if k == r:
                continue
            f = row[j]
            if f:
                for c in nz:
                    row[c] -= f * prow[c]
        f = d[j]
        if f:
            for c in nz:
                d[c] -= f * prow[c]
        self.is_basic[self.basis[r]] = False
        self.is_basic[j] = True
        self.basis[r] = j


def solve_lp(problem: MilpProblem, lower: Sequence = None, upper: Sequence = None) -> LpResult:
    """Solve the continuous relaxation of ``problem``.

    ``lower``/``upper`` optionally override the variable bounds (branch-and-bound
    nodes use this). Lower bounds must be finite.
    """
    nv = len(problem.variables)
    lo = [Fraction(v.lower) for v in problem.variables] if lower is None else [Fraction(v) for v in lower]
    hi = ([None if v.upper is None else Fraction(v.upper) for v in problem.variables]
          if upper is None else [None if v is None else Fraction(v) for v in upper])
    for a, b in zip(lo, hi):
        if b is not None and a > b:
            return LpResult(INFEASIBLE)

    m = len(problem.constraints)
    ncol = nv + 2 * m
    rows, rhs = [], []
    lower_all = lo + [Fraction(0)] * (2 * m)
    upper_all = hi + [None] * m + [None] * m
    for k, con in enumerate(problem.constraints):
        sign = -1 if con.relation == GE else 1
        row = [Fraction(0)] * ncol
        for vid, c in con.expr.terms:
            row[vid] = Fraction(sign * c)
        row[nv + k] = Fraction(1)
        if con.relation not in (LE, GE):
            upper_all[nv + k] = Fraction(0)
        b = Fraction(-sign * con.expr.constant)
        resid = b - sum((row[v] * lo[v] for v, _ in con.expr.terms), Fraction(0))
        art = 1 if resid >= 0 else -1
        row[nv + m + k] = Fraction(art)
        if art < 0:
            row = [-a for a in row]
        rows.append(row)
        rhs.append(abs(resid))
    # with structurals and slacks at their lower bounds, row k reads art_k = |resid_k|
    tab = _Tableau(rows, rhs, lower_all, upper_all, [nv + m + k for k in range(m)])

    phase1 = [0] * (nv + m) + [1] * m
    tab.run(phase1)
    if any(tab.x[nv + m + k] for k in range(m)):
        return LpResult(INFEASIBLE, iterations=tab.iterations)
    for k in range(m):
        tab.upper[nv + m + k] = Fraction(0)

    cost = [Fraction(0)] * ncol
    for vid, c in problem.objective.terms:
        cost[vid] = Fraction(c)
    status = tab.run(cost)
    if status != OPTIMAL:
        return LpResult(status, iterations=tab.iterations)
    x = tab.x[:nv]
    return LpResult(OPTIMAL, x, problem.objective.value(x), tab.iterations)
