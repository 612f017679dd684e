"""Exhaustive enumeration oracle for tiny integer programs.

Variables that sit in equality rows are enumerated value by value, in an
order that closes each equality as early as possible. Two cuts keep the
tree small without ever discarding an optimum:

* interval propagation removes values that cannot satisfy some row given the
  bounds of the other variables in it;
* a subtree is skipped when the objective evaluated at the most favourable
  end of every variable's current interval already reaches the best value
  found.

Once the enumerated prefix is fixed, the remaining variables are pairwise
decoupled (no row mentions two of them), so propagation leaves each one its
exact feasible interval and the optimum sits at an end of it.

No LP is solved anywhere here; the oracle shares nothing with the simplex
and branch-and-bound path it is used to check.
"""
from __future__ import annotations

import math

from ..milp import EQ, GE, LE, MilpProblem
from .bnb import InfeasibleModel


class TooLarge(ValueError):
    pass


def _order(problem: MilpProblem):
    n = len(problem.variables)
    # single-variable equalities are bound fixes; propagation pins them without enumeration
    eq_rows = [set(v for v, _ in c.expr.terms) for c in problem.constraints
               if c.relation == EQ and len(c.expr.terms) > 1]
    order, seen = [], set()
    while True:
        open_rows = [r - seen for r in eq_rows if r - seen]
        if not open_rows:
            break
        row = min(open_rows, key=lambda r: (len(r), min(r)))
        for v in sorted(row):
            order.append(v)
            seen.add(v)
    order += [v for v in range(n) if v not in seen]

    rows = [set(v for v, _ in c.expr.terms) for c in problem.constraints]
    for k in range(len(order) + 1):
        rest = set(order[k:])
        if all(len(r & rest) <= 1 for r in rows):
            return order[:k], order[k:]
    raise AssertionError("unreachable")


def _rows(problem: MilpProblem):
    """Constraints as ``(terms, constant)`` meaning ``sum(a x) + constant <= 0``."""
    rows = []
    for c in problem.constraints:
        terms = list(c.expr.terms)
        k = c.expr.constant
        if c.relation in (LE, EQ):
            rows.append((terms, k))
        if c.relation in (GE, EQ):
            rows.append(([(v, -a) for v, a in terms], -k))
    return rows


def _propagate(rows, lo, hi, passes=3):
    """Tighten ``lo``/``hi`` in place; False when some interval empties.

    Capped at a few sweeps: bounds that creep by one per sweep (two rows
    feeding each other) are left for enumeration instead.
    """
    for _ in range(passes):
        changed = False
        for terms, k in rows:
            least = k
            for v, a in terms:
                least += a * (lo[v] if a > 0 else hi[v])
            if least > 0:
                return False
            for v, a in terms:
                if a > 0:
                    new = (a * lo[v] - least) // a  # a * x_v <= a * lo_v - least
                    if new < hi[v]:
                        hi[v] = new  # never below lo[v] since least <= 0
                        changed = True
                else:
                    new = -((least - a * hi[v]) // a)  # ceil((a * hi_v - least) / a)
                    if new > lo[v]:
                        lo[v] = new
                        changed = True
        if not changed:
            break
    return True


def brute_force(problem: MilpProblem, max_enumerated: int = 12, max_domain: int = 60):
    """Return ``(assignment, objective)`` of an exact optimum.

    Raises :class:`TooLarge` when more than ``max_enumerated`` variables need
    enumeration or any of them spans more than ``max_domain + 1`` values, and
    :class:`InfeasibleModel` when nothing is feasible.
    """
    for v in problem.variables:
        if not v.integral or v.upper is None:
            raise TooLarge(f"{v.name}: enumeration needs integral, bounded variables")
    prefix, tail = _order(problem)
    if len(prefix) > max_enumerated:
        raise TooLarge(f"{len(prefix)} coupled variables (limit {max_enumerated})")
    for vid in prefix:
        v = problem.variables[vid]
        if v.upper - v.lower > max_domain:
            raise TooLarge(f"{v.name} spans {v.upper - v.lower + 1} values (limit {max_domain + 1})")

    rows = _rows(problem)
    obj = problem.objective.terms
    const = problem.objective.constant
    best = [None, None]

    def optimistic(lo, hi):
        return const + sum(c * (lo[v] if c > 0 else hi[v]) for v, c in obj)

    def dfs(k, lo, hi):
        if not _propagate(rows, lo, hi):
            return
        if best[1] is not None and optimistic(lo, hi) >= best[1]:
            return
        if k == len(prefix):
            x = list(lo)
            for vid in tail:
                if problem.objective.coef(vid) < 0:
                    x[vid] = hi[vid]
            if all(c.holds(x) for c in problem.constraints):
                best[0], best[1] = x, problem.objective.value(x)
            return
        vid = prefix[k]
        values = range(lo[vid], hi[vid] + 1)
        if problem.objective.coef(vid) < 0:
            values = reversed(values)  # good points first tighten the cost cut sooner
        for val in values:
            lo2, hi2 = list(lo), list(hi)
            lo2[vid] = hi2[vid] = val
            dfs(k + 1, lo2, hi2)

    lo0 = [math.ceil(v.lower) for v in problem.variables]
    hi0 = [math.floor(v.upper) for v in problem.variables]
    dfs(0, lo0, hi0)
    if best[0] is None:
        raise InfeasibleModel(f"{problem.name}: no integral feasible point")
    return best[0], best[1]
