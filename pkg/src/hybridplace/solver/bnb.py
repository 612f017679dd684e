"""Best-first branch and bound over exact LP relaxations."""
from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from ..milp import MilpProblem, check_feasible, evaluate
from .lp import INFEASIBLE, OPTIMAL, solve_lp


class InfeasibleModel(Exception):
    pass


class SolverLimit(Exception):
    """A node or time limit was hit before any integral solution was found."""


@dataclass(frozen=True)
class SolverConfig:
    node_limit: int = 200_000
    time_limit: Optional[float] = None  # seconds
    branching: str = "most_fractional"
    abs_gap: int = 0

    def __post_init__(self):
        if self.node_limit < 0 or (self.time_limit is not None and self.time_limit < 0):
            raise ValueError("solver limits must be >= 0")
        if self.abs_gap < 0:
            raise ValueError("abs_gap must be >= 0")
        if self.branching != "most_fractional":
            raise ValueError(f"unsupported branching rule {self.branching!r}")


@dataclass
class SolveStats:
    nodes: int = 0
    lp_iterations: int = 0
    wall_time: float = 0.0
    best_bound: Optional[Fraction] = None
    incumbent: Optional[Fraction] = None
    proven_optimal: bool = False


def _integral_objective(problem: MilpProblem) -> bool:
    """True when every integral point has an integer objective value."""
    obj = problem.objective
    if Fraction(obj.constant).denominator != 1:
        return False
    return all(Fraction(c).denominator == 1 and problem.variables[v].integral for v, c in obj.terms)


def _branch_variable(problem, x):
    """Most fractional integral variable, lowest id on ties; None if ``x`` is integral."""
    best, best_score = None, Fraction(0)
    for v in problem.variables:
        if not v.integral:
            continue
        frac = x[v.id] - math.floor(x[v.id])
        score = min(frac, 1 - frac)
        if score > best_score:
            best, best_score = v.id, score
    return best


def solve_milp(problem: MilpProblem, config: SolverConfig = SolverConfig(),
               incumbent: Optional[Sequence] = None):
    """Minimize ``problem`` exactly. Returns ``(assignment, SolveStats)``.

    ``incumbent`` is an optional known feasible assignment used as the
    starting upper bound. Raises :class:`InfeasibleModel` when no integral
    point exists and :class:`SolverLimit` when a limit stops the search with
    nothing found.
    """
    start = time.perf_counter()
    stats = SolveStats()
    best_x, best_obj = None, None
    if incumbent is not None:
        bad = check_feasible(problem, incumbent)
        if bad:
            raise ValueError(f"warm-start incumbent violates {bad[:3]}")
        best_x, best_obj = list(incumbent), Fraction(evaluate(problem, incumbent))

    integral_obj = _integral_objective(problem)

    def dominated(bound):
        if best_obj is None:
            return False
        if integral_obj:
            bound = math.ceil(bound)
        return bound >= best_obj - config.abs_gap

    lower0 = [Fraction(v.lower) for v in problem.variables]
    upper0 = [None if v.upper is None else Fraction(v.upper) for v in problem.variables]
    heap = []
    seq = 0

    def node(lower, upper):
        nonlocal seq
        stats.nodes += 1
        res = solve_lp(problem, lower, upper)
        stats.lp_iterations += res.iterations
        if res.status == OPTIMAL:
            heapq.heappush(heap, (res.objective, seq, lower, upper, res.assignment))
            seq += 1
        elif res.status != INFEASIBLE:
            raise RuntimeError(f"LP relaxation {res.status}; variable bounds must be finite")

    node(lower0, upper0)
    hit_limit = False
    while heap:
        bound, _, lower, upper, x = heap[0]
        if dominated(bound):
            heap.clear()
            break
        if stats.nodes >= config.node_limit or (
                config.time_limit is not None and time.perf_counter() - start > config.time_limit):
            hit_limit = True
            break
        heapq.heappop(heap)
        vid = _branch_variable(problem, x)
        if vid is None:
            if best_obj is None or bound < best_obj:
                best_x, best_obj = [int(v) if problem.variables[k].integral else v
                                    for k, v in enumerate(x)], bound
            continue
        f = math.floor(x[vid])
        down = list(upper)
        down[vid] = Fraction(f)
        node(lower, down)
        up = list(lower)
        up[vid] = Fraction(f + 1)
        node(up, upper)

    stats.wall_time = time.perf_counter() - start
    stats.incumbent = best_obj
    if hit_limit:
        open_bound = heap[0][0] if heap else best_obj
        stats.best_bound = open_bound if best_obj is None else min(open_bound, best_obj)
        if best_x is None:
            raise SolverLimit(f"no integral solution within limits ({stats.nodes} nodes)")
        return best_x, stats
    if best_x is None:
        raise InfeasibleModel(f"{problem.name}: no integral feasible point")
    stats.best_bound = best_obj
    stats.proven_optimal = True
    return best_x, stats
