"""Exact LP/MILP solving plus heuristics and an enumeration oracle."""
from __future__ import annotations

from dataclasses import dataclass

from ..builder import Placement, VarIndex, build, decode, encode
from ..milp import MilpProblem
from ..netmodel import CostParams, Demand, Topology, VariantFlags
from .bnb import InfeasibleModel, SolveStats, SolverConfig, SolverLimit, solve_milp
from .brute import TooLarge, brute_force
from .greedy import greedy_bound
from .lp import LpResult, solve_lp

__all__ = [
    "InfeasibleModel", "LpResult", "Solution", "SolveStats", "SolverConfig", "SolverLimit",
    "TooLarge", "brute_force", "greedy_bound", "solve_lp", "solve_milp", "solve_placement",
]


@dataclass
class Solution:
    placement: Placement
    stats: SolveStats
    problem: MilpProblem
    index: VarIndex


def solve_placement(topology: Topology, params: CostParams, demand: Demand,
                    flags: VariantFlags = VariantFlags(),
                    config: SolverConfig = SolverConfig()) -> Solution:
    """Build, warm-start from the greedy bound when it applies, solve and decode."""
    problem, index = build(topology, params, demand, flags)
    try:
        warm = encode(index, greedy_bound(topology, params, demand, flags))
    except InfeasibleModel:
        warm = None
    x, stats = solve_milp(problem, config, incumbent=warm)
    return Solution(decode(index, x, params, demand), stats, problem, index)
