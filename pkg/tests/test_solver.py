import math
import time
from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import linprog

from _instances import random_instances, tiny
from hybridplace.builder import build, cost_of, encode
from hybridplace.milp import EQ, GE, LE, Constraint, LinExpr, MilpProblem, Variable, check_feasible
from hybridplace.netmodel import (Demand, Topology, VariantFlags, default_params, reference_demand,
                                  reference_topology)
from hybridplace.solver import (InfeasibleModel, SolverConfig, SolverLimit, TooLarge, brute_force,
                                greedy_bound, solve_lp, solve_milp, solve_placement)
from hybridplace.solver.lp import INFEASIBLE, OPTIMAL, UNBOUNDED


def single_primary(clients, capacity=800):
    return Topology(1, (0,), capacity, 0, False), default_params(), Demand((clients,), ((),))


# ---- LP relaxation ----

def test_lp_zero_demand():
    problem, _ = build(*single_primary(0))
    res = solve_lp(problem)
    assert res.status == OPTIMAL and res.objective == 0 and not any(res.assignment)


def test_lp_fractional_servers():
    problem, index = build(*single_primary(450))
    res = solve_lp(problem)
    assert res.assignment[index.n_p[0]] == Fraction(3, 2)
    assert res.objective == 9000  # 9 cents


def test_lp_status_codes():
    x = (Variable(0, "x", 0, None, False),)
    unbounded = MilpProblem(x, (), LinExpr.of([(0, -1)]))
    assert solve_lp(unbounded).status == UNBOUNDED
    infeasible = MilpProblem(x, (Constraint(LinExpr.of([(0, 1)], 1), LE, "neg"),), LinExpr())
    assert solve_lp(infeasible).status == INFEASIBLE


def test_lp_ge_and_eq_rows():
    v = (Variable(0, "x", 0, 10, False), Variable(1, "y", 0, 10, False))
    p = MilpProblem(v, (Constraint(LinExpr.of([(0, 1), (1, 1)], -4), GE, "cover"),
                        Constraint(LinExpr.of([(0, 1), (1, -1)], -1), EQ, "gap")),
                    LinExpr.of([(0, 3), (1, 2)]))
    res = solve_lp(p)
    assert res.objective == Fraction(3 * 5, 2) + 2 * Fraction(3, 2)


def _scipy_lp(problem):
    n = len(problem.variables)
    c = np.array([float(problem.objective.coef(k)) for k in range(n)])
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for con in problem.constraints:
        row = np.zeros(n)
        for v, a in con.expr.terms:
            row[v] = float(a)
        k = float(con.expr.constant)
        if con.relation == EQ:
            A_eq.append(row), b_eq.append(-k)
        elif con.relation == LE:
            A_ub.append(row), b_ub.append(-k)
        else:
            A_ub.append(-row), b_ub.append(k)
    bounds = [(float(v.lower), None if v.upper is None else float(v.upper)) for v in problem.variables]
    res = linprog(c, A_ub=A_ub or None, b_ub=b_ub or None, A_eq=A_eq or None, b_eq=b_eq or None,
                  bounds=bounds, method="highs")
    return res.status, (res.fun + float(problem.objective.constant) if res.status == 0 else None)


def test_lp_matches_scipy_on_random_instances():
    checked = 0
    for topo, params, demand in random_instances(60, seed=11):
        problem, _ = build(topo, params, demand)
        ours = solve_lp(problem)
        status, value = _scipy_lp(problem)
        assert (ours.status == OPTIMAL) == (status == 0)
        if status == 0:
            assert float(ours.objective) == pytest.approx(value, rel=1e-9, abs=1e-6)
            checked += 1
    assert checked > 20


def test_lp_matches_scipy_on_reference_model():
    problem, _ = build(reference_topology("fig6a"), default_params(), reference_demand("fig6_split"))
    _, value = _scipy_lp(problem)
    assert float(solve_lp(problem).objective) == pytest.approx(value, rel=1e-9)


# ---- branch and bound ----

def test_tiny_instance_optimum():
    sol = solve_placement(*tiny())
    p = sol.placement
    assert p.total_cost == 14_400
    assert (p.n_p, p.S_p, p.n_s) == ((2,), (6,), ((0,),))
    assert sol.stats.proven_optimal


def test_reference_totals():
    params = default_params()
    a = solve_placement(reference_topology("fig6a"), params, reference_demand("fig6_split"))
    b = solve_placement(reference_topology("fig6b"), params, reference_demand("fig6_split"))
    assert a.placement.total_cost == 14_598_940_000
    assert b.placement.total_cost == 14_722_140_000


def test_infeasible_model():
    topo, params, demand = single_primary(300_000)
    with pytest.raises(InfeasibleModel):
        solve_placement(topo, params, demand, VariantFlags(allow_cloud=False))


def test_node_limit_without_incumbent():
    # parity knapsack: the LP optimum is fractional and no node finds an integral point at once
    v = tuple(Variable(k, f"x{k}", 0, 10) for k in range(3))
    p = MilpProblem(v, (Constraint(LinExpr.of([(0, 2), (1, 2), (2, 2)], -7), GE, "odd"),),
                    LinExpr.of([(0, 3), (1, 4), (2, 5)]))
    with pytest.raises(SolverLimit):
        solve_milp(p, SolverConfig(node_limit=1))
    x, stats = solve_milp(p)
    assert stats.proven_optimal and stats.incumbent == 12


def test_limit_returns_incumbent_unproven():
    topo, params, demand = tiny()
    problem, _ = build(topo, params, demand)
    x, _ = solve_milp(problem)
    x2, stats = solve_milp(problem, SolverConfig(node_limit=0), incumbent=x)
    assert x2 == x and not stats.proven_optimal


def test_bad_incumbent_rejected():
    problem, _ = build(*tiny())
    with pytest.raises(ValueError):
        solve_milp(problem, incumbent=[0] * len(problem.variables))


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(node_limit=-1)
    with pytest.raises(ValueError):
        SolverConfig(branching="pseudo_cost")


def test_determinism():
    inst = (reference_topology("fig6a"), default_params(), reference_demand("fig6_split"))
    a, b = solve_placement(*inst), solve_placement(*inst)
    assert a.placement == b.placement
    assert (a.stats.nodes, a.stats.lp_iterations) == (b.stats.nodes, b.stats.lp_iterations)


@pytest.mark.parametrize("k", [2, 7])
def test_price_scaling(k):
    for topo, params, demand in random_instances(25, seed=5):
        try:
            base = solve_placement(topo, params, demand).placement.total_cost
        except InfeasibleModel:
            continue
        assert solve_placement(topo, params.scaled(k), demand).placement.total_cost == k * base


# ---- greedy ----

def test_greedy_tiny():
    assert greedy_bound(*tiny()).total_cost == 20_000


def test_greedy_reference_equals_optimum():
    inst = (reference_topology("fig6a"), default_params(), reference_demand("fig7_equal"))
    assert greedy_bound(*inst).total_cost == 13_780_360_000 == solve_placement(*inst).placement.total_cost


def test_greedy_all_local():
    topo = reference_topology("fig6a")
    demand = Demand((1000, 2000, 3000), ((10, 20), (30, 0), (100, 299)))
    g = greedy_bound(topo, default_params(), demand)
    assert g.n_a == 0 and sum(g.S_a) == 0
    assert g.total_cost == solve_placement(topo, default_params(), demand).placement.total_cost


def test_greedy_infeasible():
    with pytest.raises(InfeasibleModel):
        greedy_bound(*single_primary(300_000), VariantFlags(allow_cloud=False))


# ---- brute force oracle ----

def test_brute_force_zero_demand():
    topo = Topology(1, (1,), 2, 1, False)
    problem, _ = build(topo, default_params(), Demand.zero(topo))
    assert brute_force(problem)[1] == 0


def test_brute_force_tiny():
    problem, _ = build(*tiny())
    assert brute_force(problem)[1] == 14_400


def test_brute_force_forced_redirect():
    params = tiny()[1]
    topo = Topology(1, (1,), 2, 1, False)
    demand = Demand((0,), ((3,),))
    problem, index = build(topo, params, demand, VariantFlags(deploy_to_secondary=False))
    x, value = brute_force(problem)
    assert x[index.S_s[0, 0]] == 0 and x[index.S_p[0]] == 3
    assert value == params.primary_price(0) + 3 * params.secondary_link(0, 0)


def test_brute_force_guard():
    problem, _ = build(reference_topology("fig6a"), default_params(), reference_demand("fig7_equal"))
    with pytest.raises(TooLarge):
        brute_force(problem)


def test_brute_force_infeasible():
    topo = Topology(1, (0,), 1, 0, False)
    problem, _ = build(topo, tiny()[1], Demand((4,), ((),)), VariantFlags(allow_cloud=False))
    with pytest.raises(InfeasibleModel):
        brute_force(problem)


def test_oracle_agreement_sample():
    for topo, params, demand in random_instances(40, seed=3):
        problem, _ = build(topo, params, demand)
        try:
            _, expected = brute_force(problem)
        except InfeasibleModel:
            with pytest.raises(InfeasibleModel):
                solve_milp(problem)
            continue
        x, stats = solve_milp(problem)
        assert stats.incumbent == expected


# ---- properties at the optimum ----

def test_sandwich_and_tight_server_counts():
    for topo, params, demand in random_instances(60, seed=8, positive_servers=True):
        problem, index = build(topo, params, demand)
        try:
            sol = solve_placement(topo, params, demand)
        except InfeasibleModel:
            continue
        p = sol.placement
        assert check_feasible(problem, encode(index, p)) == []
        lp = solve_lp(problem).objective
        assert lp <= p.total_cost
        try:
            assert p.total_cost <= greedy_bound(topo, params, demand).total_cost
        except InfeasibleModel:
            pass
        U = params.server_capacity
        assert p.n_a == math.ceil(sum(p.S_a) / U)
        assert all(n == math.ceil(s / U) for n, s in zip(p.n_p, p.S_p))
        assert all(n == math.ceil(s / U) for rn, rs in zip(p.n_s, p.S_s) for n, s in zip(rn, rs))
        assert cost_of(p, params, demand, topo) == p.total_cost


def test_reference_solve_is_fast():
    start = time.perf_counter()
    solve_placement(reference_topology("fig6a"), default_params(), reference_demand("fig7_equal"))
    assert time.perf_counter() - start < 5
