"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""
import math
import random
from contextlib import contextmanager
from decimal import Decimal
from fractions import Fraction
from pathlib import Path

import pytest

from _instances import random_instance
from conftest import ACCEPTANCE
from hybridplace.autosim import SimConfig, TraceEvent, simulate
from hybridplace.builder import build, encode
from hybridplace.exporters import export_ampl, export_lp, read_lp
from hybridplace.milp import check_feasible
from hybridplace.netmodel import (Demand, Topology, VariantFlags, default_params, reference_demand,
                                  reference_topology)
from hybridplace.scenarios import run_figure8, run_redirect_sweep, run_table2, run_table3
from hybridplace.solver import (InfeasibleModel, brute_force, greedy_bound, solve_lp, solve_milp,
                                solve_placement)

GOLDEN = Path(__file__).parent / "golden"
RANDOM_COUNT = 200


@contextmanager
def criterion(n, title):
    state = {"detail": ""}
    try:
        yield state
    except BaseException as exc:
        ACCEPTANCE[n] = (title, False, state["detail"] or repr(exc)[:200])
        print(f"[FAIL] {n}. {title}: {state['detail'] or exc}")
        raise
    ACCEPTANCE[n] = (title, True, state["detail"])
    print(f"[PASS] {n}. {title}: {state['detail']}")


def usd_close(value, target):
    return abs(Decimal(value) - Decimal(target)) <= Decimal("0.005")


REFERENCE = [(t, d) for t in ("fig6a", "fig6b") for d in ("fig7_equal", "fig6_split")]
FLAGS = {
    "no-inter-primary": VariantFlags(inter_primary_redirect=False),
    "no-secondary": VariantFlags(deploy_to_secondary=False),
    "no-redirect": VariantFlags(allow_secondary_redirect=False),
    "no-cloud": VariantFlags(allow_cloud=False),
    "cloud-only": VariantFlags(cloud_only=True),
}


def test_1_table2_reproduction():
    with criterion(1, "topology comparison totals and server counts") as c:
        rec = run_table2()
        a, b = rec.arms["6a"], rec.arms["6b"]
        c["detail"] = f"6a {rec.totals['6a']}, 6b {rec.totals['6b']}, delta {rec.delta} USD/h"
        assert usd_close(rec.totals["6a"], "145989.40")
        assert usd_close(rec.totals["6b"], "147221.40")
        assert rec.delta == Decimal("1232.00")
        assert (a.n_a, b.n_a) == (20534, 21334)
        assert a.n_p == (800, 800, 800) and b.n_p == (800, 0, 800)
        assert a.n_s == b.n_s == ((100, 100), (0, 0), (100, 100))


def test_2_table3_reproduction():
    with criterion(2, "deployment strategy totals") as c:
        rec = run_table3()
        share = rec.relative_delta * 100
        c["detail"] = (f"S1 {rec.totals['S1']}, S2 {rec.totals['S2']}, delta {rec.delta} USD/h "
                       f"({share:.2f}% of S1)")
        assert usd_close(rec.totals["S1"], "142675.60")
        assert usd_close(rec.totals["S2"], "137803.60")
        assert rec.delta == Decimal("4872.00")
        assert round(share, 2) == Decimal("3.41")


def test_3_figure8_shape():
    with criterion(3, "single-site cost curves") as c:
        sweep = run_figure8((0, 400_000), 20_000)
        params = default_params()
        U, cap = params.server_capacity, 800
        for row in sweep:
            x, arms = row.x, row.placements
            hybrid, cloud, static = arms["hybrid"], arms["cloud_only"], arms["no_cloud"]
            assert hybrid.total_cost <= cloud.total_cost
            if x <= cap * U:
                assert hybrid.n_a == 0
                assert hybrid.total_cost == math.ceil(x / U) * params.server_primary
                assert row.totals["no_cloud"] == Decimal("48.00")
            else:
                over = x - cap * U
                assert hybrid.n_p == (cap,) and hybrid.n_a == math.ceil(over / U)
                assert hybrid.total_cost == (cap * params.server_primary + hybrid.n_a * params.server_cloud
                                             + over * params.link_cloud)
                assert static is None
        totals = {row.x: row.totals for row in sweep}
        below = (totals[240_000]["hybrid"] - totals[220_000]["hybrid"]) / 20_000
        above = (totals[260_000]["hybrid"] - totals[240_000]["hybrid"]) / 20_000
        assert above > 50 * below  # the curve kinks at the site capacity
        assert totals[300_000]["hybrid"] == Decimal("968.00")
        assert totals[300_000]["cloud_only"] == Decimal("4600.00")
        c["detail"] = (f"breakpoint 240000, x=300000 hybrid {totals[300_000]['hybrid']} / "
                       f"cloud-only {totals[300_000]['cloud_only']} USD/h, no-cloud 48.00 then infeasible")


def test_4_oracle_equivalence():
    with criterion(4, "branch and bound equals exhaustive enumeration") as c:
        rng = random.Random(2024)
        variants = [VariantFlags()] * 4 + list(FLAGS.values())
        solved = infeasible = attempts = 0
        while solved < RANDOM_COUNT:
            attempts += 1
            assert attempts <= 2 * RANDOM_COUNT
            topo, params, demand = random_instance(rng)
            problem, _ = build(topo, params, demand, rng.choice(variants))
            try:
                _, expected = brute_force(problem)
            except InfeasibleModel:
                with pytest.raises(InfeasibleModel):
                    solve_milp(problem)
                infeasible += 1
                continue
            _, stats = solve_milp(problem)
            assert stats.proven_optimal and stats.incumbent == expected
            solved += 1
        c["detail"] = f"{solved} optima identical, {infeasible} more instances infeasible in both"


def test_5_bound_sandwich():
    with criterion(5, "LP <= MILP <= greedy, servers = ceil(load / U)") as c:
        rng = random.Random(77)
        checked = 0
        for _ in range(RANDOM_COUNT):
            topo, params, demand = random_instance(rng, positive_servers=True)
            problem, index = build(topo, params, demand)
            try:
                sol = solve_placement(topo, params, demand)
            except InfeasibleModel:
                continue
            p, U = sol.placement, params.server_capacity
            assert solve_lp(problem).objective <= p.total_cost
            try:
                assert p.total_cost <= greedy_bound(topo, params, demand).total_cost
            except InfeasibleModel:
                pass  # greedy only gives a bound where it finds a placement
            assert p.n_a == math.ceil(sum(p.S_a) / U)
            assert all(n == math.ceil(s / U) for n, s in zip(p.n_p, p.S_p))
            assert all(n == math.ceil(s / U) for rn, rs in zip(p.n_s, p.S_s) for n, s in zip(rn, rs))
            checked += 1
        c["detail"] = f"{checked} feasible instances checked"
        assert checked >= 100


def test_6_redirect_sweep():
    with criterion(6, "secondary redirection sweep 20000-40000") as c:
        sweep = run_redirect_sweep(20_000, 40_000, 1_000)
        for row in sweep:
            nr, opt = row.placements["no_redirect"], row.placements["optimized"]
            if nr is not None:
                assert opt.total_cost <= nr.total_cost
        best = Decimal(sweep.meta["max_relative_saving"])
        feasible = sum(1 for row in sweep if row.placements["no_redirect"] is not None)
        c["detail"] = (f"max saving {best * 100:.4f}% over {feasible} comparable points; "
                       f"layout: {sweep.meta['layout']}")
        assert Decimal(0) <= best <= Decimal("0.02")


def test_7_variant_correctness():
    with criterion(7, "variant flags only shrink the feasible set") as c:
        params = default_params()
        costlier = equal = infeasible = 0
        for tname, dname in REFERENCE:
            topo, demand = reference_topology(tname), reference_demand(dname)
            base_problem, index = build(topo, params, demand)
            base = solve_placement(topo, params, demand).placement.total_cost
            for flags in FLAGS.values():
                try:
                    restricted = solve_placement(topo, params, demand, flags).placement
                except InfeasibleModel:
                    infeasible += 1  # empty feasible set: infinitely expensive
                    continue
                assert restricted.total_cost >= base
                # the restricted optimum is also a point of the unrestricted model
                assert check_feasible(base_problem, encode(index, restricted)) == []
                costlier += restricted.total_cost > base
                equal += restricted.total_cost == base
        c["detail"] = (f"{len(REFERENCE) * len(FLAGS)} flag/instance pairs: {costlier} costlier, "
                       f"{equal} equal, {infeasible} infeasible")


def _constant(topo, demand):
    ev = [TraceEvent(0, f"p{i + 1}", v) for i, v in enumerate(demand.clients_primary)]
    return ev + [TraceEvent(0, f"s{i + 1}.{j + 1}", demand.clients_secondary[i][j])
                 for i, j in topo.secondary_sites()]


def _targets(topo, p):
    out = {"cloud": p.n_a}
    out.update({f"p{i + 1}": v for i, v in enumerate(p.n_p)})
    out.update({f"s{i + 1}.{j + 1}": p.n_s[i][j] for i, j in topo.secondary_sites()})
    return out


def test_8_autosim_fixed_point():
    with criterion(8, "simulator converges and only drops clients while deploying") as c:
        params, cfg = default_params(), SimConfig()
        settle = cfg.decision_epoch + cfg.deploy_latency
        cases = [(reference_topology(t), reference_demand(d)) for t, d in REFERENCE]
        rng = random.Random(5)
        for _ in range(6):
            topo = Topology(2, (1, 2), 50, 10, True)
            cases.append((topo, Demand((rng.randint(0, 30_000), rng.randint(0, 30_000)),
                                       ((rng.randint(0, 5000),), (rng.randint(0, 5000), rng.randint(0, 5000))))))
        for topo, demand in cases:
            opt = solve_placement(topo, params, demand).placement
            res = simulate(_constant(topo, demand), topo, params, SimConfig(horizon=settle + 600))
            for t in (settle, settle + 300, settle + 600):
                assert res.running_at(t) == _targets(topo, opt)
            assert all(iv.cost_rate == opt.total_cost for iv in res.intervals if iv.start >= settle)

        single = Topology(1, (0,), 800, 0, False)
        steps = [(0, 0), (300, 240_000), (600, 300_000), (1200, 100_000), (1500, 280_000)]
        res = simulate([TraceEvent(t, "p1", v) for t, v in steps], single, params, SimConfig(horizon=2400))
        windows = [(t, t + cfg.deploy_latency) for t, _ in steps]
        outside = [iv for iv in res.intervals if iv.unserved > 0
                   and not any(a <= iv.start and iv.end <= b for a, b in windows)]
        assert not outside and res.unserved_client_seconds > 0
        assert res.running_at(599).get("cloud", 0) == 0 and res.running_at(780)["cloud"] > 0
        c["detail"] = (f"{len(cases)} constant traces settled by t={settle} s; step trace dropped "
                       f"{res.unserved_client_seconds} client-seconds, all inside deploy windows")


def test_9_export_round_trip():
    with criterion(9, "LP round trip and AMPL golden files") as c:
        rng = random.Random(9)
        problems = [build(reference_topology(t), default_params(), reference_demand(d), f)[0]
                    for t, d in REFERENCE for f in (VariantFlags(), *FLAGS.values())
                    if not (f.cloud_only and not f.allow_cloud)]
        problems += [build(*random_instance(rng))[0] for _ in range(50)]
        for p in problems:
            text = export_lp(p)
            assert read_lp(text) == p and export_lp(read_lp(text)) == text
        mod, dat = export_ampl(reference_topology("fig6a"), default_params(), reference_demand("fig7_equal"))
        assert mod == (GOLDEN / "fig7_equal.mod").read_text()
        assert dat == (GOLDEN / "fig7_equal.dat").read_text()
        c["detail"] = f"{len(problems)} LP files round-tripped, AMPL model/data byte-identical"
