import json
from fractions import Fraction

import pytest

from hybridplace.autosim import (SimConfig, TraceEvent, parse_trace, simulate, site_names,
                                 trace_to_csv)
from hybridplace.netmodel import Topology, VariantFlags, default_params, reference_demand, reference_topology
from hybridplace.solver import solve_placement

U = 300
SINGLE = Topology(1, (0,), 800, 0, False)


def constant_trace(topology, demand, t=0):
    events = [TraceEvent(t, f"p{i + 1}", c) for i, c in enumerate(demand.clients_primary)]
    events += [TraceEvent(t, f"s{i + 1}.{j + 1}", demand.clients_secondary[i][j])
               for i, j in topology.secondary_sites()]
    return events


def step_trace():
    return [TraceEvent(0, "p1", 0), TraceEvent(300, "p1", 240_000),
            TraceEvent(600, "p1", 300_000), TraceEvent(1200, "p1", 100_000)]


@pytest.fixture(scope="module")
def steps():
    return simulate(step_trace(), SINGLE, default_params(), SimConfig(horizon=2400))


def test_site_names():
    assert site_names(reference_topology("fig6a"))[:4] == ["cloud", "p1", "p2", "p3"]
    assert site_names(reference_topology("fig6a"))[-1] == "s3.2"


def test_trace_csv_round_trip():
    events = step_trace()
    assert parse_trace(trace_to_csv(events)) == events


@pytest.mark.parametrize("text", ["t,site,clients\n0,p1,1\n", "time_s,site,clients\nx,p1,1\n"])
def test_bad_trace_text(text):
    with pytest.raises(ValueError):
        parse_trace(text)


@pytest.mark.parametrize("trace", [
    [TraceEvent(10, "p1", 1), TraceEvent(5, "p1", 2)],
    [TraceEvent(0, "cloud", 1)],
    [TraceEvent(0, "p9", 1)],
    [TraceEvent(0, "p1", -1)],
])
def test_invalid_traces(trace):
    with pytest.raises(ValueError):
        simulate(trace, SINGLE, default_params())


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(deploy_latency=-1)


def test_constant_demand_reaches_static_optimum():
    topo, params, demand = reference_topology("fig6a"), default_params(), reference_demand("fig7_equal")
    opt = solve_placement(topo, params, demand).placement
    res = simulate(constant_trace(topo, demand), topo, params, SimConfig(horizon=900))
    want = {"cloud": opt.n_a, "p1": opt.n_p[0], "s1.1": opt.n_s[0][0], "s3.2": opt.n_s[2][1]}
    at = res.running_at(60 + 180)
    assert {k: at[k] for k in want} == want
    assert all(res.running_at(t)[k] == v for t in (300, 600, 900) for k, v in want.items())
    steady = [iv for iv in res.intervals if iv.start >= 180]
    assert steady and all(iv.cost_rate == opt.total_cost for iv in steady)
    assert all(iv.unserved == 0 for iv in steady)


def test_overflow_goes_to_cloud_only_past_site_capacity(steps):
    assert steps.running_at(599).get("cloud", 0) == 0
    assert steps.running_at(600 + 180)["cloud"] == 200
    assert steps.running_at(600 + 180)["p1"] == 800


def test_unserved_only_in_deploy_windows(steps):
    windows = [(300, 480), (600, 780)]
    for iv in steps.intervals:
        if iv.unserved > 0:
            assert any(a <= iv.start and iv.end <= b for a, b in windows), iv
    assert steps.unserved_client_seconds == 240_000 * 180 + 60_000 * 180


def test_destroys_lag(steps):
    # demand drops at 1200; surplus servers keep running for destroy_latency
    assert steps.running_at(1259) == {"cloud": 200, "p1": 800}
    assert steps.running_at(1260) == {"cloud": 0, "p1": 334}


def test_served_never_exceeds_capacity(steps):
    for iv in steps.intervals:
        for site, served in iv.served.items():
            assert served <= iv.running[site] * U


def test_cost_is_integral_of_rates(steps):
    total = sum(iv.cost_rate * (Fraction(iv.end) - Fraction(iv.start)) / 3600 for iv in steps.intervals)
    assert steps.cost == total


def test_deterministic_and_serializable(steps):
    again = simulate(step_trace(), SINGLE, default_params(), SimConfig(horizon=2400))
    assert again.to_json() == steps.to_json()
    doc = json.loads(steps.to_json())
    assert doc["timeline"][0]["site"] == "cloud"
    assert steps.summary_csv().splitlines()[0] == "site,final_running,peak_running,server_hours"


def test_event_driven_epoch_and_zero_latency():
    res = simulate(step_trace(), SINGLE, default_params(),
                   SimConfig(deploy_latency=0, destroy_latency=0, decision_epoch=0, horizon=1500))
    assert res.unserved_client_seconds == 0
    assert res.running_at(600)["cloud"] == 200


def test_infeasible_plan_is_logged():
    res = simulate([TraceEvent(0, "p1", 300_000)], SINGLE, default_params(),
                   SimConfig(horizon=200), flags=VariantFlags(allow_cloud=False))
    assert res.decisions[0]["feasible"] is False
