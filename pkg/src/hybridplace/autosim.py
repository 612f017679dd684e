"""Discrete-event simulation of reactive server scaling.

Every decision epoch the static placement problem is re-solved for the
demand seen at that instant. Server pools (cloud, each primary, each
secondary) then launch or retire servers to match the new targets: launches
become usable after ``deploy_latency`` seconds, retirements complete after
``destroy_latency`` seconds and keep serving until then. Launches cannot be
cancelled.

Between decisions clients follow the latest plan. A pool serves at most
``running * U`` of the load the plan assigned to it; anything above that, and
any client that arrived after the plan was made, is dropped, not queued.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .builder import breakdown
from .netmodel import CostParams, Demand, Topology, VariantFlags
from .solver import InfeasibleModel, SolverConfig, solve_placement

CLOUD = "cloud"


@dataclass(frozen=True)
class TraceEvent:
    time: float
    site: str
    clients: int


@dataclass(frozen=True)
class SimConfig:
    deploy_latency: float = 180
    destroy_latency: float = 60
    decision_epoch: float = 60  # 0 re-plans at every trace event
    horizon: Optional[float] = None  # default: last event + deploy latency + two epochs

    def __post_init__(self):
        for name in ("deploy_latency", "destroy_latency", "decision_epoch"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


@dataclass(frozen=True)
class TimelinePoint:
    time: float
    site: str
    running: int
    pending: int
    draining: int


@dataclass(frozen=True)
class Interval:
    start: float
    end: float
    demand: int
    running: dict
    served: dict
    unserved: Fraction
    cost_rate: Fraction  # milli-cents per hour


@dataclass
class SimResult:
    timeline: list = field(default_factory=list)
    intervals: list = field(default_factory=list)
    decisions: list = field(default_factory=list)
    served_client_seconds: Fraction = Fraction(0)
    unserved_client_seconds: Fraction = Fraction(0)
    cost: Fraction = Fraction(0)  # milli-cents

    @property
    def cost_cents(self) -> Fraction:
        return self.cost / 1000

    def running_at(self, t: float) -> dict:
        state = {}
        for p in self.timeline:
            if p.time > t:
                break
            state[p.site] = p.running
        return state

    def to_json(self) -> str:
        return json.dumps({
            "timeline": [p.__dict__ for p in self.timeline],
            "decisions": self.decisions,
            "served_client_seconds": float(self.served_client_seconds),
            "unserved_client_seconds": float(self.unserved_client_seconds),
            "cost_cents": float(self.cost_cents),
        }, indent=2)

    def summary_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["site", "final_running", "peak_running", "server_hours"])
        sites = list(dict.fromkeys(p.site for p in self.timeline))
        for site in sites:
            peak = max(p.running for p in self.timeline if p.site == site)
            final = [p.running for p in self.timeline if p.site == site][-1]
            hours = sum(Fraction(iv.running.get(site, 0)) * Fraction(iv.end - iv.start) / 3600
                        for iv in self.intervals)
            w.writerow([site, final, peak, f"{float(hours):.4f}"])
        return buf.getvalue()


def site_names(topology: Topology) -> list[str]:
    """Server pools: ``cloud``, ``p<i>`` and ``s<i>.<j>``, 1-based."""
    names = [CLOUD] + [f"p{i + 1}" for i in range(topology.primary_count)]
    names += [f"s{i + 1}.{j + 1}" for i, j in topology.secondary_sites()]
    return names


def parse_trace(text: str) -> list[TraceEvent]:
    """Read ``time_s,site,clients`` CSV (header required)."""
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["time_s", "site", "clients"]:
        raise ValueError("trace header must be time_s,site,clients")
    events = []
    for line, row in enumerate(reader, start=2):
        try:
            t = float(row["time_s"])
            clients = int(row["clients"])
        except (TypeError, ValueError) as exc:
            raise ValueError(f"trace line {line}: {exc}") from None
        events.append(TraceEvent(int(t) if t.is_integer() else t, row["site"].strip(), clients))
    return events


def trace_to_csv(events) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["time_s", "site", "clients"])
    for e in events:
        w.writerow([e.time, e.site, e.clients])
    return buf.getvalue()


def _check_trace(trace, topology):
    origins = set(site_names(topology)) - {CLOUD}
    last = -math.inf
    for e in trace:
        if e.time < last:
            raise ValueError(f"trace times must be non-decreasing (t={e.time} after t={last})")
        if e.time < 0:
            raise ValueError("trace times must be >= 0")
        if e.site not in origins:
            raise ValueError(f"unknown or ineligible trace site {e.site!r}")
        if e.clients < 0:
            raise ValueError(f"negative demand at t={e.time} for {e.site}")
        last = e.time


class _Pool:
    def __init__(self, price):
        self.price = price
        self.running = 0
        self.deploys = []   # ready times
        self.destroys = []  # completion times

    def settle(self, t):
        done = [r for r in self.deploys if r <= t]
        self.deploys = [r for r in self.deploys if r > t]
        gone = [r for r in self.destroys if r <= t]
        self.destroys = [r for r in self.destroys if r > t]
        self.running += len(done) - len(gone)

    def retarget(self, target, t, cfg):
        effective = self.running + len(self.deploys) - len(self.destroys)
        if target > effective:
            self.deploys += [t + cfg.deploy_latency] * (target - effective)
        elif target < effective:
            k = min(effective - target, self.running - len(self.destroys))
            self.destroys += [t + cfg.destroy_latency] * k

    def next_change(self):
        return min(self.deploys + self.destroys, default=math.inf)


def simulate(trace, topology: Topology, params: CostParams, config: SimConfig = SimConfig(),
             flags: VariantFlags = VariantFlags(),
             solver_config: SolverConfig = SolverConfig()) -> SimResult:
    trace = list(trace)
    _check_trace(trace, topology)
    U = params.server_capacity
    names = site_names(topology)
    prices = {CLOUD: params.server_cloud}
    prices.update({f"p{i + 1}": params.primary_price(i) for i in range(topology.primary_count)})
    prices.update({f"s{i + 1}.{j + 1}": params.secondary_price(i, j) for i, j in topology.secondary_sites()})
    pools = {name: _Pool(prices[name]) for name in names}

    clients = {name: 0 for name in names if name != CLOUD}
    last_event = trace[-1].time if trace else 0
    horizon = config.horizon
    if horizon is None:
        horizon = last_event + config.deploy_latency + 2 * max(config.decision_epoch, 1)
    epoch = config.decision_epoch

    result = SimResult()
    cache = {}
    plan_loads = {name: 0 for name in names}
    plan_demand = 0
    plan_link_rate = 0
    last_state = {}

    def demand_now() -> Demand:
        return Demand(
            tuple(clients[f"p{i + 1}"] for i in range(topology.primary_count)),
            tuple(tuple(clients[f"s{i + 1}.{j + 1}"] for j in range(k))
                  for i, k in enumerate(topology.secondaries_per_primary)))

    def decide(t):
        nonlocal plan_loads, plan_demand, plan_link_rate
        demand = demand_now()
        key = (demand.clients_primary, demand.clients_secondary)
        if key not in cache:
            try:
                cache[key] = solve_placement(topology, params, demand, flags, solver_config).placement
            except InfeasibleModel:
                cache[key] = None
        p = cache[key]
        if p is None:
            result.decisions.append({"time": t, "demand": demand.total, "feasible": False})
            return
        targets = {CLOUD: p.n_a}
        loads = {CLOUD: sum(p.S_a)}
        for i in range(topology.primary_count):
            targets[f"p{i + 1}"] = p.n_p[i]
            loads[f"p{i + 1}"] = p.S_p[i]
        for i, j in topology.secondary_sites():
            targets[f"s{i + 1}.{j + 1}"] = p.n_s[i][j]
            loads[f"s{i + 1}.{j + 1}"] = p.S_s[i][j]
        for name in names:
            pools[name].retarget(targets[name], t, config)
        terms = breakdown(p, params, demand, topology)
        plan_loads, plan_demand = loads, demand.total
        plan_link_rate = terms["D"] + terms["E"] + terms["F"]
        result.decisions.append({"time": t, "demand": demand.total, "feasible": True,
                                 "targets": targets, "objective_millicents": p.total_cost})

    k = 0
    t = 0
    next_epoch = 0
    while t <= horizon:
        for pool in pools.values():
            pool.settle(t)
        arrived = False
        while k < len(trace) and trace[k].time <= t:
            clients[trace[k].site] = trace[k].clients
            k += 1
            arrived = True
        if (epoch > 0 and t >= next_epoch) or (epoch == 0 and (t == 0 or arrived)):
            decide(t)
            if epoch > 0:
                while next_epoch <= t:
                    next_epoch += epoch
            for pool in pools.values():
                pool.settle(t)  # zero latencies complete at once

        for name in names:
            pool = pools[name]
            state = (pool.running, len(pool.deploys), len(pool.destroys))
            if last_state.get(name) != state:
                result.timeline.append(TimelinePoint(t, name, *state))
                last_state[name] = state

        candidates = [pool.next_change() for pool in pools.values()]
        if k < len(trace):
            candidates.append(trace[k].time)
        if epoch > 0:
            candidates.append(next_epoch)
        t_next = min(min(candidates), horizon) if t < horizon else math.inf
        if t_next == math.inf:
            break

        total = sum(clients.values())
        scale = min(Fraction(1), Fraction(total, plan_demand)) if plan_demand else Fraction(0)
        served = {name: min(scale * plan_loads[name], pools[name].running * U) for name in names}
        unserved = total - sum(served.values())
        rate = sum(pools[n].running * pools[n].price for n in names) + scale * plan_link_rate
        dt = Fraction(t_next) - Fraction(t)
        result.intervals.append(Interval(t, t_next, total, {n: pools[n].running for n in names},
                                         served, unserved, rate))
        result.served_client_seconds += sum(served.values()) * dt
        result.unserved_client_seconds += unserved * dt
        result.cost += rate * dt / 3600
        t = t_next
    return result
